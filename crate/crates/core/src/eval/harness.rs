//! Clustering baselines and the Avg P/R/F1 harness.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::agreement::{cluster_f1_with, F1Aggregation, Prf};
use crate::clustering::{default_penalty, kmeans_with, select_k, KMeansOptions};
use crate::corpus::{normalize_for_match, AnswerGrouping, QuestionId};
use crate::embeddings::{embed_answer, EmbeddingTable};

pub type Partition = Vec<BTreeSet<usize>>;

/// Assigns each item independently and uniformly to one of `k` clusters;
/// empty clusters are dropped.
pub fn baseline_random(
    items: &[usize],
    k: usize,
    rng: &mut impl Rng,
) -> Result<Partition, EvalError> {
    if k == 0 || k > items.len() {
        return Err(EvalError::Argument(format!(
            "K = {k} out of range for {} answer(s)",
            items.len()
        )));
    }
    let mut clusters = vec![BTreeSet::new(); k];
    for &i in items {
        clusters[rng.gen_range(0..k)].insert(i);
    }
    clusters.retain(|c| !c.is_empty());
    Ok(clusters)
}

pub fn baseline_random_seeded(
    items: &[usize],
    k: usize,
    seed: u64,
) -> Result<Partition, EvalError> {
    baseline_random(items, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn baseline_perfect_precision(items: &[usize]) -> Partition {
    items.iter().map(|&i| BTreeSet::from([i])).collect()
}

pub fn baseline_perfect_recall(items: &[usize]) -> Partition {
    vec![items.iter().copied().collect()]
}

const REPR_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReprFormat {
    /// `question_id<TAB>answer_index<TAB>v1 v2 ...` per line.
    Tsv,
    /// Little-endian f32, `count * dim` values, keyed by the manifest.
    F32le,
}

/// Manifest describing a file of externally produced answer vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReprManifest {
    #[serde(default = "default_repr_version")]
    pub schema_version: u32,
    pub source: String,
    pub dim: usize,
    pub count: usize,
    pub format: ReprFormat,
    /// Data file, relative to the manifest.
    pub data: PathBuf,
    /// Row keys for binary data, in row order.
    #[serde(default)]
    pub keys: Vec<(QuestionId, usize)>,
}

fn default_repr_version() -> u32 {
    REPR_SCHEMA_VERSION
}

/// Dense vectors per `(question_id, answer_index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationFile {
    pub source: String,
    pub dim: usize,
    vectors: BTreeMap<(QuestionId, usize), Vec<f64>>,
}

impl RepresentationFile {
    pub fn new(
        source: impl Into<String>,
        dim: usize,
        entries: impl IntoIterator<Item = ((QuestionId, usize), Vec<f64>)>,
    ) -> Result<Self, EvalError> {
        let mut vectors = BTreeMap::new();
        for (key, v) in entries {
            if v.len() != dim {
                return Err(EvalError::Representation(format!(
                    "vector for ({}, {}) has dimension {}, expected {dim}",
                    key.0,
                    key.1,
                    v.len()
                )));
            }
            if vectors.insert(key.clone(), v).is_some() {
                return Err(EvalError::Representation(format!(
                    "duplicate key ({}, {})",
                    key.0, key.1
                )));
            }
        }
        Ok(Self {
            source: source.into(),
            dim,
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, question_id: &QuestionId, answer_index: usize) -> Result<&[f64], EvalError> {
        self.vectors
            .get(&(question_id.clone(), answer_index))
            .map(Vec::as_slice)
            .ok_or_else(|| EvalError::MissingVector {
                question_id: question_id.clone(),
                answer_index,
            })
    }

    /// Checks that every key names an answer present in `gold`.
    pub fn check_keys(&self, gold: &[AnswerGrouping]) -> Result<(), EvalError> {
        let known: BTreeSet<(&QuestionId, usize)> = gold
            .iter()
            .flat_map(|g| {
                g.grouped_indices()
                    .into_iter()
                    .map(move |i| (&g.question_id, i))
            })
            .collect();
        match self.vectors.keys().find(|(q, i)| !known.contains(&(q, *i))) {
            Some((q, i)) => Err(EvalError::Representation(format!(
                "key ({q}, {i}) does not resolve to a gold answer"
            ))),
            None => Ok(()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> EvalError {
    EvalError::Io {
        path: path.to_owned(),
        source: e,
    }
}

pub fn load_representations(manifest_path: &Path) -> Result<RepresentationFile, EvalError> {
    let text = std::fs::read_to_string(manifest_path).map_err(|e| io_err(manifest_path, e))?;
    let m: ReprManifest = serde_json::from_str(&text)
        .map_err(|e| EvalError::Representation(format!("{}: {e}", manifest_path.display())))?;
    if m.schema_version != REPR_SCHEMA_VERSION {
        return Err(EvalError::Representation(format!(
            "unsupported manifest schema_version {}",
            m.schema_version
        )));
    }
    let data = manifest_path
        .parent()
        .unwrap_or(Path::new(""))
        .join(&m.data);
    let file = File::open(&data).map_err(|e| io_err(&data, e))?;
    let mut entries = Vec::with_capacity(m.count);
    match m.format {
        ReprFormat::Tsv => {
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| io_err(&data, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let bad = |msg: &str| {
                    EvalError::Representation(format!("{}:{}: {msg}", data.display(), n + 1))
                };
                let mut cols = line.split('\t');
                let (Some(q), Some(i), Some(v)) = (cols.next(), cols.next(), cols.next()) else {
                    return Err(bad("expected three tab-separated columns"));
                };
                let idx: usize = i
                    .trim()
                    .parse()
                    .map_err(|_| bad("answer index is not an integer"))?;
                let vec: Vec<f64> = v
                    .split_whitespace()
                    .map(str::parse)
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("unparseable float"))?;
                entries.push(((QuestionId::from(q), idx), vec));
            }
        }
        ReprFormat::F32le => {
            if m.keys.len() != m.count {
                return Err(EvalError::Representation(format!(
                    "manifest lists {} keys for count {}",
                    m.keys.len(),
                    m.count
                )));
            }
            let mut bytes = Vec::new();
            BufReader::new(file)
                .read_to_end(&mut bytes)
                .map_err(|e| io_err(&data, e))?;
            if bytes.len() != m.count * m.dim * 4 {
                return Err(EvalError::Representation(format!(
                    "{} holds {} bytes, expected {}",
                    data.display(),
                    bytes.len(),
                    m.count * m.dim * 4
                )));
            }
            let floats: Vec<f64> = bytes
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
                .collect();
            for (key, row) in m.keys.into_iter().zip(floats.chunks(m.dim.max(1))) {
                entries.push((key, row.to_vec()));
            }
        }
    }
    if entries.len() != m.count {
        return Err(EvalError::Representation(format!(
            "manifest count {} but {} vectors read",
            m.count,
            entries.len()
        )));
    }
    RepresentationFile::new(m.source, m.dim, entries)
}

/// k-means over the supplied answer vectors with `k` taken from gold.
pub fn cluster_representations(
    reprs: &RepresentationFile,
    question_id: &QuestionId,
    items: &[usize],
    k: usize,
    opts: &KMeansOptions,
) -> Result<Partition, EvalError> {
    if k == 0 || k > items.len() {
        return Err(EvalError::Argument(format!(
            "K = {k} out of range for {} answer(s)",
            items.len()
        )));
    }
    let points: Vec<Vec<f64>> = items
        .iter()
        .map(|&i| reprs.get(question_id, i).map(<[f64]>::to_vec))
        .collect::<Result<_, _>>()?;
    let r = kmeans_with(&points, k, opts)?;
    Ok(to_partition(items, &r.assignments))
}

fn to_partition(items: &[usize], assignments: &[usize]) -> Partition {
    let mut by_cluster: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (&item, &a) in items.iter().zip(assignments) {
        by_cluster.entry(a).or_default().insert(item);
    }
    by_cluster.into_values().collect()
}

/// The gold side of one evaluation example.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldExample {
    pub question_id: QuestionId,
    pub items: Vec<usize>,
    pub texts: BTreeMap<usize, String>,
    pub partition: Partition,
}

impl GoldExample {
    fn from_grouping(g: &AnswerGrouping) -> Option<Self> {
        if !g.ambiguous
            || g.groups.is_empty()
            || g.groups.iter().any(|gr| gr.member_indices.is_empty())
        {
            return None;
        }
        let mut texts = BTreeMap::new();
        for gr in &g.groups {
            if gr.answer_texts.len() == gr.member_indices.len() {
                texts.extend(
                    gr.member_indices
                        .iter()
                        .copied()
                        .zip(gr.answer_texts.iter().cloned()),
                );
            }
        }
        Some(Self {
            question_id: g.question_id.clone(),
            items: g.grouped_indices().into_iter().collect(),
            texts,
            partition: g.partition(),
        })
    }

    fn text(&self, i: usize) -> Result<&str, EvalError> {
        self.texts
            .get(&i)
            .map(String::as_str)
            .ok_or_else(|| EvalError::MissingText {
                question_id: self.question_id.clone(),
                answer_index: i,
            })
    }
}

/// A clustering method under evaluation.
#[derive(Debug, Clone, Copy)]
pub enum Method<'a> {
    /// Uniform random assignment to K = #gold groups clusters.
    Random {
        seed: u64,
    },
    PerfectPrecision,
    PerfectRecall,
    /// Mean-pooled word vectors clustered with increasing k and a
    /// per-cluster penalty, as used to pre-group the annotation board.
    GloveInitial {
        table: &'a EmbeddingTable,
        k_max: usize,
        /// `None` derives the penalty from all evaluated answers.
        penalty: Option<f64>,
        kmeans: KMeansOptions,
    },
    /// k-means over external representations with K = #gold groups.
    Representations {
        reprs: &'a RepresentationFile,
        kmeans: KMeansOptions,
    },
}

impl Method<'_> {
    pub fn name(&self) -> String {
        match self {
            Method::Random { .. } => "Random".into(),
            Method::PerfectPrecision => "Perfect P".into(),
            Method::PerfectRecall => "Perfect R".into(),
            Method::GloveInitial { .. } => "GloVe initial".into(),
            Method::Representations { reprs, .. } => reprs.source.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    Equal,
    /// Weight each example by its number of gold answers.
    AnswerCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvalOptions {
    pub aggregation: F1Aggregation,
    pub weighting: Weighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleScore {
    pub question_id: QuestionId,
    pub prf: Prf,
    pub n_answers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_examples: usize,
    /// Groupings without usable gold (not ambiguous, or no groups).
    pub skipped: Vec<QuestionId>,
    pub per_example: Vec<ExampleScore>,
}

/// Usable gold examples and the question ids that were skipped.
pub fn gold_examples(gold: &[AnswerGrouping]) -> (Vec<GoldExample>, Vec<QuestionId>) {
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for g in gold {
        match GoldExample::from_grouping(g) {
            Some(e) => kept.push(e),
            None => skipped.push(g.question_id.clone()),
        }
    }
    (kept, skipped)
}

fn glove_points(table: &EmbeddingTable, ex: &GoldExample) -> Result<Vec<Vec<f64>>, EvalError> {
    ex.items
        .iter()
        .map(|&i| {
            let text = normalize_for_match(ex.text(i)?);
            Ok(embed_answer(table, &text)
                .map(|v| v.vector)
                .unwrap_or_else(|_| vec![0.0; table.dim()]))
        })
        .collect()
}

fn predict(
    method: &Method<'_>,
    ex: &GoldExample,
    position: usize,
    penalty: f64,
) -> Result<Partition, EvalError> {
    let k_gold = ex.partition.len();
    match method {
        Method::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            rng.set_stream(position as u64);
            baseline_random(&ex.items, k_gold, &mut rng)
        }
        Method::PerfectPrecision => Ok(baseline_perfect_precision(&ex.items)),
        Method::PerfectRecall => Ok(baseline_perfect_recall(&ex.items)),
        Method::GloveInitial {
            table,
            k_max,
            kmeans,
            ..
        } => {
            let points = glove_points(table, ex)?;
            let r = select_k(&points, (*k_max).clamp(1, points.len()), penalty, kmeans)?;
            Ok(to_partition(&ex.items, &r.assignments))
        }
        Method::Representations { reprs, kmeans } => {
            cluster_representations(reprs, &ex.question_id, &ex.items, k_gold, kmeans)
        }
    }
}

/// Scores a method against gold groupings: per-example cluster P/R/F1,
/// averaged across examples. Examples are processed in parallel; results
/// do not depend on the thread count.
pub fn evaluate_clustering(
    method: &Method<'_>,
    gold: &[AnswerGrouping],
    opts: &EvalOptions,
) -> Result<MethodRow, EvalError> {
    let (examples, skipped) = gold_examples(gold);
    if examples.is_empty() {
        return Err(EvalError::Argument(
            "no gold example has answer groups".into(),
        ));
    }
    let penalty = match method {
        Method::GloveInitial {
            penalty: Some(p), ..
        } => *p,
        Method::GloveInitial {
            table,
            penalty: None,
            ..
        } => {
            let mut all = Vec::new();
            for ex in &examples {
                all.extend(glove_points(table, ex)?);
            }
            default_penalty(&all)
        }
        _ => 0.0,
    };

    let per_example: Vec<ExampleScore> = examples
        .par_iter()
        .enumerate()
        .map(|(pos, ex)| {
            let pred = predict(method, ex, pos, penalty)?;
            Ok(ExampleScore {
                question_id: ex.question_id.clone(),
                prf: cluster_f1_with(&pred, &ex.partition, opts.aggregation)?,
                n_answers: ex.items.len(),
            })
        })
        .collect::<Result<_, EvalError>>()?;

    let weight = |s: &ExampleScore| match opts.weighting {
        Weighting::Equal => 1.0,
        Weighting::AnswerCount => s.n_answers as f64,
    };
    let total: f64 = per_example.iter().map(weight).sum();
    let avg = |f: fn(&Prf) -> f64| {
        per_example
            .iter()
            .map(|s| weight(s) * f(&s.prf))
            .sum::<f64>()
            / total
    };
    Ok(MethodRow {
        method: method.name(),
        precision: avg(|p| p.precision),
        recall: avg(|p| p.recall),
        f1: avg(|p| p.f1),
        n_examples: per_example.len(),
        skipped,
        per_example,
    })
}

/// Mean and population standard deviation of a row metric over seeds,
/// for the random baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSweep {
    pub seeds: Vec<u64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub f1_std: f64,
}

pub fn evaluate_random_seeds(
    gold: &[AnswerGrouping],
    seeds: &[u64],
    opts: &EvalOptions,
) -> Result<SeedSweep, EvalError> {
    if seeds.is_empty() {
        return Err(EvalError::Argument("at least one seed is required".into()));
    }
    let rows: Vec<MethodRow> = seeds
        .iter()
        .map(|&seed| evaluate_clustering(&Method::Random { seed }, gold, opts))
        .collect::<Result<_, _>>()?;
    let n = rows.len() as f64;
    let mean = |f: fn(&MethodRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let f1 = mean(|r| r.f1);
    let var = rows.iter().map(|r| (r.f1 - f1).powi(2)).sum::<f64>() / n;
    Ok(SeedSweep {
        seeds: seeds.to_vec(),
        precision: mean(|r| r.precision),
        recall: mean(|r| r.recall),
        f1,
        f1_std: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AnswerGroup;

    fn gold(id: &str, groups: &[&[(usize, &str)]]) -> AnswerGrouping {
        AnswerGrouping {
            question_id: id.into(),
            image_id: "i".into(),
            image_uri: String::new(),
            original_question: String::new(),
            annotator_id: "gold".into(),
            ambiguous: true,
            groups: groups
                .iter()
                .enumerate()
                .map(|(n, g)| AnswerGroup {
                    rewritten_question: format!("q{n}"),
                    member_indices: g.iter().map(|p| p.0).collect(),
                    answer_texts: g.iter().map(|p| p.1.to_owned()).collect(),
                    labels: BTreeSet::new(),
                })
                .collect(),
            skip_reason: None,
            deleted_indices: BTreeSet::new(),
        }
    }

    fn flowers() -> AnswerGrouping {
        gold(
            "1",
            &[&[(0, "daisy"), (1, "rose")], &[(2, "purple"), (3, "white")]],
        )
    }

    #[test]
    fn random_k_one_is_single_cluster() {
        assert_eq!(
            baseline_random_seeded(&[3, 4, 5], 1, 9).unwrap(),
            vec![BTreeSet::from([3, 4, 5])]
        );
    }

    #[test]
    fn random_k_out_of_range() {
        assert!(baseline_random_seeded(&[1, 2], 3, 0).is_err());
        assert!(baseline_random_seeded(&[1, 2], 0, 0).is_err());
    }

    #[test]
    fn random_is_seeded() {
        let items: Vec<usize> = (0..10).collect();
        assert_eq!(
            baseline_random_seeded(&items, 4, 5).unwrap(),
            baseline_random_seeded(&items, 4, 5).unwrap()
        );
    }

    #[test]
    fn trivial_baselines() {
        assert_eq!(baseline_perfect_precision(&[0, 1, 2]).len(), 3);
        assert_eq!(
            baseline_perfect_recall(&[7]),
            baseline_perfect_precision(&[7])
        );
    }

    #[test]
    fn perfect_baselines_score_100() {
        let g = vec![
            flowers(),
            gold("2", &[&[(0, "a")], &[(1, "b"), (2, "c"), (4, "d")]]),
        ];
        let p =
            evaluate_clustering(&Method::PerfectPrecision, &g, &EvalOptions::default()).unwrap();
        let r = evaluate_clustering(&Method::PerfectRecall, &g, &EvalOptions::default()).unwrap();
        assert_eq!(p.precision, 100.0);
        assert_eq!(r.recall, 100.0);
        assert_eq!(p.n_examples, 2);
    }

    #[test]
    fn unambiguous_gold_is_skipped() {
        let mut u = flowers();
        u.question_id = "u".into();
        u.ambiguous = false;
        u.groups.clear();
        let row = evaluate_clustering(
            &Method::PerfectRecall,
            &[flowers(), u],
            &EvalOptions::default(),
        )
        .unwrap();
        assert_eq!(row.skipped, vec![QuestionId::from("u")]);
        assert_eq!(row.n_examples, 1);
    }

    #[test]
    fn glove_recovers_separated_groups() {
        let table = EmbeddingTable::from_entries(
            2,
            [
                ("daisy", vec![0.0, 1.0]),
                ("rose", vec![0.0, 1.1]),
                ("purple", vec![1.0, 0.0]),
                ("white", vec![1.1, 0.0]),
            ],
        )
        .unwrap();
        let m = Method::GloveInitial {
            table: &table,
            k_max: 4,
            penalty: Some(0.1),
            kmeans: KMeansOptions::seeded(5, 0),
        };
        let row = evaluate_clustering(&m, &[flowers()], &EvalOptions::default()).unwrap();
        assert_eq!(row.f1, 100.0);
    }

    #[test]
    fn representations_blobs_score_100() {
        let q = QuestionId::from("1");
        let reprs = RepresentationFile::new(
            "enc",
            2,
            [
                ((q.clone(), 0), vec![0.0, 0.0]),
                ((q.clone(), 1), vec![0.1, 0.0]),
                ((q.clone(), 2), vec![5.0, 5.0]),
                ((q.clone(), 3), vec![5.1, 5.0]),
            ],
        )
        .unwrap();
        reprs.check_keys(&[flowers()]).unwrap();
        let m = Method::Representations {
            reprs: &reprs,
            kmeans: KMeansOptions::seeded(5, 0),
        };
        let row = evaluate_clustering(&m, &[flowers()], &EvalOptions::default()).unwrap();
        assert_eq!(row.f1, 100.0);
        assert_eq!(row.method, "enc");
    }

    #[test]
    fn missing_vector_names_key() {
        let reprs =
            RepresentationFile::new("enc", 1, [((QuestionId::from("1"), 0), vec![0.0])]).unwrap();
        let m = Method::Representations {
            reprs: &reprs,
            kmeans: KMeansOptions::seeded(1, 0),
        };
        let err = evaluate_clustering(&m, &[flowers()], &EvalOptions::default()).unwrap_err();
        assert!(err.to_string().contains("(1, 1)"), "{err}");
    }

    #[test]
    fn representations_k_too_large() {
        let q = QuestionId::from("x");
        let reprs = RepresentationFile::new("enc", 1, [((q.clone(), 0), vec![0.0])]).unwrap();
        assert!(
            cluster_representations(&reprs, &q, &[0], 2, &KMeansOptions::seeded(1, 0)).is_err()
        );
    }

    #[test]
    fn answer_count_weighting() {
        // Example "2" has one group of 3 answers; perfect-P precision is 100 everywhere,
        // so check recall: ex1 (2 groups of 2) -> 50, ex2 (1 group of 3) -> 1/3.
        let g = vec![flowers(), gold("2", &[&[(0, "a"), (1, "b"), (2, "c")]])];
        let eq =
            evaluate_clustering(&Method::PerfectPrecision, &g, &EvalOptions::default()).unwrap();
        let w = EvalOptions {
            weighting: Weighting::AnswerCount,
            ..Default::default()
        };
        let wt = evaluate_clustering(&Method::PerfectPrecision, &g, &w).unwrap();
        assert!((eq.recall - (50.0 + 100.0 / 3.0) / 2.0).abs() < 1e-9);
        assert!((wt.recall - (4.0 * 50.0 + 3.0 * 100.0 / 3.0) / 7.0).abs() < 1e-9);
    }

    #[test]
    fn tsv_and_binary_manifests() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("v.tsv"), "1\t0\t1 2\n1\t1\t3 4\n").unwrap();
        std::fs::write(
            dir.path().join("m.json"),
            r#"{"source":"enc","dim":2,"count":2,"format":"tsv","data":"v.tsv"}"#,
        )
        .unwrap();
        let r = load_representations(&dir.path().join("m.json")).unwrap();
        assert_eq!(r.get(&"1".into(), 1).unwrap(), &[3.0, 4.0]);

        let bytes: Vec<u8> = [1.0f32, 2.0, 3.0, 4.0]
            .iter()
            .flat_map(|f| f.to_le_bytes())
            .collect();
        std::fs::write(dir.path().join("v.bin"), bytes).unwrap();
        std::fs::write(
            dir.path().join("b.json"),
            r#"{"source":"enc","dim":2,"count":2,"format":"f32le","data":"v.bin","keys":[["1",0],["1",1]]}"#,
        )
        .unwrap();
        let b = load_representations(&dir.path().join("b.json")).unwrap();
        assert_eq!(b, r);

        std::fs::write(
            dir.path().join("bad.json"),
            r#"{"source":"enc","dim":3,"count":2,"format":"tsv","data":"v.tsv"}"#,
        )
        .unwrap();
        assert!(load_representations(&dir.path().join("bad.json")).is_err());
    }
}
