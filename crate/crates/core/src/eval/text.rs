//! String-overlap metrics for generated questions: BLEU, ROUGE-L, CIDEr-D.
//!
//! All three take pre-tokenized input; [`tokenize`] is the tokenizer the
//! workbench applies to every system under comparison.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Lowercases, splits punctuation off into its own tokens and splits on
/// whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut spaced = String::with_capacity(text.len() + 8);
    for c in text.to_lowercase().chars() {
        if c.is_ascii_punctuation() {
            spaced.push(' ');
            spaced.push(c);
            spaced.push(' ');
        } else {
            spaced.push(c);
        }
    }
    spaced.split_whitespace().map(str::to_owned).collect()
}

fn ngram_counts<T: AsRef<str>>(tokens: &[T], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts
                .entry(w.iter().map(AsRef::as_ref).collect())
                .or_insert(0) += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    #[default]
    None,
    /// Add one to numerator and denominator of the precisions for n > 1.
    AddOne,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BleuScore {
    pub score: f64,
    pub precisions: Vec<f64>,
    pub brevity_penalty: f64,
    pub candidate_len: usize,
    pub reference_len: usize,
    /// Set when the candidate had no tokens; the score is then 0.
    pub empty_candidate: bool,
}

/// Clipped n-gram matches and candidate n-gram totals for n = 1..=max_n,
/// plus the closest reference length (ties go to the shorter one).
fn bleu_stats<T: AsRef<str>>(
    candidate: &[T],
    references: &[Vec<T>],
    max_n: usize,
) -> (Vec<usize>, Vec<usize>, usize) {
    let mut matches = vec![0; max_n];
    let mut totals = vec![0; max_n];
    for n in 1..=max_n {
        let cand = ngram_counts(candidate, n);
        let mut max_ref: HashMap<Vec<&str>, usize> = HashMap::new();
        for r in references {
            for (g, c) in ngram_counts(r, n) {
                let e = max_ref.entry(g).or_insert(0);
                *e = (*e).max(c);
            }
        }
        matches[n - 1] = cand
            .iter()
            .map(|(g, &c)| c.min(max_ref.get(g).copied().unwrap_or(0)))
            .sum();
        totals[n - 1] = candidate.len().saturating_sub(n - 1);
    }
    let c = candidate.len();
    let ref_len = references
        .iter()
        .map(Vec::len)
        .min_by_key(|&r| (r.abs_diff(c), r))
        .unwrap_or(0);
    (matches, totals, ref_len)
}

fn combine(
    matches: &[usize],
    totals: &[usize],
    cand_len: usize,
    ref_len: usize,
    smoothing: Smoothing,
) -> BleuScore {
    let precisions: Vec<f64> = matches
        .iter()
        .zip(totals)
        .enumerate()
        .map(|(i, (&m, &t))| match smoothing {
            Smoothing::AddOne if i > 0 => (m as f64 + 1.0) / (t as f64 + 1.0),
            _ if t == 0 => 0.0,
            _ => m as f64 / t as f64,
        })
        .collect();
    let brevity_penalty = if cand_len == 0 {
        0.0
    } else if cand_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    let score = if cand_len == 0 || precisions.iter().any(|&p| p == 0.0) {
        0.0
    } else {
        let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / precisions.len() as f64;
        brevity_penalty * log_mean.exp()
    };
    BleuScore {
        score,
        precisions,
        brevity_penalty,
        candidate_len: cand_len,
        reference_len: ref_len,
        empty_candidate: cand_len == 0,
    }
}

/// Sentence BLEU: geometric mean of clipped n-gram precisions times the
/// brevity penalty. Without smoothing any zero precision gives 0.
pub fn bleu<T: AsRef<str>>(
    candidate: &[T],
    references: &[Vec<T>],
    max_n: usize,
    smoothing: Smoothing,
) -> Result<BleuScore, EvalError> {
    if max_n == 0 {
        return Err(EvalError::Argument("BLEU order must be at least 1".into()));
    }
    let (m, t, r) = bleu_stats(candidate, references, max_n);
    Ok(combine(&m, &t, candidate.len(), r, smoothing))
}

/// Corpus BLEU: n-gram statistics and lengths are summed over all items
/// before combining.
pub fn corpus_bleu<T: AsRef<str>>(
    candidates: &[Vec<T>],
    references: &[Vec<Vec<T>>],
    max_n: usize,
    smoothing: Smoothing,
) -> Result<BleuScore, EvalError> {
    if max_n == 0 {
        return Err(EvalError::Argument("BLEU order must be at least 1".into()));
    }
    if candidates.len() != references.len() {
        return Err(EvalError::Argument(format!(
            "{} candidates but {} reference sets",
            candidates.len(),
            references.len()
        )));
    }
    let mut matches = vec![0; max_n];
    let mut totals = vec![0; max_n];
    let (mut c_len, mut r_len) = (0, 0);
    for (c, refs) in candidates.iter().zip(references) {
        let (m, t, r) = bleu_stats(c, refs, max_n);
        for n in 0..max_n {
            matches[n] += m[n];
            totals[n] += t[n];
        }
        c_len += c.len();
        r_len += r;
    }
    Ok(combine(&matches, &totals, c_len, r_len, smoothing))
}

/// ROUGE-L precision, recall and F-measure (β = 1), in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeL {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> RougeL {
    if candidate.is_empty() || reference.is_empty() {
        return RougeL {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        };
    }
    let a: Vec<&str> = candidate.iter().map(AsRef::as_ref).collect();
    let b: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
    let lcs = lcs_len(&a, &b) as f64;
    let precision = lcs / a.len() as f64;
    let recall = lcs / b.len() as f64;
    let f1 = if lcs == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    RougeL {
        precision,
        recall,
        f1,
    }
}

pub const CIDER_MAX_N: usize = 4;
pub const CIDER_SIGMA: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiderScores {
    pub per_item: Vec<f64>,
    pub mean: f64,
    /// Set when the corpus has a single item, so every IDF weight is zero.
    pub degenerate_idf: bool,
}

type Counts<'a> = HashMap<Vec<&'a str>, usize>;

fn cook<'a, T: AsRef<str>>(tokens: &'a [T]) -> Counts<'a> {
    let mut all = HashMap::new();
    for n in 1..=CIDER_MAX_N {
        all.extend(ngram_counts(tokens, n));
    }
    all
}

struct TfIdf<'a> {
    vec: [HashMap<Vec<&'a str>, f64>; CIDER_MAX_N],
    norm: [f64; CIDER_MAX_N],
    /// Number of bigrams, which the reference CIDEr-D code uses as the
    /// sentence length in the Gaussian penalty.
    length: f64,
}

fn to_tfidf<'a>(counts: &Counts<'a>, df: &HashMap<Vec<&'a str>, f64>, log_n: f64) -> TfIdf<'a> {
    let mut vec: [HashMap<Vec<&str>, f64>; CIDER_MAX_N] = Default::default();
    let mut norm = [0.0; CIDER_MAX_N];
    let mut length = 0.0;
    for (g, &tf) in counts {
        let n = g.len() - 1;
        let d = df.get(g).copied().unwrap_or(0.0).max(1.0).ln();
        let w = tf as f64 * (log_n - d);
        norm[n] += w * w;
        vec[n].insert(g.clone(), w);
        if n == 1 {
            length += tf as f64;
        }
    }
    for x in norm.iter_mut() {
        *x = x.sqrt();
    }
    TfIdf { vec, norm, length }
}

fn cider_sim(hyp: &TfIdf<'_>, r: &TfIdf<'_>) -> [f64; CIDER_MAX_N] {
    let delta = hyp.length - r.length;
    let penalty = (-(delta * delta) / (2.0 * CIDER_SIGMA * CIDER_SIGMA)).exp();
    let mut val = [0.0; CIDER_MAX_N];
    for n in 0..CIDER_MAX_N {
        for (g, &wh) in &hyp.vec[n] {
            if let Some(&wr) = r.vec[n].get(g) {
                val[n] += wh.min(wr) * wr;
            }
        }
        if hyp.norm[n] != 0.0 && r.norm[n] != 0.0 {
            val[n] /= hyp.norm[n] * r.norm[n];
        }
        val[n] *= penalty;
    }
    val
}

/// CIDEr-D over a corpus: TF-IDF n-gram vectors (n = 1..4) with document
/// frequencies taken from the reference sets, clipped cosine similarity,
/// a Gaussian length penalty (σ = 6) and ×10 scaling.
pub fn cider<T: AsRef<str>>(
    candidates: &[Vec<T>],
    references: &[Vec<Vec<T>>],
) -> Result<CiderScores, EvalError> {
    if candidates.len() != references.len() {
        return Err(EvalError::Argument(format!(
            "{} candidates but {} reference sets",
            candidates.len(),
            references.len()
        )));
    }
    if candidates.is_empty() {
        return Err(EvalError::Argument("CIDEr needs a non-empty corpus".into()));
    }
    if let Some(i) = references.iter().position(Vec::is_empty) {
        return Err(EvalError::Argument(format!("item {i} has no references")));
    }
    let ref_counts: Vec<Vec<Counts<'_>>> = references
        .iter()
        .map(|refs| refs.iter().map(|r| cook(r)).collect())
        .collect();
    let mut df: HashMap<Vec<&str>, f64> = HashMap::new();
    for refs in &ref_counts {
        let grams: HashSet<&Vec<&str>> = refs.iter().flat_map(|c| c.keys()).collect();
        for g in grams {
            *df.entry(g.clone()).or_insert(0.0) += 1.0;
        }
    }
    let log_n = (candidates.len() as f64).ln();

    let per_item: Vec<f64> = candidates
        .iter()
        .zip(&ref_counts)
        .map(|(cand, refs)| {
            let hyp = to_tfidf(&cook(cand), &df, log_n);
            let mut total = [0.0; CIDER_MAX_N];
            for r in refs {
                let sim = cider_sim(&hyp, &to_tfidf(r, &df, log_n));
                for n in 0..CIDER_MAX_N {
                    total[n] += sim[n];
                }
            }
            let mean_over_n = total.iter().sum::<f64>() / CIDER_MAX_N as f64;
            mean_over_n / refs.len() as f64 * 10.0
        })
        .collect();
    let mean = per_item.iter().sum::<f64>() / per_item.len() as f64;
    Ok(CiderScores {
        per_item,
        mean,
        degenerate_idf: candidates.len() == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn tokenizer_splits_punctuation() {
        assert_eq!(
            t("Where are the People sitting?"),
            ["where", "are", "the", "people", "sitting", "?"]
        );
    }

    #[test]
    fn bleu_identity() {
        let c = t("what kind of flowers are these");
        assert!((bleu(&c, &[c.clone()], 4, Smoothing::None).unwrap().score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bleu_brevity_penalty_fixture() {
        let s = bleu(
            &t("the cat sat"),
            &[t("the cat sat down")],
            2,
            Smoothing::None,
        )
        .unwrap();
        assert_eq!(s.precisions, vec![1.0, 1.0]);
        assert!((s.score - (-1.0f64 / 3.0).exp()).abs() < 1e-12);
        assert!((s.score - 0.7165).abs() < 1e-4);
    }

    #[test]
    fn bleu_no_overlap() {
        assert_eq!(
            bleu(&t("a b c d"), &[t("w x y z")], 4, Smoothing::None)
                .unwrap()
                .score,
            0.0
        );
    }

    #[test]
    fn bleu_empty_candidate_flags() {
        let s = bleu::<String>(&[], &[t("x")], 4, Smoothing::None).unwrap();
        assert!(s.empty_candidate);
        assert_eq!(s.score, 0.0);
    }

    #[test]
    fn bleu_clips_repeated_tokens() {
        let s = bleu(&t("the the the"), &[t("the cat")], 1, Smoothing::None).unwrap();
        assert!((s.precisions[0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bleu_add_one_rescues_zero_higher_order() {
        let s = bleu(&t("the cat"), &[t("the dog")], 2, Smoothing::AddOne).unwrap();
        // p1 = 1/2, p2 = (0+1)/(1+1); equal lengths so BP = 1
        assert!((s.score - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bleu_zero_order_is_an_error() {
        assert!(bleu(&t("a"), &[t("a")], 0, Smoothing::None).is_err());
    }

    #[test]
    fn corpus_bleu_sums_statistics() {
        let c = vec![t("the cat sat"), t("a dog ran")];
        let r = vec![vec![t("the cat sat down")], vec![t("a dog ran")]];
        let s = corpus_bleu(&c, &r, 2, Smoothing::None).unwrap();
        assert_eq!(s.candidate_len, 6);
        assert_eq!(s.reference_len, 7);
        assert!((s.score - (1.0f64 - 7.0 / 6.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn rouge_fixture() {
        let r = rouge_l(&t("the cat"), &t("the black cat"));
        assert_eq!(r.precision, 1.0);
        assert!((r.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.f1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn rouge_identity_and_disjoint() {
        let x = t("where is the fan");
        assert_eq!(
            rouge_l(&x, &x),
            RougeL {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
        assert_eq!(rouge_l(&x, &t("blue sky")).f1, 0.0);
        assert_eq!(rouge_l::<String>(&[], &x).f1, 0.0);
    }

    #[test]
    fn cider_self_reference_is_maximal() {
        let c = vec![
            t("what kind of flowers are these"),
            t("where is the fan located now"),
        ];
        let r = vec![vec![c[0].clone()], vec![c[1].clone()]];
        let s = cider(&c, &r).unwrap();
        assert!((s.per_item[0] - 10.0).abs() < 1e-9, "{:?}", s.per_item);
        assert!((s.per_item[1] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn cider_no_overlap_is_zero() {
        let c = vec![t("a b c d"), t("e f g h")];
        let r = vec![vec![t("w x y z")], vec![t("e f g h")]];
        assert_eq!(cider(&c, &r).unwrap().per_item[0], 0.0);
    }

    #[test]
    fn cider_single_item_is_degenerate() {
        let c = vec![t("a b c d")];
        let s = cider(&c, &[vec![t("a b c d")]]).unwrap();
        assert!(s.degenerate_idf);
        assert_eq!(s.mean, 0.0);
    }
}
