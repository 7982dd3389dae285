//! Inter-annotator agreement: binary ambiguity agreement and cluster F1
//! under a maximum-overlap alignment of clusters.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatorId, AnswerGrouping, QuestionId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgreementError {
    #[error("weight matrix is empty")]
    EmptyMatrix,
    #[error("row {row} has {found} columns, expected {expected}")]
    RaggedMatrix {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{0} partition is empty")]
    EmptyPartition(&'static str),
    #[error("{side} partition has an empty cluster at position {index}")]
    EmptyCluster { side: &'static str, index: usize },
    #[error("the two annotators share no examples")]
    NoSharedItems,
    #[error("need at least two annotators, got {0}")]
    TooFewAnnotators(usize),
    #[error("no annotator pair produced a comparable value")]
    NoComparablePairs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub total_overlap: u64,
}

/// Maximum-weight bipartite matching (Hungarian algorithm, O(n³)).
///
/// Rectangular input is padded to square with zero-weight dummies, which
/// are dropped from the result, so `pairs.len() == min(rows, cols)`.
pub fn hungarian_max(weights: &[Vec<u64>]) -> Result<Matching, AgreementError> {
    let rows = weights.len();
    if rows == 0 || weights[0].is_empty() {
        return Err(AgreementError::EmptyMatrix);
    }
    let cols = weights[0].len();
    if let Some((row, r)) = weights.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(AgreementError::RaggedMatrix {
            row,
            expected: cols,
            found: r.len(),
        });
    }
    let n = rows.max(cols);
    let weight = |i: usize, j: usize| -> i64 {
        if i < rows && j < cols {
            weights[i][j] as i64
        } else {
            0
        }
    };

    // Minimize the negated weights with row/column potentials; 1-based with
    // column 0 as the virtual source.
    const INF: i64 = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = -weight(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=n)
        .filter(|&j| p[j] != 0 && p[j] - 1 < rows && j - 1 < cols)
        .map(|j| (p[j] - 1, j - 1))
        .collect();
    pairs.sort_unstable();
    let total_overlap = pairs.iter().map(|&(i, j)| weights[i][j]).sum();
    Ok(Matching {
        pairs,
        total_overlap,
    })
}

/// Precision, recall and F1 as percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
        }
    }

    pub fn rounded(self) -> Self {
        Self {
            precision: round1(self.precision),
            recall: round1(self.recall),
            f1: round1(self.f1),
        }
    }
}

/// Rounds to one decimal place, the reporting precision of the tables.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum F1Aggregation {
    /// Mean of per-pair P, R and F1 over aligned cluster pairs only.
    #[default]
    MacroAligned,
    /// Pooled overlap over all clusters: `Σ|∩| / Σ|pred|`, `Σ|∩| / Σ|gold|`.
    Micro,
}

fn check_partition<T>(p: &[BTreeSet<T>], side: &'static str) -> Result<(), AgreementError> {
    if p.is_empty() {
        return Err(AgreementError::EmptyPartition(side));
    }
    if let Some(index) = p.iter().position(BTreeSet::is_empty) {
        return Err(AgreementError::EmptyCluster { side, index });
    }
    Ok(())
}

/// Resolution of the secondary F1 term in [`tie_broken_weights`].
const F1_SCALE: f64 = 1e12;

/// Several matchings can reach the maximum total overlap, and the macro
/// scores differ between them. Weights `overlap · B + round(F1 · 10¹²)`,
/// with `B` above any possible F1 sum, keep maximum overlap primary and
/// pick the tied matching with the largest summed pair F1. That choice
/// depends only on cluster contents, so the score does not depend on
/// cluster order or on which side is called "gold".
fn tie_broken_weights<T: Ord>(
    pred: &[BTreeSet<T>],
    gold: &[BTreeSet<T>],
    overlap: &[Vec<u64>],
) -> Vec<Vec<u64>> {
    let pairs = pred.len().min(gold.len()) as u64;
    let base = (pairs + 1) * F1_SCALE as u64;
    overlap
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &o)| {
                    let f1 = 2.0 * o as f64 / (pred[i].len() + gold[j].len()) as f64;
                    o.saturating_mul(base)
                        .saturating_add((f1 * F1_SCALE).round() as u64)
                })
                .collect()
        })
        .collect()
}

/// Cluster F1 between two partitions after Hungarian alignment.
pub fn cluster_f1<T: Ord>(
    pred: &[BTreeSet<T>],
    gold: &[BTreeSet<T>],
) -> Result<Prf, AgreementError> {
    cluster_f1_with(pred, gold, F1Aggregation::MacroAligned)
}

pub fn cluster_f1_with<T: Ord>(
    pred: &[BTreeSet<T>],
    gold: &[BTreeSet<T>],
    aggregation: F1Aggregation,
) -> Result<Prf, AgreementError> {
    check_partition(pred, "predicted")?;
    check_partition(gold, "gold")?;
    let overlap: Vec<Vec<u64>> = pred
        .iter()
        .map(|p| {
            gold.iter()
                .map(|g| p.intersection(g).count() as u64)
                .collect()
        })
        .collect();
    let matching = hungarian_max(&tie_broken_weights(pred, gold, &overlap))?;

    match aggregation {
        F1Aggregation::MacroAligned => {
            let prfs: Vec<Prf> = matching
                .pairs
                .iter()
                .map(|&(i, j)| {
                    let inter = overlap[i][j] as f64;
                    Prf::from_pr(inter / pred[i].len() as f64, inter / gold[j].len() as f64)
                })
                .collect();
            // Summed in sorted order so the result is independent of cluster order.
            let mean = |f: fn(&Prf) -> f64| {
                let mut v: Vec<f64> = prfs.iter().map(f).collect();
                v.sort_by(f64::total_cmp);
                100.0 * v.iter().sum::<f64>() / v.len() as f64
            };
            Ok(Prf {
                precision: mean(|p| p.precision),
                recall: mean(|p| p.recall),
                f1: mean(|p| p.f1),
            })
        }
        F1Aggregation::Micro => {
            let inter = matching
                .pairs
                .iter()
                .map(|&(i, j)| overlap[i][j])
                .sum::<u64>() as f64;
            let pred_total: usize = pred.iter().map(BTreeSet::len).sum();
            let gold_total: usize = gold.iter().map(BTreeSet::len).sum();
            Ok(Prf::from_pr(
                100.0 * inter / pred_total as f64,
                100.0 * inter / gold_total as f64,
            ))
        }
    }
}

/// Percentage of shared examples that both annotators marked ambiguous.
pub fn ambiguity_agreement<K: Ord>(
    a: &BTreeMap<K, bool>,
    b: &BTreeMap<K, bool>,
) -> Result<f64, AgreementError> {
    let mut shared = 0usize;
    let mut both = 0usize;
    for (k, &va) in a {
        if let Some(&vb) = b.get(k) {
            shared += 1;
            if va && vb {
                both += 1;
            }
        }
    }
    if shared == 0 {
        return Err(AgreementError::NoSharedItems);
    }
    Ok(100.0 * both as f64 / shared as f64)
}

/// Percentage of shared examples on which the two annotators made the same
/// call, counting agreement on "not ambiguous" too.
pub fn observed_agreement<K: Ord>(
    a: &BTreeMap<K, bool>,
    b: &BTreeMap<K, bool>,
) -> Result<f64, AgreementError> {
    let mut shared = 0usize;
    let mut same = 0usize;
    for (k, &va) in a {
        if let Some(&vb) = b.get(k) {
            shared += 1;
            same += usize::from(va == vb);
        }
    }
    if shared == 0 {
        return Err(AgreementError::NoSharedItems);
    }
    Ok(100.0 * same as f64 / shared as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub a: usize,
    pub b: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseSummary {
    pub mean: f64,
    /// Population standard deviation over pairs.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub pairs: Vec<PairValue>,
}

/// Evaluates `metric` on every unordered annotator pair and summarizes.
/// Pairs for which `metric` returns `None` (no overlap) are left out.
pub fn pairwise_summary<A, F>(
    annotators: &[A],
    metric: F,
) -> Result<PairwiseSummary, AgreementError>
where
    F: Fn(&A, &A) -> Option<f64>,
{
    if annotators.len() < 2 {
        return Err(AgreementError::TooFewAnnotators(annotators.len()));
    }
    let mut pairs = Vec::new();
    for a in 0..annotators.len() {
        for b in a + 1..annotators.len() {
            if let Some(value) = metric(&annotators[a], &annotators[b]) {
                pairs.push(PairValue { a, b, value });
            }
        }
    }
    summarize(pairs)
}

pub fn summarize(pairs: Vec<PairValue>) -> Result<PairwiseSummary, AgreementError> {
    if pairs.is_empty() {
        return Err(AgreementError::NoComparablePairs);
    }
    let n = pairs.len() as f64;
    let mean = pairs.iter().map(|p| p.value).sum::<f64>() / n;
    let var = pairs.iter().map(|p| (p.value - mean).powi(2)).sum::<f64>() / n;
    let min = pairs.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    let max = pairs
        .iter()
        .map(|p| p.value)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(PairwiseSummary {
        mean,
        std: var.sqrt(),
        min,
        max,
        pairs,
    })
}

/// Agreement over a pool of annotators' groupings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub annotators: Vec<AnnotatorId>,
    /// Both-ambiguous share of jointly annotated examples, per pair.
    pub ambiguity: PairwiseSummary,
    /// Same-decision share of jointly annotated examples, per pair.
    pub observed: PairwiseSummary,
    /// Cluster P/R/F1 per pair, averaged over examples both marked ambiguous.
    /// `None` when no pair shares such an example.
    pub cluster_precision: Option<PairwiseSummary>,
    pub cluster_recall: Option<PairwiseSummary>,
    pub cluster_f1: Option<PairwiseSummary>,
}

/// Pairwise agreement across all annotators in `groupings`. When an
/// annotator has several groupings for one question, the last one wins.
pub fn agreement_report(groupings: &[AnswerGrouping]) -> Result<AgreementReport, AgreementError> {
    let mut by_annotator: BTreeMap<&AnnotatorId, BTreeMap<&QuestionId, &AnswerGrouping>> =
        BTreeMap::new();
    for g in groupings {
        by_annotator
            .entry(&g.annotator_id)
            .or_default()
            .insert(&g.question_id, g);
    }
    let pool: Vec<&BTreeMap<&QuestionId, &AnswerGrouping>> = by_annotator.values().collect();
    let flags = |m: &BTreeMap<&QuestionId, &AnswerGrouping>| -> BTreeMap<QuestionId, bool> {
        m.iter().map(|(q, g)| ((*q).clone(), g.ambiguous)).collect()
    };
    let ambiguity = pairwise_summary(&pool, |a, b| ambiguity_agreement(&flags(a), &flags(b)).ok())?;
    let observed = pairwise_summary(&pool, |a, b| observed_agreement(&flags(a), &flags(b)).ok())?;

    let pair_prf = |a: &BTreeMap<&QuestionId, &AnswerGrouping>,
                    b: &BTreeMap<&QuestionId, &AnswerGrouping>| {
        let scores: Vec<Prf> = a
            .iter()
            .filter_map(|(q, ga)| {
                let gb = b.get(q)?;
                if !(ga.ambiguous && gb.ambiguous) {
                    return None;
                }
                cluster_f1(&ga.partition(), &gb.partition()).ok()
            })
            .collect();
        (!scores.is_empty()).then(|| {
            let n = scores.len() as f64;
            Prf {
                precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
                recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
                f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
            }
        })
    };
    let cluster =
        |f: fn(&Prf) -> f64| pairwise_summary(&pool, |a, b| pair_prf(a, b).map(|p| f(&p))).ok();
    Ok(AgreementReport {
        annotators: by_annotator.keys().map(|a| (*a).clone()).collect(),
        ambiguity,
        observed,
        cluster_precision: cluster(|p| p.precision),
        cluster_recall: cluster(|p| p.recall),
        cluster_f1: cluster(|p| p.f1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(groups: &[&[char]]) -> Vec<BTreeSet<char>> {
        groups.iter().map(|g| g.iter().copied().collect()).collect()
    }

    #[test]
    fn two_by_two_prefers_diagonal() {
        let m = hungarian_max(&[vec![4, 1], vec![2, 3]]).unwrap();
        assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(m.total_overlap, 7);
    }

    #[test]
    fn diagonal_dominant() {
        let m = hungarian_max(&[vec![5, 0, 0], vec![0, 5, 0], vec![0, 0, 5]]).unwrap();
        assert_eq!(m.pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(m.total_overlap, 15);
    }

    #[test]
    fn single_row_is_argmax() {
        let m = hungarian_max(&[vec![2, 9, 4]]).unwrap();
        assert_eq!(m.pairs, vec![(0, 1)]);
        assert_eq!(m.total_overlap, 9);
    }

    #[test]
    fn tall_matrix() {
        let m = hungarian_max(&[vec![1], vec![7], vec![3]]).unwrap();
        assert_eq!(m.pairs, vec![(1, 0)]);
    }

    #[test]
    fn ragged_and_empty() {
        assert_eq!(hungarian_max(&[]), Err(AgreementError::EmptyMatrix));
        assert!(matches!(
            hungarian_max(&[vec![1, 2], vec![3]]),
            Err(AgreementError::RaggedMatrix { row: 1, .. })
        ));
    }

    #[test]
    fn identical_partitions_score_100() {
        let p = sets(&[&['a', 'b'], &['c']]);
        let prf = cluster_f1(&p, &p).unwrap();
        assert_eq!((prf.precision, prf.recall, prf.f1), (100.0, 100.0, 100.0));
    }

    #[test]
    fn crossed_partitions() {
        let gold = sets(&[&['a', 'b'], &['c']]);
        let pred = sets(&[&['a'], &['b', 'c']]);
        let prf = cluster_f1(&pred, &gold).unwrap();
        assert!((prf.precision - 75.0).abs() < 1e-9);
        assert!((prf.recall - 75.0).abs() < 1e-9);
        assert!((prf.f1 - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(prf.rounded().f1, 66.7);
    }

    #[test]
    fn singletons_have_perfect_precision() {
        let gold = sets(&[&['a', 'b', 'c'], &['d']]);
        let pred = sets(&[&['a'], &['b'], &['c'], &['d']]);
        assert_eq!(cluster_f1(&pred, &gold).unwrap().precision, 100.0);
    }

    #[test]
    fn micro_aggregation() {
        let gold = sets(&[&['a', 'b'], &['c']]);
        let pred = sets(&[&['a'], &['b', 'c']]);
        let prf = cluster_f1_with(&pred, &gold, F1Aggregation::Micro).unwrap();
        // aligned overlap 2 of 3 items on each side
        assert!((prf.precision - 200.0 / 3.0).abs() < 1e-9);
        assert!((prf.recall - 200.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn empty_partition_errors() {
        let p: Vec<BTreeSet<char>> = vec![];
        assert_eq!(
            cluster_f1(&p, &sets(&[&['a']])),
            Err(AgreementError::EmptyPartition("predicted"))
        );
        let with_empty = vec![BTreeSet::new()];
        assert!(matches!(
            cluster_f1(&sets(&[&['a']]), &with_empty),
            Err(AgreementError::EmptyCluster { .. })
        ));
    }

    fn marks(ids: &[u32], n: u32) -> BTreeMap<u32, bool> {
        (1..=n).map(|i| (i, ids.contains(&i))).collect()
    }

    #[test]
    fn ambiguity_agreement_examples() {
        assert_eq!(
            ambiguity_agreement(&marks(&[1, 2, 3, 4], 4), &marks(&[1, 2, 3, 4], 4)).unwrap(),
            100.0
        );
        assert_eq!(
            ambiguity_agreement(&marks(&[1, 2, 3], 4), &marks(&[2, 3, 4], 4)).unwrap(),
            50.0
        );
        assert_eq!(
            ambiguity_agreement(&marks(&[1, 2], 4), &marks(&[3, 4], 4)).unwrap(),
            0.0
        );
        assert_eq!(
            observed_agreement(&marks(&[1, 2], 4), &marks(&[3, 4], 4)).unwrap(),
            0.0
        );
        assert_eq!(
            observed_agreement(&marks(&[1], 4), &marks(&[2], 4)).unwrap(),
            50.0
        );
    }

    #[test]
    fn ambiguity_agreement_needs_overlap() {
        let a: BTreeMap<u32, bool> = [(1, true)].into();
        let b: BTreeMap<u32, bool> = [(2, true)].into();
        assert_eq!(
            ambiguity_agreement(&a, &b),
            Err(AgreementError::NoSharedItems)
        );
    }

    #[test]
    fn summary_of_two() {
        let s = pairwise_summary(&[1.0, 2.0], |_, _| Some(64.0)).unwrap();
        assert_eq!((s.mean, s.std), (64.0, 0.0));
    }

    #[test]
    fn summary_of_three() {
        let values = [[0.0, 60.0, 70.0], [60.0, 0.0, 80.0], [70.0, 80.0, 0.0]];
        let s = pairwise_summary(&[0usize, 1, 2], |&a, &b| Some(values[a][b])).unwrap();
        assert!((s.mean - 70.0).abs() < 1e-12);
        assert!((s.std - (200.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((s.std - 8.165).abs() < 1e-3);
        assert_eq!((s.min, s.max), (60.0, 80.0));
    }

    #[test]
    fn summary_needs_two() {
        assert_eq!(
            pairwise_summary(&[1], |_, _| Some(1.0)),
            Err(AgreementError::TooFewAnnotators(1))
        );
    }
}
