//! k-means with penalized model selection, and the prioritization queue
//! built on top of it.

mod kmeans;
mod prioritize;

use serde::{Deserialize, Serialize};

pub use kmeans::{
    kmeans, kmeans_with, lloyd, InitStrategy, KMeansOptions, LloydRun, Restarts, DEFAULT_MAX_ITER,
    MAX_EXHAUSTIVE_POINTS,
};
pub use prioritize::{
    prioritize, PrioritizeConfig, PrioritizeReport, PriorityItem, PriorityQueue, SortPolicy,
};

use crate::corpus::{normalize_for_match, VqaExample};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusterError {
    #[error("no points to cluster")]
    NoPoints,
    #[error("k = {k} is invalid for {n} point(s)")]
    BadK { k: usize, n: usize },
    #[error("point {index} has dimension {found}, expected {expected}")]
    Ragged {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("points contain non-finite coordinates")]
    NonFinite,
    #[error("exhaustive restarts need at most {max} points, got {n}")]
    TooManyForExhaustive { n: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances of points to their assigned centroid.
    pub inertia: f64,
    /// `inertia + penalty * k`; equals `inertia` for a bare k-means run.
    pub score: f64,
    pub balance: f64,
}

impl ClusterResult {
    pub fn sizes(&self) -> Vec<usize> {
        cluster_sizes(&self.assignments, self.k)
    }

    /// Member indices per cluster, empty clusters omitted.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k];
        for (i, &a) in self.assignments.iter().enumerate() {
            groups[a].push(i);
        }
        groups.retain(|g| !g.is_empty());
        groups
    }
}

fn cluster_sizes(assignments: &[usize], k: usize) -> Vec<usize> {
    let mut sizes = vec![0; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    sizes
}

/// Normalized entropy of the cluster sizes, `H(sizes / n) / ln k`.
/// Defined as 1 for a single cluster.
pub fn balance_score(result: &ClusterResult) -> f64 {
    balance_from_assignments(&result.assignments, result.k)
}

pub(crate) fn balance_from_assignments(assignments: &[usize], k: usize) -> f64 {
    balance_from_sizes(&cluster_sizes(assignments, k))
}

pub fn balance_from_sizes(sizes: &[usize]) -> f64 {
    let k = sizes.len();
    let n: usize = sizes.iter().sum();
    if k <= 1 || n == 0 {
        return 1.0;
    }
    let h: f64 = sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n as f64;
            -p * p.ln()
        })
        .sum();
    h / (k as f64).ln()
}

/// A quarter of the mean squared distance to the global centroid.
pub fn default_penalty(points: &[Vec<f64>]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let dim = points[0].len();
    let n = points.len() as f64;
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x / n;
        }
    }
    points
        .iter()
        .map(|p| kmeans::sq_dist(p, &mean))
        .sum::<f64>()
        / n
        / 4.0
}

/// Runs k-means for `k = 1..=k_max` and keeps the lowest
/// `inertia + penalty * k`, preferring the smaller `k` on ties.
pub fn select_k(
    points: &[Vec<f64>],
    k_max: usize,
    penalty: f64,
    opts: &KMeansOptions,
) -> Result<ClusterResult, ClusterError> {
    if points.is_empty() {
        return Err(ClusterError::NoPoints);
    }
    if k_max == 0 || k_max > points.len() {
        return Err(ClusterError::BadK {
            k: k_max,
            n: points.len(),
        });
    }
    let mut best: Option<ClusterResult> = None;
    for k in 1..=k_max {
        let mut r = kmeans_with(points, k, opts)?;
        r.score = r.inertia + penalty * k as f64;
        if best.as_ref().map_or(true, |b| r.score < b.score) {
            best = Some(r);
        }
    }
    Ok(best.expect("k_max >= 1"))
}

/// True when every answer, after punctuation stripping and normalization,
/// is `yes` or `no`.
pub fn is_yes_no_only(example: &VqaExample) -> bool {
    !example.answers.is_empty()
        && example.answers.iter().all(|a| {
            let n = normalize_for_match(&a.text);
            n == "yes" || n == "no"
        })
}
