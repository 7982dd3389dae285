use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{balance_from_assignments, ClusterError, ClusterResult};

pub const DEFAULT_MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// `k` distinct points chosen uniformly at random.
    RandomDistinct,
    /// k-means++ seeding (D² weighting).
    PlusPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Restarts {
    /// This many seeded initializations.
    Seeded(usize),
    /// Start from the centroids of every partition into `k` clusters.
    /// Reaches the global optimum; limited to tiny inputs.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansOptions {
    pub restarts: Restarts,
    pub seed: u64,
    pub max_iter: usize,
    pub init: InitStrategy,
}

impl KMeansOptions {
    pub fn seeded(restarts: usize, seed: u64) -> Self {
        Self {
            restarts: Restarts::Seeded(restarts),
            seed,
            max_iter: DEFAULT_MAX_ITER,
            init: InitStrategy::RandomDistinct,
        }
    }

    pub fn exhaustive() -> Self {
        Self {
            restarts: Restarts::Exhaustive,
            seed: 0,
            max_iter: DEFAULT_MAX_ITER,
            init: InitStrategy::RandomDistinct,
        }
    }
}

/// Outcome of one Lloyd run from fixed initial centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Inertia after each centroid update.
    pub trace: Vec<f64>,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign_all(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    points.iter().map(|p| nearest(p, centroids).0).collect()
}

fn mean_of(
    points: &[Vec<f64>],
    assignments: &[usize],
    cluster: usize,
    dim: usize,
) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for (p, _) in points
        .iter()
        .zip(assignments)
        .filter(|(_, &a)| a == cluster)
    {
        n += 1;
        for (s, x) in sum.iter_mut().zip(p) {
            *s += x;
        }
    }
    (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
}

pub(crate) fn inertia_of(
    points: &[Vec<f64>],
    assignments: &[usize],
    centroids: &[Vec<f64>],
) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

fn recompute(points: &[Vec<f64>], assignments: &[usize], centroids: &mut [Vec<f64>]) {
    let dim = points[0].len();
    for (j, c) in centroids.iter_mut().enumerate() {
        if let Some(m) = mean_of(points, assignments, j, dim) {
            *c = m;
        }
    }
}

/// Gives each empty cluster the point farthest from its own centroid,
/// taken from a cluster that keeps at least one member.
fn repair_empty(points: &[Vec<f64>], assignments: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let dim = points[0].len();
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignments.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let donor_point = (0..points.len())
            .filter(|&i| sizes[assignments[i]] > 1)
            .map(|i| (i, sq_dist(&points[i], &centroids[assignments[i]])))
            .fold(None::<(usize, f64)>, |best, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            });
        let Some((i, _)) = donor_point else { return };
        let donor = assignments[i];
        assignments[i] = empty;
        centroids[empty] = points[i].clone();
        if let Some(m) = mean_of(points, assignments, donor, dim) {
            centroids[donor] = m;
        }
    }
}

/// Lloyd iterations from the given centroids until the assignment stops
/// changing or `max_iter` updates have run.
pub fn lloyd(points: &[Vec<f64>], initial: Vec<Vec<f64>>, max_iter: usize) -> LloydRun {
    let mut centroids = initial;
    let mut assignments = assign_all(points, &centroids);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        recompute(points, &assignments, &mut centroids);
        repair_empty(points, &mut assignments, &mut centroids);
        trace.push(inertia_of(points, &assignments, &centroids));
        let next = assign_all(points, &centroids);
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
    }
    if !converged {
        recompute(points, &assignments, &mut centroids);
        repair_empty(points, &mut assignments, &mut centroids);
    }
    let inertia = inertia_of(points, &assignments, &centroids);
    LloydRun {
        assignments,
        centroids,
        inertia,
        iterations,
        converged,
        trace,
    }
}

fn validate(points: &[Vec<f64>], k: usize) -> Result<(), ClusterError> {
    if points.is_empty() {
        return Err(ClusterError::NoPoints);
    }
    if k == 0 || k > points.len() {
        return Err(ClusterError::BadK { k, n: points.len() });
    }
    let dim = points[0].len();
    if let Some(i) = points.iter().position(|p| p.len() != dim) {
        return Err(ClusterError::Ragged {
            index: i,
            expected: dim,
            found: points[i].len(),
        });
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(ClusterError::NonFinite);
    }
    Ok(())
}

fn random_distinct(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut distinct: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if !distinct.iter().any(|&j| points[j] == *p) {
            distinct.push(i);
        }
    }
    if distinct.len() >= k {
        return sample(rng, distinct.len(), k)
            .into_iter()
            .map(|i| distinct[i])
            .collect();
    }
    // Fewer distinct values than clusters: take all of them, pad with the rest.
    let mut chosen = distinct.clone();
    let rest: Vec<usize> = (0..points.len())
        .filter(|i| !distinct.contains(i))
        .collect();
    chosen.extend(
        sample(rng, rest.len(), k - chosen.len())
            .into_iter()
            .map(|i| rest[i]),
    );
    chosen
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut chosen = vec![rng.gen_range(0..points.len())];
    while chosen.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| {
                chosen
                    .iter()
                    .map(|&c| sq_dist(p, &points[c]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let pick = if total <= 0.0 {
            (0..points.len())
                .find(|i| !chosen.contains(i))
                .expect("k <= n")
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, d) in d2.iter().enumerate() {
                if *d > 0.0 && target < *d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        };
        chosen.push(pick);
    }
    chosen
}

/// Largest input accepted by [`Restarts::Exhaustive`].
pub const MAX_EXHAUSTIVE_POINTS: usize = 10;

/// Centroids of every partition of the points into exactly `k` non-empty
/// clusters (restricted-growth enumeration).
fn partition_centroids(points: &[Vec<f64>], k: usize) -> Vec<Vec<Vec<f64>>> {
    fn rec(n: usize, k: usize, labels: &mut Vec<usize>, used: usize, out: &mut Vec<Vec<usize>>) {
        if labels.len() == n {
            if used == k {
                out.push(labels.clone());
            }
            return;
        }
        // Not enough points left to open the remaining clusters.
        if k - used > n - labels.len() {
            return;
        }
        for l in 0..(used + 1).min(k) {
            labels.push(l);
            rec(n, k, labels, used.max(l + 1), out);
            labels.pop();
        }
    }
    let mut all = Vec::new();
    rec(
        points.len(),
        k,
        &mut Vec::with_capacity(points.len()),
        0,
        &mut all,
    );
    let dim = points[0].len();
    all.iter()
        .map(|labels| {
            (0..k)
                .map(|c| mean_of(points, labels, c, dim).expect("every label used"))
                .collect()
        })
        .collect()
}

/// Best-of-restarts Lloyd k-means with seeded random distinct-point
/// initialization.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<ClusterResult, ClusterError> {
    kmeans_with(points, k, &KMeansOptions::seeded(restarts, seed))
}

pub fn kmeans_with(
    points: &[Vec<f64>],
    k: usize,
    opts: &KMeansOptions,
) -> Result<ClusterResult, ClusterError> {
    validate(points, k)?;
    let inits: Vec<Vec<Vec<f64>>> = match opts.restarts {
        Restarts::Exhaustive => {
            if points.len() > MAX_EXHAUSTIVE_POINTS {
                return Err(ClusterError::TooManyForExhaustive {
                    n: points.len(),
                    max: MAX_EXHAUSTIVE_POINTS,
                });
            }
            partition_centroids(points, k)
        }
        Restarts::Seeded(r) => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            (0..r.max(1))
                .map(|_| match opts.init {
                    InitStrategy::RandomDistinct => random_distinct(points, k, &mut rng),
                    InitStrategy::PlusPlus => plus_plus(points, k, &mut rng),
                })
                .map(|idx| idx.iter().map(|&i| points[i].clone()).collect())
                .collect()
        }
    };
    let best = inits
        .into_iter()
        .map(|init| lloyd(points, init, opts.max_iter))
        .reduce(|best, run| {
            if run.inertia < best.inertia {
                run
            } else {
                best
            }
        })
        .expect("at least one restart");
    let balance = balance_from_assignments(&best.assignments, k);
    Ok(ClusterResult {
        k,
        assignments: best.assignments,
        centroids: best.centroids,
        inertia: best.inertia,
        score: best.inertia,
        balance,
    })
}
