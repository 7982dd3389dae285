//! Independent brute-force oracles, shared by the oracle tests here and the
//! acceptance suite in the CLI crate.
#![allow(dead_code)]

use std::cmp::Ordering;

use avqa_core::decode::{satisfies, ConstraintSet, FnScorer, TokenId, TokenScorer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic pseudo-random next-token distribution keyed on the prefix.
/// Every fifth toy is uniform, which forces exact score ties.
pub fn toy(vocab: usize, seed: u64) -> FnScorer<impl Fn(&[TokenId]) -> Vec<f64> + Send + Sync> {
    let end = (vocab - 1) as TokenId;
    FnScorer::new(vocab, end, move |prefix: &[TokenId]| {
        if seed % 5 == 0 {
            return vec![-(vocab as f64).ln(); vocab];
        }
        let key = prefix
            .iter()
            .fold(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15), |h, &t| {
                (h ^ (t as u64 + 1)).wrapping_mul(0x100_0000_01B3)
            });
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        let w: Vec<f64> = (0..vocab).map(|_| rng.gen_range(0.05..1.0)).collect();
        let z: f64 = w.iter().sum();
        w.iter().map(|x| (x / z).ln()).collect()
    })
}

/// Best sequence (without end) over all constraint-satisfying outputs of
/// at most `max_len` tokens including the end token.
pub fn exhaustive<S: TokenScorer>(
    s: &S,
    sets: &[ConstraintSet],
    max_len: usize,
) -> Option<(Vec<TokenId>, f64)> {
    let end = s.end_token();
    let words: Vec<TokenId> = (0..s.vocab_size() as TokenId)
        .filter(|&t| t != end)
        .collect();
    let mut best: Option<(Vec<TokenId>, f64)> = None;
    let mut stack: Vec<(Vec<TokenId>, f64)> = vec![(vec![], 0.0)];
    while let Some((seq, score)) = stack.pop() {
        let lp = s.log_probs(&seq).unwrap();
        if satisfies(&seq, sets) {
            let total = score + lp[end as usize];
            let mut with_end = seq.clone();
            with_end.push(end);
            let better = match &best {
                None => true,
                Some((b, bs)) => {
                    let mut b_end = b.clone();
                    b_end.push(end);
                    total.total_cmp(bs).then_with(|| b_end.cmp(&with_end)) == Ordering::Greater
                }
            };
            if better {
                best = Some((seq.clone(), total));
            }
        }
        if seq.len() + 2 <= max_len {
            for &t in &words {
                let mut next = seq.clone();
                next.push(t);
                stack.push((next, score + lp[t as usize]));
            }
        }
    }
    best
}

pub fn random_sets(rng: &mut ChaCha8Rng, vocab: usize) -> Vec<ConstraintSet> {
    let n_sets = rng.gen_range(0..=2);
    (0..n_sets)
        .map(|_| {
            let n_alt = rng.gen_range(1..=2);
            let alts = (0..n_alt)
                .map(|_| {
                    (0..rng.gen_range(1..=3))
                        .map(|_| rng.gen_range(0..vocab - 1) as TokenId)
                        .collect()
                })
                .collect();
            ConstraintSet::new(alts).unwrap()
        })
        .collect()
}

/// Maximum total weight over all injective row→column (or column→row)
/// assignments of the smaller side.
pub fn brute_force_assignment(w: &[Vec<u64>]) -> u64 {
    let rows = w.len();
    let cols = w[0].len();
    fn rec(w: &[Vec<u64>], r: usize, used: &mut Vec<bool>, transpose: bool) -> u64 {
        let (n_small, n_big) = if transpose {
            (w[0].len(), w.len())
        } else {
            (w.len(), w[0].len())
        };
        if r == n_small {
            return 0;
        }
        let mut best = 0;
        for c in 0..n_big {
            if !used[c] {
                used[c] = true;
                let v = if transpose { w[c][r] } else { w[r][c] };
                best = best.max(v + rec(w, r + 1, used, transpose));
                used[c] = false;
            }
        }
        best
    }
    if rows <= cols {
        rec(w, 0, &mut vec![false; cols], false)
    } else {
        rec(w, 0, &mut vec![false; rows], true)
    }
}

/// Minimum within-cluster sum of squares over every partition of the points
/// into at most `k` clusters (restricted-growth enumeration).
pub fn brute_force_inertia(points: &[Vec<f64>], k: usize) -> f64 {
    fn cost(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
        let dim = points[0].len();
        let mut total = 0.0;
        for c in 0..k {
            let members: Vec<&Vec<f64>> = points
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == c)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                continue;
            }
            let n = members.len() as f64;
            let mean: Vec<f64> = (0..dim)
                .map(|d| members.iter().map(|p| p[d]).sum::<f64>() / n)
                .collect();
            total += members
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(&mean)
                        .map(|(x, m)| (x - m).powi(2))
                        .sum::<f64>()
                })
                .sum::<f64>();
        }
        total
    }
    fn rec(points: &[Vec<f64>], k: usize, labels: &mut Vec<usize>, used: usize, best: &mut f64) {
        if labels.len() == points.len() {
            *best = best.min(cost(points, labels, k));
            return;
        }
        for l in 0..(used + 1).min(k) {
            labels.push(l);
            rec(points, k, labels, used.max(l + 1), best);
            labels.pop();
        }
    }
    let mut best = f64::INFINITY;
    rec(points, k, &mut Vec::new(), 0, &mut best);
    best
}

pub fn random_points(rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rng.gen_range(1..=8);
    let dim = rng.gen_range(1..=3);
    // Small integer grid so duplicates and ties occur regularly.
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-5..=5) as f64).collect())
        .collect()
}
