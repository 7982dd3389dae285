//! Paired significance testing and bootstrap intervals for the human
//! acceptability study.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::EvalError;

/// Below this many discordant pairs the exact binomial test is used.
pub const EXACT_THRESHOLD: usize = 25;

/// Discordant-pair counts: `b` = A accepted, B rejected; `c` = the reverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairedCounts {
    pub both: usize,
    pub b: usize,
    pub c: usize,
    pub neither: usize,
}

impl PairedCounts {
    pub fn from_pairs(pairs: &[(bool, bool)]) -> Self {
        let mut k = Self::default();
        for &(a, b) in pairs {
            match (a, b) {
                (true, true) => k.both += 1,
                (true, false) => k.b += 1,
                (false, true) => k.c += 1,
                (false, false) => k.neither += 1,
            }
        }
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McNemarMethod {
    ExactBinomial,
    ChiSquareCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemar {
    pub b: usize,
    pub c: usize,
    /// Continuity-corrected χ² statistic; `None` for the exact test.
    pub statistic: Option<f64>,
    pub p_value: f64,
    pub method: McNemarMethod,
    /// No discordant pairs at all; p is reported as 1.
    pub degenerate: bool,
}

fn binom_coeff(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Two-sided McNemar test on the discordant counts.
pub fn mcnemar(b: usize, c: usize) -> McNemar {
    let n = b + c;
    if n == 0 {
        return McNemar {
            b,
            c,
            statistic: None,
            p_value: 1.0,
            method: McNemarMethod::ExactBinomial,
            degenerate: true,
        };
    }
    if n < EXACT_THRESHOLD {
        let lo = b.min(c);
        let tail: f64 = (0..=lo).map(|i| binom_coeff(n, i)).sum::<f64>() / 2f64.powi(n as i32);
        return McNemar {
            b,
            c,
            statistic: None,
            p_value: (2.0 * tail).min(1.0),
            method: McNemarMethod::ExactBinomial,
            degenerate: false,
        };
    }
    let diff = (b as f64 - c as f64).abs() - 1.0;
    let stat = diff.max(0.0).powi(2) / n as f64;
    let chi = ChiSquared::new(1.0).expect("one degree of freedom");
    McNemar {
        b,
        c,
        statistic: Some(stat),
        p_value: chi.sf(stat),
        method: McNemarMethod::ChiSquareCorrected,
        degenerate: false,
    }
}

pub fn mcnemar_pairs(pairs: &[(bool, bool)]) -> McNemar {
    let k = PairedCounts::from_pairs(pairs);
    mcnemar(k.b, k.c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            resamples: 10_000,
            level: 0.95,
            seed: 0,
        }
    }
}

/// Linear-interpolation quantile of sorted data (`q` in [0, 1]).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap interval for the proportion of `true` outcomes.
pub fn bootstrap_ci(outcomes: &[bool], opts: &BootstrapOptions) -> Result<(f64, f64), EvalError> {
    if outcomes.is_empty() {
        return Err(EvalError::Argument(
            "bootstrap needs at least one outcome".into(),
        ));
    }
    if opts.resamples == 0 || !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(EvalError::Argument(
            "bootstrap needs resamples > 0 and 0 < level < 1".into(),
        ));
    }
    let n = outcomes.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut means: Vec<f64> = (0..opts.resamples)
        .map(|_| (0..n).filter(|_| outcomes[rng.gen_range(0..n)]).count() as f64 / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - opts.level) / 2.0;
    Ok((
        quantile_sorted(&means, alpha),
        quantile_sorted(&means, 1.0 - alpha),
    ))
}

/// One judgment from the acceptability study: was the system's question
/// acceptable for its intended answer, and for the distractor answer?
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptabilityRecord {
    pub source: String,
    pub actual_ok: bool,
    pub distractor_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptabilityRow {
    pub source: String,
    pub n: usize,
    pub actual_rate: f64,
    pub actual_ci: (f64, f64),
    pub distractor_rate: f64,
    pub distractor_ci: (f64, f64),
    pub mcnemar: McNemar,
}

/// Per-source acceptance rates with bootstrap intervals, and a McNemar test
/// of actual vs distractor acceptance within each source.
pub fn acceptability_report(
    records: &[AcceptabilityRecord],
    opts: &BootstrapOptions,
) -> Result<Vec<AcceptabilityRow>, EvalError> {
    let mut by_source: BTreeMap<&str, Vec<(bool, bool)>> = BTreeMap::new();
    for r in records {
        by_source
            .entry(&r.source)
            .or_default()
            .push((r.actual_ok, r.distractor_ok));
    }
    by_source
        .into_iter()
        .map(|(source, pairs)| {
            let actual: Vec<bool> = pairs.iter().map(|p| p.0).collect();
            let distractor: Vec<bool> = pairs.iter().map(|p| p.1).collect();
            let rate = |v: &[bool]| v.iter().filter(|&&x| x).count() as f64 / v.len() as f64;
            Ok(AcceptabilityRow {
                source: source.to_owned(),
                n: pairs.len(),
                actual_rate: rate(&actual),
                actual_ci: bootstrap_ci(&actual, opts)?,
                distractor_rate: rate(&distractor),
                distractor_ci: bootstrap_ci(&distractor, opts)?,
                mcnemar: mcnemar_pairs(&pairs),
            })
        })
        .collect()
}
