use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::Serialize;

use super::{ConstraintSet, DecodeError, MatchState, TokenId, TokenScorer};

pub const DEFAULT_BEAM: usize = 5;

/// Slack for log-probabilities that round slightly above zero.
const LOGPROB_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub tokens: Vec<TokenId>,
    pub log_score: f64,
    /// Number of constraint sets satisfied so far.
    pub bank: usize,
    #[serde(skip)]
    pub match_state: Vec<MatchState>,
}

impl Hypothesis {
    fn root(n_sets: usize) -> Self {
        Self {
            tokens: Vec::new(),
            log_score: 0.0,
            bank: 0,
            match_state: vec![MatchState::default(); n_sets],
        }
    }

    fn extend(&self, token: TokenId, lp: f64, sets: &[ConstraintSet]) -> Self {
        let match_state: Vec<MatchState> = self
            .match_state
            .iter()
            .zip(sets)
            .map(|(s, set)| s.advance(set, token))
            .collect();
        let mut tokens = Vec::with_capacity(self.tokens.len() + 1);
        tokens.extend_from_slice(&self.tokens);
        tokens.push(token);
        Self {
            tokens,
            log_score: self.log_score + lp,
            bank: match_state.iter().filter(|s| s.satisfied).count(),
            match_state,
        }
    }
}

/// Higher score first; equal scores in ascending token order.
fn rank(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.log_score
        .total_cmp(&a.log_score)
        .then_with(|| a.tokens.cmp(&b.tokens))
}

fn keep_better(slot: &mut Option<Hypothesis>, h: Hypothesis) {
    if slot
        .as_ref()
        .map_or(true, |b| rank(&h, b) == Ordering::Less)
    {
        *slot = Some(h);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeResult {
    /// Output tokens, without the end token.
    pub tokens: Vec<TokenId>,
    /// Includes the end token's log-probability when finished.
    pub log_score: f64,
    /// False when no hypothesis emitted the end token within `max_len`.
    pub finished: bool,
    pub bank: usize,
}

impl DecodeResult {
    fn finished(mut h: Hypothesis) -> Self {
        h.tokens.pop();
        Self {
            tokens: h.tokens,
            log_score: h.log_score,
            finished: true,
            bank: h.bank,
        }
    }

    fn unfinished(h: Hypothesis) -> Self {
        Self {
            tokens: h.tokens,
            log_score: h.log_score,
            finished: false,
            bank: h.bank,
        }
    }
}

fn checked_log_probs<S: TokenScorer + ?Sized>(
    scorer: &S,
    prefix: &[TokenId],
) -> Result<Vec<f64>, DecodeError> {
    let lp = scorer.log_probs(prefix)?;
    if lp.len() != scorer.vocab_size() {
        return Err(DecodeError::Scorer(format!(
            "returned {} scores for a vocabulary of {}",
            lp.len(),
            scorer.vocab_size()
        )));
    }
    if let Some(x) = lp.iter().find(|x| x.is_nan() || **x > LOGPROB_EPS) {
        return Err(DecodeError::Scorer(format!("{x} is not a log-probability")));
    }
    Ok(lp)
}

/// Ids of the `k` best tokens other than `end`, best first (ties by id).
fn top_k(lp: &[f64], k: usize, end: TokenId) -> Vec<TokenId> {
    let mut ids: Vec<TokenId> = (0..lp.len() as TokenId)
        .filter(|&t| t != end && lp[t as usize] > f64::NEG_INFINITY)
        .collect();
    ids.sort_by(|&a, &b| lp[b as usize].total_cmp(&lp[a as usize]).then(a.cmp(&b)));
    ids.truncate(k);
    ids
}

fn check_args<S: TokenScorer + ?Sized>(
    scorer: &S,
    beam: usize,
    max_len: usize,
) -> Result<(), DecodeError> {
    if beam == 0 || max_len == 0 {
        return Err(DecodeError::Argument(
            "beam size and max length must be at least 1".into(),
        ));
    }
    if scorer.vocab_size() == 0 || scorer.end_token() as usize >= scorer.vocab_size() {
        return Err(DecodeError::Argument(
            "end token outside the scorer vocabulary".into(),
        ));
    }
    Ok(())
}

/// Splits `beam` slots across banks `0..=m`, as evenly as possible with
/// leftovers going to the highest banks, fills each bank with its best
/// candidates, then hands unused slots to the best remaining candidates.
fn allocate(mut candidates: Vec<Hypothesis>, beam: usize, m: usize) -> Vec<Hypothesis> {
    candidates.sort_by(rank);
    let banks = m + 1;
    let quota = |b: usize| beam / banks + usize::from(b >= banks - beam % banks);
    let mut used = vec![0; banks];
    let mut taken = vec![false; candidates.len()];
    let mut total = 0;
    for (i, c) in candidates.iter().enumerate() {
        if used[c.bank] < quota(c.bank) {
            used[c.bank] += 1;
            taken[i] = true;
            total += 1;
        }
    }
    for t in taken.iter_mut() {
        if total == beam {
            break;
        }
        if !*t {
            *t = true;
            total += 1;
        }
    }
    candidates
        .into_iter()
        .zip(taken)
        .filter_map(|(c, t)| t.then_some(c))
        .collect()
}

/// Beam search that only lets a hypothesis end once every constraint set
/// is satisfied, with the beam divided across banks of hypotheses by
/// number of satisfied sets.
///
/// Each hypothesis is expanded with its top `beam` tokens plus every token
/// that starts or continues an alternative of an unsatisfied set. `max_len`
/// counts the end token. Search stops early once the best finished
/// hypothesis outscores every live one.
pub fn constrained_beam_search<S: TokenScorer + ?Sized>(
    scorer: &S,
    sets: &[ConstraintSet],
    beam: usize,
    max_len: usize,
) -> Result<DecodeResult, DecodeError> {
    check_args(scorer, beam, max_len)?;
    let end = scorer.end_token();
    for s in sets {
        s.check(scorer.vocab_size(), end)?;
    }
    let m = sets.len();
    let mut live = vec![Hypothesis::root(m)];
    let mut best_finished: Option<Hypothesis> = None;
    let mut best_complete: Option<Hypothesis> = None;
    let mut best_partial = Hypothesis::root(m);

    for _ in 0..max_len {
        let mut candidates = Vec::new();
        for h in &live {
            let lp = checked_log_probs(scorer, &h.tokens)?;
            if h.bank == m && lp[end as usize] > f64::NEG_INFINITY {
                keep_better(&mut best_finished, h.extend(end, lp[end as usize], sets));
            }
            let mut next: BTreeSet<TokenId> = top_k(&lp, beam, end).into_iter().collect();
            for (state, set) in h.match_state.iter().zip(sets) {
                next.extend(
                    state
                        .advancing_tokens(set)
                        .into_iter()
                        .filter(|&t| lp[t as usize] > f64::NEG_INFINITY),
                );
            }
            candidates.extend(next.into_iter().map(|t| h.extend(t, lp[t as usize], sets)));
        }
        live = allocate(candidates, beam, m);
        for h in &live {
            if h.bank == m {
                keep_better(&mut best_complete, h.clone());
            }
            if (h.bank, -h.log_score) > (best_partial.bank, -best_partial.log_score) {
                best_partial = h.clone();
            }
        }
        match (&best_finished, live.first()) {
            (_, None) => break,
            (Some(f), Some(l)) if f.log_score > l.log_score => break,
            _ => {}
        }
    }

    if let Some(f) = best_finished {
        return Ok(DecodeResult::finished(f));
    }
    match best_complete {
        Some(h) => Ok(DecodeResult::unfinished(h)),
        None => Err(DecodeError::SearchExhausted {
            best: Box::new(best_partial),
        }),
    }
}

/// Plain beam search with the same tie-breaking, length and stopping
/// conventions as [`constrained_beam_search`].
pub fn beam_search<S: TokenScorer + ?Sized>(
    scorer: &S,
    beam: usize,
    max_len: usize,
) -> Result<DecodeResult, DecodeError> {
    check_args(scorer, beam, max_len)?;
    let end = scorer.end_token();
    let mut live = vec![Hypothesis::root(0)];
    let mut best_finished: Option<Hypothesis> = None;
    let mut best_live: Option<Hypothesis> = None;
    for _ in 0..max_len {
        let mut candidates = Vec::new();
        for h in &live {
            let lp = checked_log_probs(scorer, &h.tokens)?;
            if lp[end as usize] > f64::NEG_INFINITY {
                keep_better(&mut best_finished, h.extend(end, lp[end as usize], &[]));
            }
            candidates.extend(
                top_k(&lp, beam, end)
                    .into_iter()
                    .map(|t| h.extend(t, lp[t as usize], &[])),
            );
        }
        candidates.sort_by(rank);
        candidates.truncate(beam);
        live = candidates;
        if let Some(first) = live.first() {
            keep_better(&mut best_live, first.clone());
        }
        match (&best_finished, live.first()) {
            (_, None) => break,
            (Some(f), Some(l)) if f.log_score > l.log_score => break,
            _ => {}
        }
    }
    match (best_finished, best_live) {
        (Some(f), _) => Ok(DecodeResult::finished(f)),
        (None, Some(h)) => Ok(DecodeResult::unfinished(h)),
        (None, None) => Err(DecodeError::SearchExhausted {
            best: Box::new(Hypothesis::root(0)),
        }),
    }
}
