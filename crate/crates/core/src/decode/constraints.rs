use std::collections::BTreeSet;

use super::{DecodeError, TokenId};

/// Satisfied when at least one alternative phrase occurs contiguously.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    alternatives: Vec<Vec<TokenId>>,
}

impl ConstraintSet {
    pub fn new(alternatives: Vec<Vec<TokenId>>) -> Result<Self, DecodeError> {
        if alternatives.is_empty() {
            return Err(DecodeError::Constraint(
                "constraint set has no alternatives".into(),
            ));
        }
        if alternatives.iter().any(Vec::is_empty) {
            return Err(DecodeError::Constraint("empty alternative".into()));
        }
        Ok(Self { alternatives })
    }

    pub fn alternatives(&self) -> &[Vec<TokenId>] {
        &self.alternatives
    }

    pub(crate) fn check(&self, vocab_size: usize, end: TokenId) -> Result<(), DecodeError> {
        for alt in &self.alternatives {
            if alt.contains(&end) {
                return Err(DecodeError::Constraint(
                    "alternative contains the end token".into(),
                ));
            }
            if let Some(t) = alt.iter().find(|&&t| t as usize >= vocab_size) {
                return Err(DecodeError::Constraint(format!(
                    "token {t} outside vocabulary of {vocab_size}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-set matcher state: the set of live partial matches `(alternative,
/// matched length)`, or satisfied. Tracking every partial match at once
/// handles overlapping prefixes (e.g. `A A B` against `A B`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchState {
    pub satisfied: bool,
    pub partial: BTreeSet<(usize, usize)>,
}

impl MatchState {
    pub fn advance(&self, set: &ConstraintSet, token: TokenId) -> MatchState {
        if self.satisfied {
            return self.clone();
        }
        let mut next = BTreeSet::new();
        let starts = set.alternatives.iter().enumerate().map(|(a, _)| (a, 0));
        for (a, len) in self.partial.iter().copied().chain(starts) {
            let alt = &set.alternatives[a];
            if alt[len] == token {
                if len + 1 == alt.len() {
                    return MatchState {
                        satisfied: true,
                        partial: BTreeSet::new(),
                    };
                }
                next.insert((a, len + 1));
            }
        }
        MatchState {
            satisfied: false,
            partial: next,
        }
    }

    /// Tokens that extend a live partial match or start an alternative.
    pub fn advancing_tokens(&self, set: &ConstraintSet) -> BTreeSet<TokenId> {
        if self.satisfied {
            return BTreeSet::new();
        }
        let mut out: BTreeSet<TokenId> = set.alternatives.iter().map(|a| a[0]).collect();
        out.extend(
            self.partial
                .iter()
                .map(|&(a, len)| set.alternatives[a][len]),
        );
        out
    }
}

/// Independent check: every set has an alternative occurring as a
/// contiguous run of `tokens`.
pub fn satisfies(tokens: &[TokenId], sets: &[ConstraintSet]) -> bool {
    sets.iter().all(|s| {
        s.alternatives
            .iter()
            .any(|alt| tokens.windows(alt.len()).any(|w| w == alt.as_slice()))
    })
}
