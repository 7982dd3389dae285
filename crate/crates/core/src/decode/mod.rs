//! Lexically constrained beam search with disjunctive positive constraints,
//! pluggable next-token scorers, and constraint construction from the
//! noun spans of a question.

mod constraints;
mod scorer;
mod search;
mod spans;

use std::collections::HashMap;

pub use constraints::{satisfies, ConstraintSet, MatchState};
pub use scorer::{FnScorer, NgramScorer, ProcessScorer, BOS, EOS};
pub use search::{beam_search, constrained_beam_search, DecodeResult, Hypothesis, DEFAULT_BEAM};
pub use spans::{
    compile_constraints, extract_noun_spans, parse_pos_file, CompiledConstraints, LexiconTagger,
    NounSpan, TaggedSentence, NOUN_TAGS,
};

pub type TokenId = u32;

#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    #[error("{0}")]
    Argument(String),
    #[error("invalid constraint: {0}")]
    Constraint(String),
    #[error("scorer: {0}")]
    Scorer(String),
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error(
        "no hypothesis satisfied every constraint set within the length limit; best partial has {} of the sets",
        best.bank
    )]
    SearchExhausted { best: Box<Hypothesis> },
}

/// Next-token distribution over a fixed vocabulary.
///
/// `log_probs` returns one finite log-probability per token id; each
/// distribution should sum to 1. Implementations are shared read-only
/// across threads.
pub trait TokenScorer: Send + Sync {
    fn vocab_size(&self) -> usize;
    fn end_token(&self) -> TokenId;
    fn log_probs(&self, prefix: &[TokenId]) -> Result<Vec<f64>, DecodeError>;
}

impl<S: TokenScorer + ?Sized> TokenScorer for &S {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }
    fn end_token(&self) -> TokenId {
        (**self).end_token()
    }
    fn log_probs(&self, prefix: &[TokenId]) -> Result<Vec<f64>, DecodeError> {
        (**self).log_probs(prefix)
    }
}

/// Bidirectional token string ↔ id table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    ids: HashMap<String, TokenId>,
}

impl Vocab {
    pub fn new(tokens: Vec<String>) -> Result<Self, DecodeError> {
        let mut ids = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if ids.insert(t.clone(), i as TokenId).is_some() {
                return Err(DecodeError::Argument(format!(
                    "duplicate vocabulary token {t:?}"
                )));
            }
        }
        Ok(Self { tokens, ids })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// All-or-nothing encoding; `None` if any token is unknown.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Option<Vec<TokenId>> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[TokenId]) -> Vec<&str> {
        ids.iter()
            .map(|&i| self.token(i).unwrap_or("<unk>"))
            .collect()
    }
}
