//! Domain types, VQAv2 ingestion and the JSONL exchange format.

mod jsonl;
mod normalize;
mod types;
mod validate;
mod vqa;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use jsonl::{
    export_jsonl, grouping_from_line, grouping_to_line, import_jsonl, read_groupings, read_jsonl,
    write_groupings, SCHEMA_VERSION,
};
pub use normalize::{normalize_answer, normalize_for_match, strip_punctuation};
pub use types::*;
pub use validate::{validate_against, validate_grouping, Invariant, Violation};
pub use vqa::{
    filter_ambiguous_subset, filter_answers_by_confidence, load_reason_labels, load_vqa,
    load_vqa_with, AnswerRemap, EmptyExample, LoadOptions, ReasonFlag, ReasonLabels, SubsetReport,
};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(
        "{path}: malformed JSON at line {line}, column {column} (byte offset {offset}): {message}"
    )]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        offset: usize,
        message: String,
    },
    #[error(
        "referential integrity: {} annotated question id(s) missing from questions {:?}; {} question id(s) without annotations {:?}",
        without_question.len(), without_question, without_annotation.len(), without_annotation
    )]
    ReferentialIntegrity {
        without_question: Vec<QuestionId>,
        without_annotation: Vec<QuestionId>,
    },
    #[error("question id {0} appears more than once")]
    DuplicateQuestion(QuestionId),
    #[error("question {0} has no answers")]
    EmptyAnswers(QuestionId),
    #[error("question {question_id}: answer {index} is blank")]
    InvalidAnswer {
        question_id: QuestionId,
        index: usize,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("line {line}: unsupported schema_version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersion { line: usize, found: u32 },
    #[error("line {line}: invariant {violation}")]
    Validation { line: usize, violation: Violation },
    #[error("dev and test splits share {0} question id(s)")]
    OverlappingSplits(usize),
    #[error("requested {requested} dev questions but only {available} are available")]
    SplitTooLarge { requested: usize, available: usize },
}

impl CorpusError {
    pub(crate) fn parse(path: &Path, text: &str, e: &serde_json::Error) -> Self {
        let (line, column) = (e.line(), e.column());
        let offset = text
            .split_inclusive('\n')
            .take(line.saturating_sub(1))
            .map(str::len)
            .sum::<usize>()
            + column.saturating_sub(1);
        CorpusError::Parse {
            path: path.to_path_buf(),
            line,
            column,
            offset,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub dev: BTreeSet<QuestionId>,
    pub test: BTreeSet<QuestionId>,
}

impl Splits {
    pub fn new(dev: BTreeSet<QuestionId>, test: BTreeSet<QuestionId>) -> Result<Self, CorpusError> {
        let shared = dev.intersection(&test).count();
        if shared > 0 {
            return Err(CorpusError::OverlappingSplits(shared));
        }
        Ok(Self { dev, test })
    }

    /// Seeded shuffle of the unique ids, first `dev_size` to dev, rest to test.
    pub fn random(ids: &[QuestionId], dev_size: usize, seed: u64) -> Result<Self, CorpusError> {
        let mut unique: Vec<QuestionId> = ids
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if dev_size > unique.len() {
            return Err(CorpusError::SplitTooLarge {
                requested: dev_size,
                available: unique.len(),
            });
        }
        unique.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let test = unique.split_off(dev_size);
        Ok(Self {
            dev: unique.into_iter().collect(),
            test: test.into_iter().collect(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let raw: Splits = vqa::read_json(path)?;
        Self::new(raw.dev, raw.test)
    }

    pub fn get(&self, name: SplitName) -> DatasetSplit {
        let ids = match name {
            SplitName::Dev => &self.dev,
            SplitName::Test => &self.test,
        };
        DatasetSplit {
            name,
            question_ids: ids.clone(),
        }
    }

    pub fn contains(&self, name: SplitName, id: &QuestionId) -> bool {
        match name {
            SplitName::Dev => self.dev.contains(id),
            SplitName::Test => self.test.contains(id),
        }
    }
}
