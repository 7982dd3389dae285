use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

macro_rules! opaque_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl From<u64> for $name {
            fn from(n: u64) -> Self {
                Self(n.to_string())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                deserialize_opaque(d).map(Self)
            }
        }
    };
}

/// VQAv2 ships numeric ids; the exchange format writes strings. Both are accepted.
fn deserialize_opaque<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(u64),
        Str(String),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::Num(n) => n.to_string(),
        Raw::Str(s) => s,
    })
}

opaque_id!(
    /// Identifier of one image/question pair.
    QuestionId
);
opaque_id!(ImageId);
opaque_id!(AnnotatorId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Yes,
    Maybe,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub text: String,
    pub confidence: Confidence,
    pub source_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VqaExample {
    pub question_id: QuestionId,
    pub image_id: ImageId,
    pub image_uri: String,
    pub question: String,
    pub answers: Vec<AnswerRecord>,
}

impl VqaExample {
    pub fn answer_texts(&self) -> impl Iterator<Item = &str> {
        self.answers.iter().map(|a| a.text.as_str())
    }
}

/// Reasons an example is ambiguous.
///
/// Serialized names are part of the exchange format and must not change.
/// The short codes (`A/L`, `M/B`, ...) are accepted as input aliases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OntologyLabel {
    #[serde(alias = "A/L")]
    Location,
    #[serde(alias = "A/T")]
    Time,
    #[serde(alias = "A/K")]
    Kind,
    #[serde(alias = "A/C")]
    Cause,
    #[serde(alias = "A/P")]
    Purpose,
    #[serde(alias = "A/G")]
    Goal,
    #[serde(alias = "A/D")]
    Direction,
    #[serde(alias = "A/N")]
    Manner,
    #[serde(alias = "A/M")]
    MultipleOptions,
    Grouping,
    #[serde(alias = "U")]
    Uncertainty,
    #[serde(alias = "M/A")]
    AnnotatorMistake,
    #[serde(alias = "M/B")]
    BadQuestionOrImage,
}

impl OntologyLabel {
    pub const ALL: [OntologyLabel; 13] = [
        OntologyLabel::Location,
        OntologyLabel::Time,
        OntologyLabel::Kind,
        OntologyLabel::Cause,
        OntologyLabel::Purpose,
        OntologyLabel::Goal,
        OntologyLabel::Direction,
        OntologyLabel::Manner,
        OntologyLabel::MultipleOptions,
        OntologyLabel::Grouping,
        OntologyLabel::Uncertainty,
        OntologyLabel::AnnotatorMistake,
        OntologyLabel::BadQuestionOrImage,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OntologyLabel::Location => "location",
            OntologyLabel::Time => "time",
            OntologyLabel::Kind => "kind",
            OntologyLabel::Cause => "cause",
            OntologyLabel::Purpose => "purpose",
            OntologyLabel::Goal => "goal",
            OntologyLabel::Direction => "direction",
            OntologyLabel::Manner => "manner",
            OntologyLabel::MultipleOptions => "multiple_options",
            OntologyLabel::Grouping => "grouping",
            OntologyLabel::Uncertainty => "uncertainty",
            OntologyLabel::AnnotatorMistake => "annotator_mistake",
            OntologyLabel::BadQuestionOrImage => "bad_question_or_image",
        }
    }
}

impl fmt::Display for OntologyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One group of answers that respond to the same underlying question.
///
/// `answer_texts` is aligned with `member_indices` in ascending index order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerGroup {
    pub rewritten_question: String,
    #[serde(rename = "answer_indices")]
    pub member_indices: BTreeSet<usize>,
    #[serde(default)]
    pub answer_texts: Vec<String>,
    #[serde(default)]
    pub labels: BTreeSet<OntologyLabel>,
}

/// One annotator's (or model's) decision about an example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerGrouping {
    pub question_id: QuestionId,
    #[serde(default = "unknown_image")]
    pub image_id: ImageId,
    #[serde(default)]
    pub image_uri: String,
    #[serde(default)]
    pub original_question: String,
    pub annotator_id: AnnotatorId,
    pub ambiguous: bool,
    #[serde(default)]
    pub groups: Vec<AnswerGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
    #[serde(default)]
    pub deleted_indices: BTreeSet<usize>,
}

fn unknown_image() -> ImageId {
    ImageId(String::new())
}

impl AnswerGrouping {
    /// Groups as plain index sets, the form the agreement metrics consume.
    pub fn partition(&self) -> Vec<BTreeSet<usize>> {
        self.groups
            .iter()
            .map(|g| g.member_indices.clone())
            .collect()
    }

    /// All labels attached to any group.
    pub fn labels(&self) -> BTreeSet<OntologyLabel> {
        self.groups
            .iter()
            .flat_map(|g| g.labels.iter().copied())
            .collect()
    }

    pub fn grouped_indices(&self) -> BTreeSet<usize> {
        self.groups
            .iter()
            .flat_map(|g| g.member_indices.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Dev,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub name: SplitName,
    pub question_ids: BTreeSet<QuestionId>,
}
