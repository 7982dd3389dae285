//! VQAv2 ingestion and example-level filters.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::{AnswerRecord, Confidence, ImageId, QuestionId, VqaExample};
use super::CorpusError;

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// `{image_id}` is replaced by the raw id, `{image_id:012}` by the id
    /// zero-padded to 12 digits (the COCO file naming scheme).
    pub image_uri_template: String,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            image_uri_template: "train2014/COCO_train2014_{image_id:012}.jpg".into(),
        }
    }
}

impl LoadOptions {
    pub fn image_uri(&self, image_id: &ImageId) -> String {
        let raw = image_id.as_str();
        let padded = match raw.parse::<u64>() {
            Ok(n) => format!("{n:012}"),
            Err(_) => raw.to_owned(),
        };
        self.image_uri_template
            .replace("{image_id:012}", &padded)
            .replace("{image_id}", raw)
    }
}

#[derive(Deserialize)]
struct QuestionsFile {
    questions: Vec<RawQuestion>,
}

#[derive(Deserialize)]
struct RawQuestion {
    question_id: QuestionId,
    image_id: ImageId,
    question: String,
}

#[derive(Deserialize)]
struct AnnotationsFile {
    annotations: Vec<RawAnnotation>,
}

#[derive(Deserialize)]
struct RawAnnotation {
    question_id: QuestionId,
    answers: Vec<RawAnswer>,
}

#[derive(Deserialize)]
struct RawAnswer {
    answer: String,
    answer_confidence: Confidence,
    #[serde(default)]
    answer_id: Option<serde_json::Value>,
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CorpusError::parse(path, &text, &e))
}

/// Loads VQAv2 question and annotation files and joins them by question id.
///
/// Examples come out in question-file order; answers keep annotation order.
pub fn load_vqa(
    questions_path: &Path,
    annotations_path: &Path,
) -> Result<Vec<VqaExample>, CorpusError> {
    load_vqa_with(questions_path, annotations_path, &LoadOptions::default())
}

pub fn load_vqa_with(
    questions_path: &Path,
    annotations_path: &Path,
    opts: &LoadOptions,
) -> Result<Vec<VqaExample>, CorpusError> {
    let questions: QuestionsFile = read_json(questions_path)?;
    let annotations: AnnotationsFile = read_json(annotations_path)?;

    let mut seen = HashSet::new();
    for q in &questions.questions {
        if !seen.insert(q.question_id.clone()) {
            return Err(CorpusError::DuplicateQuestion(q.question_id.clone()));
        }
    }

    let mut by_id: HashMap<QuestionId, Vec<RawAnswer>> = HashMap::new();
    let mut orphans = BTreeSet::new();
    for ann in annotations.annotations {
        if !seen.contains(&ann.question_id) {
            orphans.insert(ann.question_id.clone());
        }
        by_id
            .entry(ann.question_id)
            .or_default()
            .extend(ann.answers);
    }
    let unanswered: BTreeSet<QuestionId> = questions
        .questions
        .iter()
        .filter(|q| !by_id.contains_key(&q.question_id))
        .map(|q| q.question_id.clone())
        .collect();
    if !orphans.is_empty() || !unanswered.is_empty() {
        return Err(CorpusError::ReferentialIntegrity {
            without_question: orphans.into_iter().collect(),
            without_annotation: unanswered.into_iter().collect(),
        });
    }

    let mut out = Vec::with_capacity(questions.questions.len());
    for q in questions.questions {
        let raw_answers = by_id.remove(&q.question_id).unwrap_or_default();
        if raw_answers.is_empty() {
            return Err(CorpusError::EmptyAnswers(q.question_id));
        }
        let mut answers = Vec::with_capacity(raw_answers.len());
        for (i, a) in raw_answers.into_iter().enumerate() {
            if a.answer.trim().is_empty() {
                return Err(CorpusError::InvalidAnswer {
                    question_id: q.question_id.clone(),
                    index: i,
                });
            }
            let source_id = match a.answer_id {
                Some(serde_json::Value::String(s)) => s,
                Some(serde_json::Value::Number(n)) => n.to_string(),
                _ => format!("{}:{}", q.question_id, i),
            };
            answers.push(AnswerRecord {
                text: a.answer,
                confidence: a.answer_confidence,
                source_id,
            });
        }
        out.push(VqaExample {
            image_uri: opts.image_uri(&q.image_id),
            question_id: q.question_id,
            image_id: q.image_id,
            question: q.question,
            answers,
        });
    }
    Ok(out)
}

/// Disagreement reasons from the VQA disagreement-label dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReasonFlag {
    #[serde(rename = "LQI")]
    LowQualityImage,
    #[serde(rename = "IVE")]
    InsufficientVisualEvidence,
    #[serde(rename = "INV")]
    InvalidQuestion,
    #[serde(rename = "DFF")]
    Difficult,
    #[serde(rename = "AMB")]
    Ambiguous,
    #[serde(rename = "SBJ")]
    Subjective,
    #[serde(rename = "SYN")]
    Synonyms,
    #[serde(rename = "GRN")]
    Granular,
    #[serde(rename = "SPM")]
    Spam,
    #[serde(rename = "OTH")]
    Other,
}

pub type ReasonLabels = HashMap<QuestionId, BTreeSet<ReasonFlag>>;

/// Reads a JSON object mapping question id to a list of reason codes.
pub fn load_reason_labels(path: &Path) -> Result<ReasonLabels, CorpusError> {
    let raw: BTreeMap<QuestionId, BTreeSet<ReasonFlag>> = read_json(path)?;
    Ok(raw.into_iter().collect())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SubsetReport {
    pub kept: usize,
    pub not_ambiguous: usize,
    pub unlabeled: usize,
}

/// Keeps the examples whose reason set contains [`ReasonFlag::Ambiguous`].
/// Examples without any label entry are dropped and counted.
pub fn filter_ambiguous_subset(
    examples: &[VqaExample],
    labels: &ReasonLabels,
) -> (Vec<VqaExample>, SubsetReport) {
    let mut report = SubsetReport::default();
    let mut kept = Vec::new();
    for ex in examples {
        match labels.get(&ex.question_id) {
            None => report.unlabeled += 1,
            Some(flags) if flags.contains(&ReasonFlag::Ambiguous) => {
                report.kept += 1;
                kept.push(ex.clone());
            }
            Some(_) => report.not_ambiguous += 1,
        }
    }
    (kept, report)
}

/// Maps original answer indices to indices in a filtered example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnswerRemap {
    pub new_index: Vec<Option<usize>>,
}

impl AnswerRemap {
    pub fn get(&self, original: usize) -> Option<usize> {
        self.new_index.get(original).copied().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("example {0} has no answers with yes/maybe confidence")]
pub struct EmptyExample(pub QuestionId);

/// Keeps answers rated `yes` or `maybe`, preserving order.
pub fn filter_answers_by_confidence(
    ex: &VqaExample,
) -> Result<(VqaExample, AnswerRemap), EmptyExample> {
    let mut new_index = Vec::with_capacity(ex.answers.len());
    let mut answers = Vec::new();
    for a in &ex.answers {
        if a.confidence == Confidence::No {
            new_index.push(None);
        } else {
            new_index.push(Some(answers.len()));
            answers.push(a.clone());
        }
    }
    if answers.is_empty() {
        return Err(EmptyExample(ex.question_id.clone()));
    }
    Ok((
        VqaExample {
            answers,
            ..ex.clone()
        },
        AnswerRemap { new_index },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(id: &str, confs: &[Confidence]) -> VqaExample {
        VqaExample {
            question_id: id.into(),
            image_id: "1".into(),
            image_uri: String::new(),
            question: "q?".into(),
            answers: confs
                .iter()
                .enumerate()
                .map(|(i, &c)| AnswerRecord {
                    text: format!("a{i}"),
                    confidence: c,
                    source_id: i.to_string(),
                })
                .collect(),
        }
    }

    #[test]
    fn confidence_filter_drops_no() {
        use Confidence::*;
        let ex = example("q", &[Yes, No, Maybe, Yes, Yes, No, Yes, Yes, Maybe, Yes]);
        let (f, _) = filter_answers_by_confidence(&ex).unwrap();
        assert_eq!(f.answers.len(), 8);
    }

    #[test]
    fn confidence_filter_all_no_signals_empty() {
        let ex = example("q", &[Confidence::No; 4]);
        assert_eq!(
            filter_answers_by_confidence(&ex).unwrap_err(),
            EmptyExample("q".into())
        );
    }

    #[test]
    fn remap_after_dropping_three_and_seven() {
        let mut confs = vec![Confidence::Yes; 10];
        confs[3] = Confidence::No;
        confs[7] = Confidence::No;
        let (f, remap) = filter_answers_by_confidence(&example("q", &confs)).unwrap();
        assert_eq!(remap.get(4), Some(3));
        assert_eq!(remap.get(8), Some(6));
        assert_eq!(remap.get(3), None);
        assert_eq!(remap.get(2), Some(2));
        assert_eq!(f.answers[3].text, "a4");
    }

    #[test]
    fn subset_keeps_only_ambiguous_flag() {
        let exs = vec![
            example("1", &[Confidence::Yes]),
            example("2", &[Confidence::Yes]),
            example("3", &[Confidence::Yes]),
        ];
        let mut labels = ReasonLabels::new();
        labels.insert("1".into(), [ReasonFlag::Ambiguous].into());
        labels.insert("2".into(), [ReasonFlag::LowQualityImage].into());
        let (kept, report) = filter_ambiguous_subset(&exs, &labels);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].question_id.as_str(), "1");
        assert_eq!(
            report,
            SubsetReport {
                kept: 1,
                not_ambiguous: 1,
                unlabeled: 1
            }
        );
    }

    #[test]
    fn subset_with_empty_labels() {
        let exs = vec![
            example("1", &[Confidence::Yes]),
            example("2", &[Confidence::Yes]),
            example("3", &[Confidence::Yes]),
        ];
        let (kept, report) = filter_ambiguous_subset(&exs, &ReasonLabels::new());
        assert!(kept.is_empty());
        assert_eq!(report.unlabeled, 3);
    }

    #[test]
    fn subset_flag_combinations() {
        // Every subset of {AMB, LQI, SYN}: kept exactly when AMB is present.
        let flags = [
            ReasonFlag::Ambiguous,
            ReasonFlag::LowQualityImage,
            ReasonFlag::Synonyms,
        ];
        let mut exs = Vec::new();
        let mut labels = ReasonLabels::new();
        for mask in 0u8..8 {
            let id = mask.to_string();
            exs.push(example(&id, &[Confidence::Yes]));
            let set = flags
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, f)| *f)
                .collect();
            labels.insert(id.as_str().into(), set);
        }
        let (kept, report) = filter_ambiguous_subset(&exs, &labels);
        let ids: Vec<_> = kept
            .iter()
            .map(|e| e.question_id.as_str().to_owned())
            .collect();
        assert_eq!(ids, ["1", "3", "5", "7"]);
        assert_eq!(report.not_ambiguous, 4);
    }

    #[test]
    fn image_uri_template() {
        let opts = LoadOptions::default();
        assert_eq!(
            opts.image_uri(&"42".into()),
            "train2014/COCO_train2014_000000000042.jpg"
        );
        let opts = LoadOptions {
            image_uri_template: "s3://b/{image_id}".into(),
        };
        assert_eq!(opts.image_uri(&"abc".into()), "s3://b/abc");
    }
}
