pub mod agreement;
pub mod decode;
pub mod eval_clusters;
pub mod export;
pub mod metrics;
pub mod prioritize;
pub mod serve;
pub mod stats;

use std::path::Path;

use avqa_core::corpus::{import_jsonl, load_vqa, read_jsonl, AnswerGrouping, VqaExample};

use crate::context::require_file;
use crate::error::{CliError, CliResult};

/// Examples come either from a JSONL file of examples or from a VQAv2
/// question/annotation file pair.
pub fn load_examples(
    examples: Option<&Path>,
    questions: Option<&Path>,
    annotations: Option<&Path>,
) -> CliResult<Vec<VqaExample>> {
    match (examples, questions, annotations) {
        (Some(e), None, None) => {
            require_file(e)?;
            Ok(read_jsonl(e)?)
        }
        (None, Some(q), Some(a)) => {
            require_file(q)?;
            require_file(a)?;
            Ok(load_vqa(q, a)?)
        }
        _ => Err(CliError::usage(
            "give either --examples or both --questions and --annotations",
        )),
    }
}

pub fn load_groupings(p: &Path) -> CliResult<Vec<AnswerGrouping>> {
    require_file(p)?;
    import_jsonl(p).map_err(|e| match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", p.display())),
        other => other,
    })
}
