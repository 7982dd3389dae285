use std::path::PathBuf;

use avqa_core::corpus::{SplitName, Splits};
use avqa_service::{ExportFilter, Store, StoreOptions};
use clap::Args;
use serde::{Deserialize, Serialize};

use super::load_examples;
use crate::context::{kebab, require, require_file, say, Ctx};
use crate::error::CliResult;

/// Replay an annotation event log and write the dataset as JSONL.
///
/// The records go to --output (or stdout) and load directly into `stats`
/// and `agreement`; the summary is printed on stderr.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportOpts {
    /// Event log written by `serve`.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub examples: Option<PathBuf>,
    #[arg(long)]
    pub questions: Option<PathBuf>,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Export the vetted version of each record, dropping unvetted ones.
    #[arg(long)]
    pub vetted_only: bool,
    /// dev | test (needs --splits)
    #[arg(long, value_parser = kebab::<SplitName>)]
    pub split: Option<SplitName>,
    #[arg(long)]
    pub splits: Option<PathBuf>,
}

pub fn run(ctx: &Ctx, cli: &ExportOpts) -> CliResult<()> {
    let mut o = ctx.resolve(cli, "export")?;
    ctx.resolve_inputs(&mut [
        &mut o.log,
        &mut o.examples,
        &mut o.questions,
        &mut o.annotations,
        &mut o.splits,
    ]);
    let log = require(o.log.clone(), "log")?;
    require_file(&log)?;
    let examples = load_examples(
        o.examples.as_deref(),
        o.questions.as_deref(),
        o.annotations.as_deref(),
    )?;
    let splits = match &o.splits {
        None => None,
        Some(p) => {
            require_file(p)?;
            Some(Splits::load(p)?)
        }
    };
    let store = Store::replay(
        &log,
        examples,
        StoreOptions {
            splits,
            ..StoreOptions::default()
        },
    )?;
    let export = store.export(ExportFilter {
        vetted_only: o.vetted_only,
        split: o.split,
    })?;
    ctx.emit(&export.to_jsonl())?;
    let s = &export.summary;
    say(format!(
        "{} records, {} ambiguous examples, {} rewritten questions, {:.2} answers per rewritten question",
        export.groupings.len(),
        s.n_examples,
        s.n_rewritten_questions,
        s.mean_answers_per_question
    ));
    Ok(())
}
