use std::collections::BTreeSet;
use std::path::PathBuf;

use avqa_core::corpus::{read_jsonl, QuestionId, SplitName, Splits};
use avqa_core::eval::{category_stats, dataset_summary, why_crosstab, WhyRecord};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::load_groupings;
use crate::context::{require, require_file, say, Ctx};
use crate::error::{CliError, CliResult};

/// Dataset summary, ambiguity-category statistics and (optionally) the
/// why-question cross-tabulation.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsOpts {
    /// Groupings (JSONL).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSONL of {"ambiguous", "dynamic", "agentive"} records.
    #[arg(long)]
    pub why: Option<PathBuf>,
    /// Existing dev/test split (JSON {"dev": [..], "test": [..]}).
    #[arg(long)]
    pub splits: Option<PathBuf>,
    /// Draw a seeded dev/test split with this many dev examples.
    #[arg(long, conflicts_with = "splits")]
    pub dev_size: Option<usize>,
    /// Where to write the drawn split.
    #[arg(long, requires = "dev_size")]
    pub write_splits: Option<PathBuf>,
    /// How many top categories to list.
    #[arg(long)]
    pub top: Option<usize>,
}

pub fn run(ctx: &Ctx, cli: &StatsOpts) -> CliResult<()> {
    let mut o = ctx.resolve(cli, "stats")?;
    ctx.resolve_inputs(&mut [&mut o.input, &mut o.why, &mut o.splits]);
    o.top.get_or_insert(3);
    if o.dev_size.is_some() && o.splits.is_some() {
        return Err(CliError::usage("--dev-size and --splits are exclusive"));
    }
    let groupings = load_groupings(&require(o.input.clone(), "input")?)?;
    let summary = dataset_summary(&groupings);
    let cats = category_stats(&groupings);

    let ambiguous: BTreeSet<QuestionId> = groupings
        .iter()
        .filter(|g| g.ambiguous)
        .map(|g| g.question_id.clone())
        .collect();
    let splits = match (&o.splits, o.dev_size) {
        (Some(p), _) => {
            require_file(p)?;
            Some(Splits::load(p)?)
        }
        (None, Some(n)) => {
            let ids: Vec<QuestionId> = ambiguous.iter().cloned().collect();
            let s = Splits::random(&ids, n, ctx.seed)?;
            if let Some(w) = &o.write_splits {
                let text = serde_json::to_string_pretty(&s).expect("serializes") + "\n";
                std::fs::write(w, text)
                    .map_err(|e| CliError::Io(format!("{}: {e}", w.display())))?;
            }
            Some(s)
        }
        _ => None,
    };
    let split_counts = splits.as_ref().map(|s| {
        let count = |name| ambiguous.iter().filter(|q| s.contains(name, q)).count();
        json!({ "dev": count(SplitName::Dev), "test": count(SplitName::Test) })
    });

    let crosstab = match &o.why {
        None => None,
        Some(p) => {
            require_file(p)?;
            let recs: Vec<WhyRecord> = read_jsonl(p)?;
            Some(why_crosstab(&recs))
        }
    };

    let top = cats.top(o.top.unwrap());
    if ctx.csv {
        let rows: Vec<Vec<String>> = cats
            .frequency
            .iter()
            .map(|(l, n)| vec![l.to_string(), n.to_string()])
            .collect();
        ctx.emit_csv(&o, &["label", "examples"], &rows)?;
    } else {
        ctx.emit_json(
            &o,
            json!({
                "summary": summary,
                "top": top,
                "categories": {
                    "n_examples": cats.n_examples,
                    "frequency": cats.frequency,
                    "cooccurrence": cats.reported_pairs(),
                },
                "splits": split_counts,
                "why_crosstab": crosstab,
            }),
        )?;
    }
    say(format!(
        "{} ambiguous examples, {} rewritten questions, {:.2} answers per rewritten question; top: {}",
        summary.n_examples,
        summary.n_rewritten_questions,
        summary.mean_answers_per_question,
        top.iter()
            .map(|(l, n)| format!("{l} ({n})"))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    Ok(())
}
