use std::path::{Path, PathBuf};

use avqa_core::clustering::{prioritize, InitStrategy, PrioritizeConfig, PriorityItem, SortPolicy};
use avqa_core::embeddings::load_embedding_table;
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::load_examples;
use crate::context::{kebab, read_text, require, require_file, say, Ctx};
use crate::error::{CliError, CliResult};

/// Cluster every example's answers and rank the examples for annotation.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrioritizeOpts {
    /// JSONL file of examples.
    #[arg(long)]
    pub examples: Option<PathBuf>,
    /// VQAv2 questions JSON (with --annotations).
    #[arg(long)]
    pub questions: Option<PathBuf>,
    /// VQAv2 annotations JSON (with --questions).
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Word vectors, one `word v1 v2 ...` per line.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Expected vector dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Per-cluster penalty; derived from the data when omitted.
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// score-then-balance | balance-then-score
    #[arg(long, value_parser = kebab::<SortPolicy>)]
    pub sort: Option<SortPolicy>,
    /// random-distinct | plus-plus
    #[arg(long, value_parser = kebab::<InitStrategy>)]
    pub init: Option<InitStrategy>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

impl PrioritizeOpts {
    fn fill_defaults(mut self) -> Self {
        let d = PrioritizeConfig::default();
        self.k_max.get_or_insert(d.k_max);
        self.restarts.get_or_insert(d.restarts);
        self.sort.get_or_insert(d.sort);
        self.init.get_or_insert(d.init);
        self.max_iter.get_or_insert(d.max_iter);
        self
    }
}

pub fn run(ctx: &Ctx, cli: &PrioritizeOpts) -> CliResult<()> {
    let mut o = ctx.resolve(cli, "prioritize")?.fill_defaults();
    ctx.resolve_inputs(&mut [
        &mut o.examples,
        &mut o.questions,
        &mut o.annotations,
        &mut o.embeddings,
    ]);
    let examples = load_examples(
        o.examples.as_deref(),
        o.questions.as_deref(),
        o.annotations.as_deref(),
    )?;
    let emb_path = require(o.embeddings.clone(), "embeddings")?;
    require_file(&emb_path)?;
    let table = load_embedding_table(&emb_path, o.dim)?;
    let config = PrioritizeConfig {
        penalty: o.penalty,
        k_max: o.k_max.unwrap(),
        restarts: o.restarts.unwrap(),
        seed: ctx.seed,
        sort: o.sort.unwrap(),
        init: o.init.unwrap(),
        max_iter: o.max_iter.unwrap(),
    };
    if config.k_max == 0 || config.restarts == 0 {
        return Err(CliError::invalid("--k-max and --restarts must be positive"));
    }
    let queue = prioritize(&examples, &table, &config);

    let mut text = serde_json::to_string(&json!({
        "header": ctx.header(&o),
        "report": queue.report,
    }))
    .expect("serializes");
    text.push('\n');
    for item in &queue.items {
        text.push_str(&serde_json::to_string(item).expect("serializes"));
        text.push('\n');
    }
    ctx.emit(&text)?;
    let r = &queue.report;
    say(format!(
        "queued {} of {} examples ({} yes/no dropped, {} quarantined); penalty {:.6}",
        r.n_queued,
        r.n_input,
        r.yes_no_dropped.len(),
        r.quarantined.len(),
        r.penalty
    ));
    Ok(())
}

/// Reads a queue written by `prioritize`, skipping its header line.
pub fn read_queue(path: &Path) -> CliResult<Vec<PriorityItem>> {
    let text = read_text(path)?;
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line)
            .map_err(|e| CliError::invalid(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if v.get("header").is_some() {
            continue;
        }
        items.push(
            serde_json::from_value(v)
                .map_err(|e| CliError::invalid(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(items)
}
