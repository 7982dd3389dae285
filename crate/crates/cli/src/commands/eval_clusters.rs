use std::path::PathBuf;

use avqa_core::agreement::F1Aggregation;
use avqa_core::clustering::KMeansOptions;
use avqa_core::embeddings::load_embedding_table;
use avqa_core::eval::{
    evaluate_clustering, evaluate_random_seeds, load_representations, EvalOptions, Method,
    MethodRow, Weighting,
};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::load_groupings;
use crate::context::{kebab, pct, require, require_file, say, Ctx};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Random,
    PerfectPrecision,
    PerfectRecall,
    GloveInitial,
    /// k-means over each --repr manifest.
    Representations,
}

/// Score clustering methods against gold answer groups.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalClustersOpts {
    /// Gold groupings (JSONL).
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Repeatable. Defaults to the three baselines, plus glove-initial when
    /// --embeddings is given and representations when --repr is.
    #[arg(long = "method", value_enum)]
    pub methods: Vec<MethodName>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Representation manifests (JSON), repeatable.
    #[arg(long)]
    pub repr: Vec<PathBuf>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// GloVe-initial penalty; derived from the data when omitted.
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// macro-aligned | micro
    #[arg(long, value_parser = kebab::<F1Aggregation>)]
    pub aggregation: Option<F1Aggregation>,
    /// equal | answer-count
    #[arg(long, value_parser = kebab::<Weighting>)]
    pub weighting: Option<Weighting>,
    /// Average the random baseline over this many consecutive seeds,
    /// starting at --seed.
    #[arg(long)]
    pub random_seeds: Option<usize>,
    /// Include per-example scores in the JSON output.
    #[arg(long)]
    pub per_example: bool,
}

pub fn run(ctx: &Ctx, cli: &EvalClustersOpts) -> CliResult<()> {
    let mut o = ctx.resolve(cli, "eval_clusters")?;
    ctx.resolve_inputs(&mut [&mut o.gold, &mut o.embeddings]);
    o.repr = o.repr.iter().map(|p| ctx.input(p)).collect();
    if o.methods.is_empty() {
        o.methods = vec![
            MethodName::Random,
            MethodName::PerfectPrecision,
            MethodName::PerfectRecall,
        ];
        if o.embeddings.is_some() {
            o.methods.push(MethodName::GloveInitial);
        }
        if !o.repr.is_empty() {
            o.methods.push(MethodName::Representations);
        }
    }
    o.k_max.get_or_insert(5);
    o.restarts.get_or_insert(10);
    o.aggregation.get_or_insert_default();
    o.weighting.get_or_insert_default();
    o.random_seeds.get_or_insert(1);

    let gold = load_groupings(&require(o.gold.clone(), "gold")?)?;
    let opts = EvalOptions {
        aggregation: o.aggregation.unwrap(),
        weighting: o.weighting.unwrap(),
    };
    let kmeans = KMeansOptions::seeded(o.restarts.unwrap(), ctx.seed);
    if o.restarts == Some(0) || o.k_max == Some(0) || o.random_seeds == Some(0) {
        return Err(CliError::invalid(
            "--restarts, --k-max and --random-seeds must be positive",
        ));
    }

    let mut rows: Vec<MethodRow> = Vec::new();
    let mut sweep = None;
    for m in &o.methods {
        match m {
            MethodName::Random => {
                let n = o.random_seeds.unwrap() as u64;
                let seeds: Vec<u64> = (ctx.seed..ctx.seed + n).collect();
                let mut row =
                    evaluate_clustering(&Method::Random { seed: ctx.seed }, &gold, &opts)?;
                if n > 1 {
                    let s = evaluate_random_seeds(&gold, &seeds, &opts)?;
                    row.precision = s.precision;
                    row.recall = s.recall;
                    row.f1 = s.f1;
                    row.per_example.clear();
                    sweep = Some(s);
                }
                rows.push(row);
            }
            MethodName::PerfectPrecision => rows.push(evaluate_clustering(
                &Method::PerfectPrecision,
                &gold,
                &opts,
            )?),
            MethodName::PerfectRecall => {
                rows.push(evaluate_clustering(&Method::PerfectRecall, &gold, &opts)?)
            }
            MethodName::GloveInitial => {
                let path = require(o.embeddings.clone(), "embeddings")?;
                require_file(&path)?;
                let table = load_embedding_table(&path, o.dim)?;
                let method = Method::GloveInitial {
                    table: &table,
                    k_max: o.k_max.unwrap(),
                    penalty: o.penalty,
                    kmeans,
                };
                rows.push(evaluate_clustering(&method, &gold, &opts)?);
            }
            MethodName::Representations => {
                if o.repr.is_empty() {
                    return Err(CliError::usage("--method representations needs --repr"));
                }
                for p in &o.repr {
                    require_file(p)?;
                    let reprs = load_representations(p)?;
                    let method = Method::Representations {
                        reprs: &reprs,
                        kmeans,
                    };
                    rows.push(evaluate_clustering(&method, &gold, &opts)?);
                }
            }
        }
    }
    if !o.per_example {
        for r in &mut rows {
            r.per_example.clear();
        }
    }

    if ctx.csv {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.method.clone(),
                    pct(r.precision),
                    pct(r.recall),
                    pct(r.f1),
                    r.n_examples.to_string(),
                ]
            })
            .collect();
        ctx.emit_csv(
            &o,
            &["method", "precision", "recall", "f1", "n_examples"],
            &table,
        )?;
    } else {
        ctx.emit_json(&o, json!({ "rows": rows, "random_sweep": sweep }))?;
    }
    for r in &rows {
        say(format!(
            "{:<16} P {:>5.1}  R {:>5.1}  F1 {:>5.1}  (n={}, skipped {})",
            r.method,
            r.precision,
            r.recall,
            r.f1,
            r.n_examples,
            r.skipped.len()
        ));
    }
    Ok(())
}
