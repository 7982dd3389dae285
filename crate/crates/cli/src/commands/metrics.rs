use std::collections::BTreeMap;
use std::path::PathBuf;

use avqa_core::corpus::read_jsonl;
use avqa_core::eval::{
    acceptability_report, bleu, cider, corpus_bleu, rouge_l, tokenize, AcceptabilityRecord,
    BootstrapOptions, Smoothing,
};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::context::{pct, require_file, say, Ctx};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothingName {
    None,
    AddOne,
}

/// Text-generation metrics for rewritten questions and acceptability
/// statistics for human judgements.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsOpts {
    /// JSONL of {"source", "id", "candidate", "references": [..]}; one
    /// output row per source.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSONL of {"source", "actual_ok", "distractor_ok"}.
    #[arg(long)]
    pub acceptability: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub smoothing: Option<SmoothingName>,
    #[arg(long)]
    pub max_n: Option<usize>,
    #[arg(long)]
    pub resamples: Option<usize>,
    /// Confidence level of bootstrap intervals.
    #[arg(long)]
    pub level: Option<f64>,
    /// Include per-item scores in the JSON output.
    #[arg(long)]
    pub per_item: bool,
}

#[derive(Debug, Deserialize)]
struct GenRecord {
    #[serde(default)]
    source: String,
    #[serde(default)]
    id: String,
    candidate: String,
    references: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ItemScore {
    id: String,
    bleu: f64,
    rouge_l: f64,
    cider: f64,
}

#[derive(Debug, Serialize)]
struct SourceRow {
    source: String,
    n: usize,
    corpus_bleu: f64,
    mean_sentence_bleu: f64,
    rouge_l: f64,
    cider: f64,
    /// CIDEr IDF weights are all zero for a one-item corpus.
    cider_degenerate: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    items: Vec<ItemScore>,
}

pub fn run(ctx: &Ctx, cli: &MetricsOpts) -> CliResult<()> {
    let mut o = ctx.resolve(cli, "metrics")?;
    ctx.resolve_inputs(&mut [&mut o.input, &mut o.acceptability]);
    o.smoothing.get_or_insert(SmoothingName::None);
    o.max_n.get_or_insert(4);
    o.resamples
        .get_or_insert(BootstrapOptions::default().resamples);
    o.level.get_or_insert(BootstrapOptions::default().level);
    if o.input.is_none() && o.acceptability.is_none() {
        return Err(CliError::usage("give --input, --acceptability, or both"));
    }
    let smoothing = match o.smoothing.unwrap() {
        SmoothingName::None => Smoothing::None,
        SmoothingName::AddOne => Smoothing::AddOne,
    };
    let max_n = o.max_n.unwrap();

    let mut rows = Vec::new();
    if let Some(p) = &o.input {
        require_file(p)?;
        let records: Vec<GenRecord> = read_jsonl(p)?;
        let mut by_source: BTreeMap<&str, Vec<&GenRecord>> = BTreeMap::new();
        for r in &records {
            if r.references.is_empty() {
                return Err(CliError::invalid(format!(
                    "item {:?} has no references",
                    r.id
                )));
            }
            by_source.entry(&r.source).or_default().push(r);
        }
        for (source, recs) in by_source {
            let cands: Vec<Vec<String>> = recs.iter().map(|r| tokenize(&r.candidate)).collect();
            let refs: Vec<Vec<Vec<String>>> = recs
                .iter()
                .map(|r| r.references.iter().map(|s| tokenize(s)).collect())
                .collect();
            let cb = corpus_bleu(&cands, &refs, max_n, smoothing)?;
            let ci = cider(&cands, &refs)?;
            let mut items = Vec::with_capacity(recs.len());
            for (i, r) in recs.iter().enumerate() {
                let b = bleu(&cands[i], &refs[i], max_n, smoothing)?.score;
                // multi-reference ROUGE-L: best precision and best recall
                // over the references, combined with beta = 1
                let (p_max, r_max) = refs[i].iter().fold((0.0f64, 0.0f64), |(p, rc), rf| {
                    let s = rouge_l(&cands[i], rf);
                    (p.max(s.precision), rc.max(s.recall))
                });
                let rl = if p_max + r_max == 0.0 {
                    0.0
                } else {
                    2.0 * p_max * r_max / (p_max + r_max)
                };
                items.push(ItemScore {
                    id: r.id.clone(),
                    bleu: b,
                    rouge_l: rl,
                    cider: ci.per_item[i],
                });
            }
            let n = items.len() as f64;
            rows.push(SourceRow {
                source: source.to_owned(),
                n: items.len(),
                corpus_bleu: cb.score,
                mean_sentence_bleu: items.iter().map(|x| x.bleu).sum::<f64>() / n,
                rouge_l: items.iter().map(|x| x.rouge_l).sum::<f64>() / n,
                cider: ci.mean,
                cider_degenerate: ci.degenerate_idf,
                items: if o.per_item { items } else { Vec::new() },
            });
        }
    }

    let mut acceptability = None;
    if let Some(p) = &o.acceptability {
        require_file(p)?;
        let records: Vec<AcceptabilityRecord> = read_jsonl(p)?;
        let opts = BootstrapOptions {
            resamples: o.resamples.unwrap(),
            level: o.level.unwrap(),
            seed: ctx.seed,
        };
        acceptability = Some(acceptability_report(&records, &opts)?);
    }

    if ctx.csv {
        let mut table = Vec::new();
        for r in &rows {
            table.push(vec![
                "generation".into(),
                r.source.clone(),
                r.n.to_string(),
                format!("{:.4}", r.corpus_bleu),
                format!("{:.4}", r.rouge_l),
                format!("{:.4}", r.cider),
                String::new(),
                String::new(),
            ]);
        }
        for a in acceptability.iter().flatten() {
            table.push(vec![
                "acceptability".into(),
                a.source.clone(),
                a.n.to_string(),
                String::new(),
                String::new(),
                String::new(),
                pct(100.0 * a.actual_rate),
                format!("{:.4}", a.mcnemar.p_value),
            ]);
        }
        ctx.emit_csv(
            &o,
            &[
                "kind",
                "source",
                "n",
                "bleu",
                "rouge_l",
                "cider",
                "actual_pct",
                "mcnemar_p",
            ],
            &table,
        )?;
    } else {
        ctx.emit_json(
            &o,
            json!({ "generation": rows, "acceptability": acceptability }),
        )?;
    }
    for r in &rows {
        say(format!(
            "{:<12} n={} BLEU-{max_n} {:.4} ROUGE-L {:.4} CIDEr {:.4}",
            if r.source.is_empty() {
                "(all)"
            } else {
                &r.source
            },
            r.n,
            r.corpus_bleu,
            r.rouge_l,
            r.cider
        ));
    }
    for a in acceptability.iter().flatten() {
        say(format!(
            "{:<12} n={} actual {:.1}% [{:.1}, {:.1}] distractor {:.1}% McNemar p={:.4}",
            a.source,
            a.n,
            100.0 * a.actual_rate,
            100.0 * a.actual_ci.0,
            100.0 * a.actual_ci.1,
            100.0 * a.distractor_rate,
            a.mcnemar.p_value
        ));
    }
    Ok(())
}
