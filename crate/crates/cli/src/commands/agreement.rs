use std::collections::BTreeMap;
use std::path::PathBuf;

use avqa_core::agreement::{agreement_report, cluster_f1_with, F1Aggregation, Prf};
use avqa_core::corpus::QuestionId;
use clap::Args;
use serde::{Deserialize, Serialize};

use super::load_groupings;
use crate::context::{kebab, pct, say, Ctx};
use crate::error::{CliError, CliResult};

/// Inter-annotator agreement over a pool of groupings, or cluster scores
/// of predicted groupings against gold.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgreementOpts {
    /// Groupings from several annotators (JSONL).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Gold groupings (JSONL), compared against --pred.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Predicted groupings (JSONL), matched to --gold by question id.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// macro-aligned | micro
    #[arg(long, value_parser = kebab::<F1Aggregation>)]
    pub aggregation: Option<F1Aggregation>,
}

#[derive(Serialize)]
struct PredScore {
    question_id: QuestionId,
    #[serde(flatten)]
    prf: Prf,
}

pub fn run(ctx: &Ctx, cli: &AgreementOpts) -> CliResult<()> {
    let mut o = ctx.resolve(cli, "agreement")?;
    o.aggregation.get_or_insert_default();
    ctx.resolve_inputs(&mut [&mut o.input, &mut o.gold, &mut o.pred]);
    match (&o.input, &o.gold, &o.pred) {
        (Some(input), None, None) => pool(ctx, &o, input.clone()),
        (None, Some(gold), Some(pred)) => versus(ctx, &o, gold.clone(), pred.clone()),
        _ => Err(CliError::usage(
            "give either --input, or --gold with --pred",
        )),
    }
}

fn pool(ctx: &Ctx, o: &AgreementOpts, input: PathBuf) -> CliResult<()> {
    let groupings = load_groupings(&input)?;
    let report = agreement_report(&groupings).map_err(CliError::invalid)?;
    if ctx.csv {
        let mut rows = Vec::new();
        let names = &report.annotators;
        let mut push = |metric: &str, s: &Option<avqa_core::agreement::PairwiseSummary>| {
            if let Some(s) = s {
                for p in &s.pairs {
                    rows.push(vec![
                        metric.to_owned(),
                        names[p.a].to_string(),
                        names[p.b].to_string(),
                        pct(p.value),
                    ]);
                }
            }
        };
        push("ambiguity", &Some(report.ambiguity.clone()));
        push("observed", &Some(report.observed.clone()));
        push("cluster_precision", &report.cluster_precision);
        push("cluster_recall", &report.cluster_recall);
        push("cluster_f1", &report.cluster_f1);
        ctx.emit_csv(o, &["metric", "annotator_a", "annotator_b", "value"], &rows)?;
    } else {
        ctx.emit_json(o, &report)?;
    }
    let f1 = report.cluster_f1.as_ref().map_or("n/a".to_owned(), |s| {
        format!("{:.1} (std {:.1})", s.mean, s.std)
    });
    say(format!(
        "{} annotators: ambiguity agreement {:.1}, observed {:.1}, cluster F1 {f1}",
        report.annotators.len(),
        report.ambiguity.mean,
        report.observed.mean
    ));
    Ok(())
}

fn versus(ctx: &Ctx, o: &AgreementOpts, gold: PathBuf, pred: PathBuf) -> CliResult<()> {
    let gold: BTreeMap<QuestionId, _> = load_groupings(&gold)?
        .into_iter()
        .filter(|g| g.ambiguous)
        .map(|g| (g.question_id.clone(), g))
        .collect();
    let pred = load_groupings(&pred)?;
    let agg = o.aggregation.unwrap_or_default();
    let mut scores = Vec::new();
    let mut unmatched = Vec::new();
    for p in &pred {
        match gold.get(&p.question_id) {
            Some(g) if p.ambiguous => {
                let prf = cluster_f1_with(&p.partition(), &g.partition(), agg)
                    .map_err(CliError::invalid)?;
                scores.push(PredScore {
                    question_id: p.question_id.clone(),
                    prf,
                });
            }
            _ => unmatched.push(p.question_id.clone()),
        }
    }
    if scores.is_empty() {
        return Err(CliError::invalid(
            "no predicted grouping matches an ambiguous gold grouping",
        ));
    }
    let n = scores.len() as f64;
    let mean = Prf {
        precision: scores.iter().map(|s| s.prf.precision).sum::<f64>() / n,
        recall: scores.iter().map(|s| s.prf.recall).sum::<f64>() / n,
        f1: scores.iter().map(|s| s.prf.f1).sum::<f64>() / n,
    };
    if ctx.csv {
        let rows: Vec<Vec<String>> = scores
            .iter()
            .map(|s| {
                vec![
                    s.question_id.to_string(),
                    pct(s.prf.precision),
                    pct(s.prf.recall),
                    pct(s.prf.f1),
                ]
            })
            .collect();
        ctx.emit_csv(o, &["question_id", "precision", "recall", "f1"], &rows)?;
    } else {
        ctx.emit_json(
            o,
            serde_json::json!({
                "mean": mean,
                "n_examples": scores.len(),
                "unmatched": unmatched,
                "per_example": scores,
            }),
        )?;
    }
    say(format!(
        "{} examples: P {:.1} R {:.1} F1 {:.1}",
        scores.len(),
        mean.precision,
        mean.recall,
        mean.f1
    ));
    Ok(())
}
