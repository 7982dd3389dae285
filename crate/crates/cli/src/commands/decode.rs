use std::path::PathBuf;

use avqa_core::decode::{
    compile_constraints, constrained_beam_search, extract_noun_spans, parse_pos_file, satisfies,
    ConstraintSet, DecodeError, NgramScorer, ProcessScorer, TokenId, TokenScorer, Vocab,
    DEFAULT_BEAM, EOS,
};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::context::{read_text, require_file, say, Ctx};
use crate::error::{CliError, CliResult};

/// Lexically constrained beam search.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeOpts {
    /// N-gram counts file (`tok1 .. tokN<TAB>count` per line).
    #[arg(long)]
    pub scorer: Option<PathBuf>,
    /// Train an n-gram scorer on this text file (one sentence per line).
    #[arg(long, conflicts_with = "scorer")]
    pub train: Option<PathBuf>,
    /// N-gram order for --train.
    #[arg(long)]
    pub order: Option<usize>,
    /// External scorer command speaking the JSON-lines protocol.
    #[arg(long, conflicts_with_all = ["scorer", "train"])]
    pub process: Option<String>,
    /// Arguments for --process, repeatable.
    #[arg(long = "process-arg", allow_hyphen_values = true)]
    pub process_args: Vec<String>,
    /// Vocabulary for --process, one token per line in id order.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Alternatives of one disjunctive constraint; repeatable.
    #[arg(long = "constraints")]
    pub constraints: Vec<String>,
    /// Phrases that must all appear (one set each); repeatable.
    #[arg(long = "require")]
    pub require: Vec<String>,
    /// Token<TAB>tag file; decodes once per sentence, constrained to
    /// contain one of its noun spans.
    #[arg(long)]
    pub pos: Option<PathBuf>,
    #[arg(long)]
    pub beam: Option<usize>,
    /// Output length limit, counting the end token.
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(Serialize)]
struct Output {
    #[serde(skip_serializing_if = "Option::is_none")]
    sentence: Option<String>,
    constraints: Vec<Vec<String>>,
    dropped: Vec<String>,
    text: String,
    tokens: Vec<TokenId>,
    log_score: f64,
    finished: bool,
    /// Independent check that every constraint set occurs in the output.
    satisfied: bool,
    /// Set when no hypothesis could complete; `text` is then the best
    /// partial.
    exhausted: bool,
}

pub fn run(ctx: &Ctx, cli: &DecodeOpts) -> CliResult<()> {
    let mut o = ctx.resolve(cli, "decode")?;
    ctx.resolve_inputs(&mut [&mut o.scorer, &mut o.train, &mut o.vocab, &mut o.pos]);
    o.beam.get_or_insert(DEFAULT_BEAM);
    o.max_len.get_or_insert(20);
    if o.beam == Some(0) || o.max_len == Some(0) {
        return Err(CliError::invalid("--beam and --max-len must be positive"));
    }

    let (scorer, vocab): (Box<dyn TokenScorer>, Vocab) = if let Some(p) = &o.scorer {
        require_file(p)?;
        let s = NgramScorer::from_counts_file(p)?;
        let v = s.vocab().clone();
        (Box::new(s), v)
    } else if let Some(p) = &o.train {
        let order = *o.order.get_or_insert(2);
        let sentences: Vec<Vec<String>> = read_text(p)?
            .lines()
            .map(|l| l.split_whitespace().map(str::to_owned).collect::<Vec<_>>())
            .filter(|l| !l.is_empty())
            .collect();
        let s = NgramScorer::train(&sentences, order)?;
        let v = s.vocab().clone();
        (Box::new(s), v)
    } else if let Some(cmd) = &o.process {
        let vp = o
            .vocab
            .clone()
            .ok_or_else(|| CliError::usage("--process needs --vocab"))?;
        let tokens: Vec<String> = read_text(&vp)?.lines().map(str::to_owned).collect();
        let v = Vocab::new(tokens)?;
        let end = v
            .id(EOS)
            .ok_or_else(|| CliError::invalid(format!("vocabulary has no {EOS} token")))?;
        (
            Box::new(ProcessScorer::spawn(cmd, &o.process_args, v.len(), end)?),
            v,
        )
    } else {
        return Err(CliError::usage(
            "give one of --scorer, --train or --process",
        ));
    };

    let encode = |phrase: &str| -> Option<Vec<TokenId>> {
        let toks: Vec<&str> = phrase.split_whitespace().collect();
        if toks.is_empty() {
            None
        } else {
            vocab.encode(&toks)
        }
    };
    let beam = o.beam.unwrap();
    let max_len = o.max_len.unwrap();
    let search = |sets: Vec<ConstraintSet>,
                  dropped: Vec<String>,
                  sentence: Option<String>|
     -> CliResult<Output> {
        let shown: Vec<Vec<String>> = sets
            .iter()
            .map(|s| {
                s.alternatives()
                    .iter()
                    .map(|a| vocab.decode(a).join(" "))
                    .collect()
            })
            .collect();
        let (r, exhausted) = match constrained_beam_search(&*scorer, &sets, beam, max_len) {
            Ok(r) => (r, false),
            Err(DecodeError::SearchExhausted { best }) => {
                let h = *best;
                (
                    avqa_core::decode::DecodeResult {
                        tokens: h.tokens,
                        log_score: h.log_score,
                        finished: false,
                        bank: h.bank,
                    },
                    true,
                )
            }
            Err(e) => return Err(e.into()),
        };
        Ok(Output {
            sentence,
            constraints: shown,
            dropped,
            text: vocab.decode(&r.tokens).join(" "),
            satisfied: satisfies(&r.tokens, &sets),
            tokens: r.tokens,
            log_score: r.log_score,
            finished: r.finished,
            exhausted,
        })
    };

    let mut outputs = Vec::new();
    if let Some(p) = &o.pos {
        if !o.constraints.is_empty() || !o.require.is_empty() {
            return Err(CliError::usage(
                "--pos cannot be combined with --constraints/--require",
            ));
        }
        for sent in parse_pos_file(&read_text(p)?)? {
            let spans = extract_noun_spans(&sent.tokens, &sent.tags)?;
            let compiled = compile_constraints(&spans, encode);
            outputs.push(search(
                compiled.sets,
                compiled.dropped,
                Some(sent.tokens.join(" ")),
            )?);
        }
    } else {
        let mut sets = Vec::new();
        let mut dropped = Vec::new();
        let mut alts = Vec::new();
        for c in &o.constraints {
            match encode(c) {
                Some(ids) => alts.push(ids),
                None => dropped.push(c.clone()),
            }
        }
        if !o.constraints.is_empty() {
            if alts.is_empty() {
                return Err(CliError::invalid(format!(
                    "no constraint alternative is in the scorer vocabulary: {dropped:?}"
                )));
            }
            sets.push(ConstraintSet::new(alts)?);
        }
        for r in &o.require {
            let ids = encode(r).ok_or_else(|| {
                CliError::invalid(format!(
                    "required phrase {r:?} is not in the scorer vocabulary"
                ))
            })?;
            sets.push(ConstraintSet::new(vec![ids])?);
        }
        outputs.push(search(sets, dropped, None)?);
    }

    if ctx.csv {
        let rows: Vec<Vec<String>> = outputs
            .iter()
            .map(|x| {
                vec![
                    x.sentence.clone().unwrap_or_default(),
                    x.text.clone(),
                    format!("{:.6}", x.log_score),
                    x.finished.to_string(),
                    x.satisfied.to_string(),
                ]
            })
            .collect();
        ctx.emit_csv(
            &o,
            &["sentence", "output", "log_score", "finished", "satisfied"],
            &rows,
        )?;
    } else {
        let outs: Vec<Value> = outputs.iter().map(|x| json!(x)).collect();
        ctx.emit_json(&o, json!({ "outputs": outs }))?;
    }
    for x in &outputs {
        say(format!(
            "{} [{:.4}{}{}]",
            x.text,
            x.log_score,
            if x.finished { "" } else { ", unfinished" },
            if x.satisfied {
                ""
            } else {
                ", constraints unmet"
            }
        ));
    }
    Ok(())
}
