//! `avqa`: clustering, evaluation, decoding and annotation-serving tools for
//! answer-grouped VQA data.
//!
//! Exit status: 0 success, 1 invalid data, 2 I/O failure, 64 bad usage.

mod commands;
mod context;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::commands::*;
use crate::context::Ctx;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "avqa", version, about = "Answer-grouped VQA toolkit")]
struct Cli {
    /// TOML config; `[<command>]` sections supply defaults for each
    /// subcommand, flags override them.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice (default 0, or `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Emit CSV instead of JSON where the command supports it.
    #[arg(long, global = true)]
    csv: bool,
    /// Write the result here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Prioritize(prioritize::PrioritizeOpts),
    Agreement(agreement::AgreementOpts),
    EvalClusters(eval_clusters::EvalClustersOpts),
    Metrics(metrics::MetricsOpts),
    Stats(stats::StatsOpts),
    Decode(decode::DecodeOpts),
    Serve(serve::ServeOpts),
    Export(export::ExportOpts),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Prioritize(_) => "prioritize",
            Command::Agreement(_) => "agreement",
            Command::EvalClusters(_) => "eval-clusters",
            Command::Metrics(_) => "metrics",
            Command::Stats(_) => "stats",
            Command::Decode(_) => "decode",
            Command::Serve(_) => "serve",
            Command::Export(_) => "export",
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let ctx = Ctx::new(
        cli.command.name(),
        cli.config.as_deref(),
        cli.seed,
        cli.csv,
        cli.output,
    )?;
    let jobs = match cli.jobs {
        Some(0) => return Err(CliError::usage("--jobs must be positive")),
        Some(j) => Some(j),
        None => ctx.config_jobs()?,
    };
    if let Some(j) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::invalid(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Prioritize(o) => prioritize::run(&ctx, o),
        Command::Agreement(o) => agreement::run(&ctx, o),
        Command::EvalClusters(o) => eval_clusters::run(&ctx, o),
        Command::Metrics(o) => metrics::run(&ctx, o),
        Command::Stats(o) => stats::run(&ctx, o),
        Command::Decode(o) => decode::run(&ctx, o),
        Command::Serve(o) => serve::run(&ctx, o),
        Command::Export(o) => export::run(&ctx, o),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
