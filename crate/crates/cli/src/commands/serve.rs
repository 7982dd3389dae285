use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use avqa_core::corpus::Splits;
use avqa_service::{router, AppState, Store, StoreOptions, SystemClock, Tokens, DEFAULT_LEASE_TTL};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::load_examples;
use super::prioritize::read_queue;
use crate::context::{require, require_file, say, Ctx};
use crate::error::{CliError, CliResult};

/// Run the annotation backend.
///
/// Bearer tokens are read from the `[tokens]` table of --config, e.g.
/// `[tokens.s3cret] annotator = "a1"` (add `role = "vetter"` for authors).
/// Without tokens the server runs in open mode.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeOpts {
    #[arg(long)]
    pub examples: Option<PathBuf>,
    #[arg(long)]
    pub questions: Option<PathBuf>,
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Queue written by `prioritize`.
    #[arg(long)]
    pub queue: Option<PathBuf>,
    /// Append-only event log; created when missing.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub addr: Option<SocketAddr>,
    #[arg(long)]
    pub lease_ttl_secs: Option<u64>,
    /// Annotators per example.
    #[arg(long)]
    pub redundancy: Option<usize>,
    #[arg(long)]
    pub splits: Option<PathBuf>,
    /// Directory of UI assets served at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Load and validate everything, print the startup state, and exit.
    #[arg(long)]
    pub dry_run: bool,
}

fn tokens(ctx: &Ctx) -> CliResult<Tokens> {
    match ctx.config_table("tokens") {
        None => Ok(Tokens::new()),
        Some(v) => {
            let json = serde_json::to_value(v).expect("TOML converts to JSON");
            serde_json::from_value(json)
                .map_err(|e| CliError::invalid(format!("config [tokens]: {e}")))
        }
    }
}

pub fn run(ctx: &Ctx, cli: &ServeOpts) -> CliResult<()> {
    let mut o = ctx.resolve(cli, "serve")?;
    ctx.resolve_inputs(&mut [
        &mut o.examples,
        &mut o.questions,
        &mut o.annotations,
        &mut o.queue,
        &mut o.splits,
        &mut o.static_dir,
    ]);
    o.addr
        .get_or_insert(SocketAddr::from(([127, 0, 0, 1], 8080)));
    o.lease_ttl_secs.get_or_insert(DEFAULT_LEASE_TTL.as_secs());
    o.redundancy.get_or_insert(1);
    if o.redundancy == Some(0) || o.lease_ttl_secs == Some(0) {
        return Err(CliError::invalid(
            "--redundancy and --lease-ttl-secs must be positive",
        ));
    }

    let examples = load_examples(
        o.examples.as_deref(),
        o.questions.as_deref(),
        o.annotations.as_deref(),
    )?;
    let queue_path = require(o.queue.clone(), "queue")?;
    let queue = read_queue(&queue_path)?;
    let log = require(o.log.clone(), "log")?;
    let splits = match &o.splits {
        None => None,
        Some(p) => {
            require_file(p)?;
            Some(Splits::load(p)?)
        }
    };
    let tokens = tokens(ctx)?;
    let opts = StoreOptions {
        lease_ttl: Duration::from_secs(o.lease_ttl_secs.unwrap()),
        redundancy: o.redundancy.unwrap(),
        splits,
    };

    if o.dry_run {
        // read-only: the log is neither created nor appended to
        let mut store = Store::replay_with_queue(&log, examples, queue, opts)?;
        let stats = store.stats();
        ctx.emit_json(&o, json!({ "tokens": tokens.len(), "stats": stats }))?;
        say(format!(
            "dry run: {} queue items, {} events replayed",
            stats.queue.items, stats.events
        ));
        return Ok(());
    }

    let store = Store::open(&log, examples, queue, opts, Arc::new(SystemClock))?;
    let n_tokens = tokens.len();
    let app = router(AppState::new(store, tokens), o.static_dir.clone());
    let addr = o.addr.unwrap();
    say(format!(
        "listening on http://{addr} ({})",
        if n_tokens == 0 {
            "open mode".to_owned()
        } else {
            format!("{n_tokens} tokens")
        }
    ));
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(format!("runtime: {e}")))?;
    rt.block_on(avqa_service::serve(addr, app))
        .map_err(|e| CliError::Io(format!("{addr}: {e}")))
}
