//! Annotation backend.
//!
//! Examples are served from a priority queue under time-limited leases;
//! submissions, skips and vetting edits go to an append-only JSONL event
//! log that is replayed on startup. Agreement and export are computed from
//! the log on demand.

mod http;
pub mod store;

use std::net::SocketAddr;

pub use http::{router, AppState, Identity, Role, Tokens};
pub use store::{
    Clock, Event, EventPayload, Export, ExportFilter, Lease, LeasedExample, LiveAgreement,
    ManualClock, NextExample, Stats, Store, StoreError, StoreOptions, SystemClock,
    DEFAULT_LEASE_TTL, DEFAULT_SKIP_REASON,
};

/// Serves `app` until ctrl-c.
pub async fn serve(addr: SocketAddr, app: axum::Router) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
