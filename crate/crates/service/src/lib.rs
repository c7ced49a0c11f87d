//! Network face of a running executive, for the operator console.
//!
//! One thread owns the [`Executive`](benthic::executive::Executive) and ticks
//! it; the HTTP handlers only read published snapshots and post commands.

mod api;
mod runner;
mod snapshot;

use std::net::SocketAddr;

pub use api::router;
pub use runner::{spawn, Handle, RunnerConfig, RunnerGone};
pub use snapshot::{Snapshot, StateView};
use thiserror::Error;
use tokio::net::TcpListener;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    BindFailure { addr: SocketAddr, source: std::io::Error },
    #[error("server failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Binds `addr`. Split from [`serve`] so callers learn the port before
/// the server starts accepting.
pub async fn bind(addr: SocketAddr) -> Result<TcpListener, ServeError> {
    TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::BindFailure { addr, source })
}

/// Serves the API until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    handle: Handle,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    axum::serve(listener, router(handle))
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}
