//! HTTP/JSON portal for the Clio-X data space.
//!
//! Exposes publish, discovery, consent, purchase, compute and audit over
//! plain JSON routes. Identities are held server-side and unlocked with an
//! access key; every protected route takes a bearer session token. Jobs run
//! on blocking worker threads behind a semaphore, so status polling never
//! waits on a computation.

pub mod config;
pub mod error;
pub mod routes;
pub mod state;

use std::sync::Arc;

pub use config::PortalConfig;
pub use error::{ApiError, ErrorBody};
pub use routes::router;
pub use state::{AppState, SharedState, StartupError};

/// Serve the API on `listener` until the task is dropped.
pub async fn serve(state: SharedState, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

/// Build state from `config` using the system clock.
pub fn state_from_config(config: PortalConfig) -> Result<SharedState, StartupError> {
    Ok(Arc::new(AppState::new(config, Arc::new(cliox_core::SystemClock))?))
}
