//! HTTP/JSON facade over `rws_core`: phase-1 generation jobs, phase-2
//! planning sessions with live diagnostics, solving and CSV export.

pub mod config;
pub mod error;
pub mod routes;
pub mod state;

pub use config::Config;
pub use error::ApiError;
pub use routes::router;
pub use state::AppState;

/// Router over a fresh in-memory state.
pub fn app(config: Config) -> axum::Router {
    router(AppState::new(config))
}
