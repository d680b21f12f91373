//! HTTP API and command-line front end for `shortlist-core`.

pub mod api;
pub mod cli;

pub use api::{app, ApiError, AppConfig, AppState};
