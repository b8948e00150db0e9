//! Command-line companion to the correlation-filter core: dataset
//! generation, filter training, model persistence, and the localization /
//! convergence / tracking benchmark harnesses.
//!
//! The binary (`corrfilt`) is a thin wrapper over [`app::main_entry`];
//! everything else lives in library modules so integration tests can drive
//! the exact production paths in-process.

pub mod app;
pub mod config;
pub mod errors;
pub mod formats;
pub mod harness;
pub mod report;
pub mod synth;
pub mod timing;
