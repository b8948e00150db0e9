//! Core primitives for correlation-filter training, detection, and tracking.
//!
//! The crate is organised around a single pipeline: real 2D [`signal`]s are
//! preprocessed and transformed into [`spectral`] quantities, [`solvers`]
//! turn accumulated spectral energies into filters (closed-form ridge
//! solutions, exact spatial oracles, and a boundary-aware ADMM), [`detect`]
//! applies a trained filter to produce response maps and confidence scores,
//! and [`track`] wires the pieces into an online tracker with exponential
//! model adaptation.
//!
//! Everything here is `no_std` + `alloc`; wall-clock time enters only
//! through the [`clock::Clock`] trait so hosts decide how iterations are
//! timed. File formats, CLI, and benchmark harnesses live in the companion
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod clock;
pub mod detect;
pub mod error;
mod fft;
pub mod signal;
pub mod solvers;
pub mod spectral;
pub mod track;

pub use error::{Error, Result};
