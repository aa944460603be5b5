//! Multiuser detection for uplink code-domain NOMA.
//!
//! The crate covers codebook handling, SIMO / spatial-multiplexing /
//! spatial-modulation system models, a sharing-ADMM box-relaxed detector,
//! baseline detectors (MMSE, exhaustive ML, MPA), a FLOP accounting model,
//! and a seeded Monte Carlo SER harness.

pub mod admm;
pub mod baseline;
pub mod codebook;
pub mod complexity;
pub mod config;
pub mod detection;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod sysmodel;

pub use error::{Error, Result, Violation};
