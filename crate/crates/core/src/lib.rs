//! Conformal prediction intervals for bipartite (drug × protein) interaction
//! regression.
//!
//! The crate implements five split-conformal calibration methods over a
//! shared interaction-table data model:
//!
//! * marginal calibration (one global quantile),
//! * group-conditioned calibration (per-drug / per-protein Mondrian
//!   categories with a fallback ladder),
//! * three cluster-conditioned variants — clustering on nonconformity-score
//!   distributions, clustering on input features, and per-test
//!   nearest-neighbor calibration sets,
//!
//! plus the four splitting strategies used to benchmark them (random,
//! cold-drug, cold-protein, double-cold), a minimal gradient-boosting point
//! predictor, validity/efficiency metrics with subgroup coverage gaps, a
//! (γ, cluster-count) grid-search tuner, a synthetic data generator, and an
//! experiment harness.
//!
//! All seeded randomness flows through `ChaCha8Rng`, so every split, model,
//! and emitted file is reproducible bit-for-bit from a config and a seed.
//! Per-row and per-grid-cell work is data-parallel via rayon when the
//! `parallel` feature (default) is enabled; disabling it produces identical
//! output sequentially.

pub mod calibration;
pub mod ccp;
pub mod clustering;
pub mod conformal;
pub mod data;
pub mod error;
pub mod exec;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod predictor;
mod rngutil;
pub mod splits;
pub mod synth;
pub mod transform;
pub mod tune;

pub use error::{Error, Result};
