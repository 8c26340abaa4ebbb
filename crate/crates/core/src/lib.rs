//! Cost-sharing mechanisms for public excludable goods.
//!
//! The crate is organised around a handful of layers:
//!
//! - [`cost`] and [`types`]: cost functions, bid vectors, outcomes.
//! - [`mechanisms`]: VCG, Shapley, Potential, Optimal Sybil-Proof and Hybrid
//!   cost-sharing rules, each a pure map from identity bids to an [`Outcome`].
//! - [`sybil`]: the false-name extension that lets one agent report several
//!   identity bids and aggregates the result back per agent.
//! - [`analysis`]: exhaustive and randomized checkers for truthfulness,
//!   Sybil-proofness, monotonicity, budget balance and threshold payments.
//! - [`welfare`]: social cost, approximation ratios, worst-case sweeps and the
//!   weakly dominant Sybil strategy sets used to verify welfare invariance.

pub mod analysis;
pub mod cost;
pub mod enumerate;
pub mod format;
pub mod mechanisms;
pub mod sybil;
pub mod types;
pub mod welfare;

pub use cost::{CostError, CostFunction, CostViolation, ValidationReport, N_MAX};
pub use mechanisms::{
    harmonic, CostSharingMechanism, HarmonicTable, Mechanism, MechanismError, MechanismId,
};
pub use sybil::{
    agent_utility, flatten, run_sybil_extension, OwnerMap, SybilOutcome, SybilProfile,
};
pub use types::{BidError, BidVector, Outcome, OutcomeViolation, ValuationProfile};

/// Absolute tolerance for money comparisons inside mechanisms.
pub const TAU: f64 = 1e-9;
