//! Axiomatic checkers.
//!
//! Every checker returns a [`CheckReport`]. A violated report always carries a
//! [`Witness`] that can be replayed against the mechanism to reproduce the
//! violation, and searches are deterministic: the witness is the
//! lexicographically smallest violating profile no matter how the work was
//! scheduled across threads.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumerate::{grid_values, merge_values};
use crate::mechanisms::{Mechanism, MechanismError};
use crate::sybil::{agent_utility, run_sybil_extension, SybilProfile};
use crate::welfare;

mod axioms;
mod budget;
mod deviation;
pub mod threshold;

pub use axioms::{check_anonymity_consistency, check_separable, check_strong_monotonic};
pub use budget::{check_budget, check_budget_profiles, classify_budget, BudgetClass, BudgetReport};
pub use deviation::{check_sybil_proof, check_sybil_proof_at, check_truthful, check_truthful_at};
pub use threshold::{infimum_winning_bid, threshold_payment, Threshold, THRESHOLD_TOL};

/// Utility gain that counts as a violation.
pub const UTILITY_TAU: f64 = 1e-7;

/// Most identities an exhaustive search may put in one profile.
pub const MAX_EXHAUSTIVE_IDENTITIES: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("grid step {step} exceeds max value {max_value}")]
    StepAboveMax { step: f64, max_value: f64 },
    #[error("max_sybils must be at least 1")]
    NoIdentities,
    #[error("{agents} agents x {sybils} identities = {total} exceeds the exhaustive cap of {cap}")]
    TooLarge {
        agents: usize,
        sybils: usize,
        total: usize,
        cap: usize,
    },
}

/// Search space for the exhaustive checkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub step: f64,
    pub max_value: f64,
    pub max_sybils: usize,
    pub max_agents: usize,
    /// Off-grid valuations added to every enumeration.
    #[serde(default)]
    pub extra_values: Vec<f64>,
}

impl Grid {
    pub fn new(
        step: f64,
        max_value: f64,
        max_sybils: usize,
        max_agents: usize,
    ) -> Result<Self, GridError> {
        let grid = Grid {
            step,
            max_value,
            max_sybils,
            max_agents,
            extra_values: Vec::new(),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_extra_values(mut self, extra: &[f64]) -> Self {
        self.extra_values.extend_from_slice(extra);
        self
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(GridError::BadStep(self.step));
        }
        if self.step > self.max_value {
            return Err(GridError::StepAboveMax {
                step: self.step,
                max_value: self.max_value,
            });
        }
        if self.max_sybils == 0 {
            return Err(GridError::NoIdentities);
        }
        let total = self.max_sybils * self.max_agents;
        if total > MAX_EXHAUSTIVE_IDENTITIES {
            return Err(GridError::TooLarge {
                agents: self.max_agents,
                sybils: self.max_sybils,
                total,
                cap: MAX_EXHAUSTIVE_IDENTITIES,
            });
        }
        Ok(())
    }

    /// Valuations enumerated by the searches, ascending.
    pub fn values(&self) -> Vec<f64> {
        merge_values(&grid_values(self.step, self.max_value), &self.extra_values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    /// `valuations` are true values with the deviator first; `reports` are
    /// the per-agent identity bids; `utilities` = [truthful, deviating].
    Deviation,
    /// `reports` = [b, b'] with b <= b' componentwise.
    StrongMonotonicity,
    /// `reports` = [b, permuted b].
    Anonymity,
    /// `reports` = [b, b padded with zeros].
    Consistency,
    /// `reports` = [b]; `utilities` = [total payment, cost].
    Budget,
    /// `reports` = [b] and [b']; payments differ for the same winner set.
    Separability,
    /// `valuations` v, `reports` the Sybil profile; `utilities` =
    /// [truthful social cost, Sybil social cost].
    SocialCost,
}

/// A concrete counterexample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub valuations: Vec<f64>,
    pub reports: Vec<Vec<f64>>,
    pub utilities: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviator: Option<usize>,
}

impl Witness {
    /// Re-evaluates the witness; `true` when the violation reproduces.
    pub fn replay(&self, mechanism: &dyn Mechanism) -> Result<bool, MechanismError> {
        match self.kind {
            WitnessKind::Deviation => {
                let i = self.deviator.unwrap_or(0);
                let truthful = SybilProfile::truthful(&self.valuations)?;
                let deviated = SybilProfile::new(self.reports.clone())?;
                let v = self.valuations[i];
                let before = agent_utility(v, &run_sybil_extension(mechanism, &truthful)?, i);
                let after = agent_utility(v, &run_sybil_extension(mechanism, &deviated)?, i);
                Ok(after - before > UTILITY_TAU)
            }
            WitnessKind::StrongMonotonicity => {
                let (b, b2) = (&self.reports[0], &self.reports[1]);
                Ok(axioms::monotonicity_violation(mechanism, b, b2, true)?.is_some())
            }
            WitnessKind::Anonymity => {
                let (b, permuted) = (&self.reports[0], &self.reports[1]);
                Ok(!axioms::same_multiset_outcome(mechanism, b, permuted)?)
            }
            WitnessKind::Consistency => {
                let (b, padded) = (&self.reports[0], &self.reports[1]);
                Ok(!axioms::restriction_matches(mechanism, b, padded)?)
            }
            WitnessKind::Budget => {
                let out = mechanism.run(&self.reports[0])?;
                let cost = mechanism.cost().cost_of(out.winners.len())?;
                Ok(classify_budget(out.total_payment(), cost) == BudgetClass::Deficit)
            }
            WitnessKind::Separability => {
                let a = mechanism.run(&self.reports[0])?;
                let b = mechanism.run(&self.reports[1])?;
                Ok(axioms::payments_differ_on_same_set(&a, &b))
            }
            WitnessKind::SocialCost => {
                let v = crate::types::ValuationProfile::new(self.valuations.clone())?;
                let profile = SybilProfile::new(self.reports.clone())?;
                let truthful = welfare::truthful_social_cost(mechanism, &v)?;
                let sybil = welfare::sybil_social_cost(mechanism, &v, &profile)?;
                Ok(sybil > truthful + UTILITY_TAU)
            }
        }
    }
}

/// Result of a property search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub cases_examined: u64,
    pub elapsed_ms: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub(crate) fn finish(witness: Option<Witness>, cases_examined: u64, started: Instant) -> Self {
        CheckReport {
            verdict: if witness.is_some() {
                Verdict::Violated
            } else {
                Verdict::Pass
            },
            witness,
            cases_examined,
            elapsed_ms: started.elapsed().as_millis() as u64,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}
