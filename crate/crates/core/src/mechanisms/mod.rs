//! The concrete cost-sharing rules.
//!
//! Every mechanism is anonymous: it sorts bids in descending order (stable by
//! identity index) and only ever looks at sorted positions. All of them are
//! exposed through the [`Mechanism`] trait so the analysis code can treat the
//! catalog and ad-hoc test mechanisms uniformly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{CostError, CostFunction};
use crate::types::{check_bids, BidError, Outcome};

pub mod fixtures;
mod hybrid;
mod optimal_sybil_proof;
mod potential;
mod shapley;
mod vcg;

pub use hybrid::{hybrid_allocation, hybrid_allocation_current_cost, run_hybrid};
pub use optimal_sybil_proof::run_optimal_sybil_proof;
pub use potential::run_potential;
pub use shapley::{run_shapley, shapley_winner_count};
pub use vcg::run_vcg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechanismError {
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Bid(#[from] BidError),
    #[error("{mechanism} does not support {cost_kind} cost functions{detail}")]
    UnsupportedCost {
        mechanism: MechanismId,
        cost_kind: &'static str,
        detail: String,
    },
    #[error(
        "win region of identity {identity} is not monotone: wins at {won_at}, loses at {lost_at}"
    )]
    NonMonotone {
        identity: usize,
        won_at: f64,
        lost_at: f64,
    },
    #[error("identity {identity} out of range for {len} bids")]
    NoSuchIdentity { identity: usize, len: usize },
}

/// A deterministic cost-sharing mechanism over identity bids.
///
/// Implementations reject negative or non-finite bids with
/// [`MechanismError::Bid`].
pub trait Mechanism: Send + Sync {
    fn name(&self) -> String;
    fn cost(&self) -> &CostFunction;
    fn run(&self, bids: &[f64]) -> Result<Outcome, MechanismError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismId {
    Vcg,
    Shapley,
    Potential,
    #[serde(rename = "osp", alias = "optimal-sybil-proof")]
    OptimalSybilProof,
    Hybrid,
}

impl MechanismId {
    pub const ALL: [MechanismId; 5] = [
        MechanismId::Vcg,
        MechanismId::Shapley,
        MechanismId::Potential,
        MechanismId::OptimalSybilProof,
        MechanismId::Hybrid,
    ];

    /// Mechanisms whose payments are the Myerson threshold bids.
    pub const TRUTHFUL: [MechanismId; 4] = [
        MechanismId::Vcg,
        MechanismId::Shapley,
        MechanismId::Potential,
        MechanismId::OptimalSybilProof,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MechanismId::Vcg => "vcg",
            MechanismId::Shapley => "shapley",
            MechanismId::Potential => "potential",
            MechanismId::OptimalSybilProof => "osp",
            MechanismId::Hybrid => "hybrid",
        }
    }

    pub fn with_cost(self, cost: CostFunction) -> Result<CostSharingMechanism, MechanismError> {
        CostSharingMechanism::new(self, cost)
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MechanismId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "vcg" => Ok(MechanismId::Vcg),
            "shapley" => Ok(MechanismId::Shapley),
            "potential" => Ok(MechanismId::Potential),
            "osp" | "optimal-sybil-proof" | "optimalsybilproof" => {
                Ok(MechanismId::OptimalSybilProof)
            }
            "hybrid" => Ok(MechanismId::Hybrid),
            other => Err(format!(
                "unknown mechanism `{other}` (expected vcg, shapley, potential, osp or hybrid)"
            )),
        }
    }
}

/// A catalog mechanism bound to a compatible cost function.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSharingMechanism {
    id: MechanismId,
    cost: CostFunction,
}

impl CostSharingMechanism {
    /// VCG, Potential and Optimal Sybil-Proof take constant costs only, and
    /// Potential additionally requires `c = 1`.
    pub fn new(id: MechanismId, cost: CostFunction) -> Result<Self, MechanismError> {
        let unsupported = |detail: &str| MechanismError::UnsupportedCost {
            mechanism: id,
            cost_kind: cost.kind(),
            detail: detail.to_string(),
        };
        match (id, &cost) {
            (MechanismId::Vcg | MechanismId::OptimalSybilProof, CostFunction::Concave { .. }) => {
                return Err(unsupported(""));
            }
            (MechanismId::Potential, CostFunction::Concave { .. }) => return Err(unsupported("")),
            (MechanismId::Potential, CostFunction::Constant { c })
                if (c - 1.0).abs() > crate::TAU =>
            {
                return Err(unsupported(" other than c = 1"));
            }
            _ => {}
        }
        Ok(CostSharingMechanism { id, cost })
    }

    pub fn id(&self) -> MechanismId {
        self.id
    }

    fn constant(&self) -> f64 {
        match self.cost {
            CostFunction::Constant { c } => c,
            // `new` rejects the other combinations.
            CostFunction::Concave { .. } => unreachable!("constant-cost mechanism with a table"),
        }
    }
}

impl Mechanism for CostSharingMechanism {
    fn name(&self) -> String {
        self.id.as_str().to_string()
    }

    fn cost(&self) -> &CostFunction {
        &self.cost
    }

    fn run(&self, bids: &[f64]) -> Result<Outcome, MechanismError> {
        check_bids(bids)?;
        match self.id {
            MechanismId::Vcg => Ok(run_vcg(bids, self.constant())),
            MechanismId::Shapley => run_shapley(bids, &self.cost),
            MechanismId::Potential => Ok(run_potential(bids)),
            MechanismId::OptimalSybilProof => Ok(run_optimal_sybil_proof(bids, self.constant())),
            MechanismId::Hybrid => run_hybrid(bids, &self.cost),
        }
    }
}

/// `H_n = 1 + 1/2 + ... + 1/n`, with `H_0 = 0`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// Prefix table of harmonic numbers, `table[k] = H_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicTable(Vec<f64>);

impl HarmonicTable {
    pub fn new(n: usize) -> Self {
        let mut h = Vec::with_capacity(n + 1);
        h.push(0.0);
        for k in 1..=n {
            h.push(h[k - 1] + 1.0 / k as f64);
        }
        HarmonicTable(h)
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Identity indices by descending bid; equal bids keep index order.
pub(crate) fn descending_order(bids: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..bids.len()).collect();
    order.sort_by(|&a, &b| bids[b].total_cmp(&bids[a]));
    order
}

/// Largest `k` whose value is within [`crate::TAU`] of the maximum.
pub(crate) fn argmax_largest(values: &[f64]) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .rposition(|&v| v >= best - crate::TAU)
        .unwrap_or(0)
}
