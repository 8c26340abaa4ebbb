//! Social cost, optimal allocations and approximation ratios.
//!
//! The social cost of serving the agent set `S` is `C(S)` plus the values of
//! everyone left out. Mechanisms are scored against the cheapest allocation,
//! which for a symmetric cost is always a prefix of the agents sorted by
//! value.

use serde::{Serialize, Serializer};

use crate::cost::{CostError, CostFunction};
use crate::mechanisms::{Mechanism, MechanismError};
use crate::sybil::{run_sybil_extension, SybilProfile};
use crate::TAU;

mod strategies;
mod swi;
mod worst_case;

pub use strategies::{best_response, canonical_z, enumerate_b, StrategySet};
pub use swi::{check_swi_shapley, check_swi_shapley_grid, SwiSweep};
pub use worst_case::{witness_points, worst_case_ratio, WorstCase, WITNESS_DELTA};

/// `C(|served|) + sum of unserved values`.
pub fn social_cost(cost: &CostFunction, served: &[bool], v: &[f64]) -> Result<f64, CostError> {
    let k = served.iter().filter(|&&s| s).count();
    let unserved: f64 = v
        .iter()
        .zip(served)
        .filter(|(_, &s)| !s)
        .map(|(x, _)| x)
        .sum();
    Ok(cost.cost_of(k)? + unserved)
}

/// Cheapest allocation: the served agents (ascending) and its social cost.
/// Among equally cheap prefixes the smallest one is returned.
pub fn optimal_allocation(cost: &CostFunction, v: &[f64]) -> Result<(Vec<usize>, f64), CostError> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
    let total: f64 = v.iter().sum();
    let mut best = (0, total);
    let mut served_value = 0.0;
    for (k, &i) in order.iter().enumerate() {
        served_value += v[i];
        let pi = cost.cost_of(k + 1)? + (total - served_value);
        if pi < best.1 - TAU {
            best = (k + 1, pi);
        }
    }
    let mut served = order[..best.0].to_vec();
    served.sort_unstable();
    Ok((served, best.1))
}

/// Social cost of the mechanism's allocation under truthful single-identity bids.
pub fn truthful_social_cost(mechanism: &dyn Mechanism, v: &[f64]) -> Result<f64, MechanismError> {
    let out = mechanism.run(v)?;
    Ok(social_cost(mechanism.cost(), &out.served_mask(), v)?)
}

/// Social cost when agents report `profile` through the Sybil extension. An
/// agent counts as served if any of its identities is.
pub fn sybil_social_cost(
    mechanism: &dyn Mechanism,
    v: &[f64],
    profile: &SybilProfile,
) -> Result<f64, MechanismError> {
    let out = run_sybil_extension(mechanism, profile)?;
    Ok(social_cost(mechanism.cost(), &out.served, v)?)
}

/// `pi / pi*`, infinite when only the optimum is free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    Infinite,
}

impl Ratio {
    pub fn of(pi: f64, optimum: f64) -> Ratio {
        if optimum <= TAU {
            if pi <= TAU {
                Ratio::Finite(1.0)
            } else {
                Ratio::Infinite
            }
        } else {
            Ratio::Finite(pi / optimum)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Ratio::Finite(r) => r,
            Ratio::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Ratio::Finite(r) => s.serialize_f64(*r),
            Ratio::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WelfareScore {
    pub served: Vec<usize>,
    pub social_cost: f64,
    pub optimal: Vec<usize>,
    pub optimal_cost: f64,
    pub ratio: Ratio,
}

/// Scores the mechanism's truthful allocation at `v` against the optimum.
pub fn approx_ratio(mechanism: &dyn Mechanism, v: &[f64]) -> Result<WelfareScore, MechanismError> {
    let out = mechanism.run(v)?;
    let social_cost = social_cost(mechanism.cost(), &out.served_mask(), v)?;
    let (optimal, optimal_cost) = optimal_allocation(mechanism.cost(), v)?;
    Ok(WelfareScore {
        served: out.winners,
        social_cost,
        optimal,
        optimal_cost,
        ratio: Ratio::of(social_cost, optimal_cost),
    })
}
