//! The weakly dominant Sybil strategy set `B(v)` in z-form.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::UTILITY_TAU;
use crate::cost::CostFunction;
use crate::enumerate::{lex_cmp, snap};
use crate::mechanisms::{Mechanism, MechanismError};
use crate::sybil::{agent_utility, run_sybil_extension, SybilProfile};

/// Representatives of `B(v)`: first entry `v`, entry `l >= 2` a positive grid
/// point at most `min(v, f(1)) / l`, entries non-increasing.
///
/// Zero entries are dropped rather than enumerated: an identity bidding zero
/// changes nothing (consistency), so `(v, x, 0)` is the same strategy as
/// `(v, x)`. Members are ordered by length, then lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySet {
    pub v: f64,
    pub step: f64,
    pub max_ids: usize,
    pub members: Vec<Vec<f64>>,
    /// Set when `f(1) != 1`, where the bound `f(1)/l` generalizes `1/l`.
    pub rescaled: bool,
}

impl StrategySet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn enumerate_b(v: f64, cost: &CostFunction, step: f64, max_ids: usize) -> StrategySet {
    assert!(step > 0.0, "strategy step must be positive");
    let cap = v.min(cost.single());
    let mut members = vec![vec![v]];
    let mut frontier = vec![vec![v]];
    for l in 2..=max_ids {
        let bound = cap / l as f64;
        let top = ((bound / step) + 1e-9).floor() as usize;
        let mut next = Vec::new();
        for prefix in &frontier {
            // Non-increasing from the second entry on.
            let limit = if l == 2 {
                top
            } else {
                top.min(((prefix[l - 2] / step) + 1e-9).round() as usize)
            };
            for k in 1..=limit {
                let mut s = prefix.clone();
                s.push(snap(k as f64 * step));
                next.push(s);
            }
        }
        members.extend(next.iter().cloned());
        frontier = next;
    }
    members.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| lex_cmp(a, b)));
    StrategySet {
        v,
        step,
        max_ids,
        members,
        rescaled: (cost.single() - 1.0).abs() > crate::TAU,
    }
}

/// The B(v) member that weakly dominates the bid list `b`: `z_1 = v` and
/// `z_l = min(b_l, v/l, f(1)/l)` over `b` sorted in descending order.
pub fn canonical_z(b: &[f64], v: f64, cost: &CostFunction) -> Vec<f64> {
    let mut sorted = b.to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let single = cost.single();
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if i == 0 {
                v
            } else {
                let l = (i + 1) as f64;
                x.min(v / l).min(single / l)
            }
        })
        .collect()
}

/// Best strategy in `B(v_i)` for the agent reporting first, against fixed
/// opponent reports. A strictly better utility (beyond [`UTILITY_TAU`]) is
/// needed to displace an earlier member, so ties go to fewer identities and
/// then to the lexicographically smaller list.
pub fn best_response(
    mechanism: &dyn Mechanism,
    v_i: f64,
    opponents: &SybilProfile,
    step: f64,
    max_ids: usize,
) -> Result<(Vec<f64>, f64), MechanismError> {
    let set = enumerate_b(v_i, mechanism.cost(), step, max_ids);
    let utilities: Vec<f64> = set
        .members
        .par_iter()
        .map(|s| {
            let mut per_agent = Vec::with_capacity(opponents.agents() + 1);
            per_agent.push(s.clone());
            per_agent.extend(opponents.per_agent().iter().cloned());
            let profile = SybilProfile::new(per_agent)?;
            Ok(agent_utility(
                v_i,
                &run_sybil_extension(mechanism, &profile)?,
                0,
            ))
        })
        .collect::<Result<_, MechanismError>>()?;
    let mut best = 0;
    for (i, &u) in utilities.iter().enumerate() {
        if u > utilities[best] + UTILITY_TAU {
            best = i;
        }
    }
    Ok((set.members[best].clone(), utilities[best]))
}
