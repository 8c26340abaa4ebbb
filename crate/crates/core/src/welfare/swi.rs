//! Sybil welfare invariance of the Shapley mechanism: with every agent
//! playing some member of its `B(v_i)`, the social cost never exceeds the
//! truthful one.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::strategies::enumerate_b;
use super::{social_cost, truthful_social_cost};
use crate::analysis::{CheckReport, Witness, WitnessKind, UTILITY_TAU};
use crate::cost::CostFunction;
use crate::enumerate::{grid_values, multisets};
use crate::mechanisms::{Mechanism, MechanismError, MechanismId};
use crate::types::check_bids;

/// Social cost of one strategy profile, without building a `SybilProfile`.
fn profile_cost(
    mechanism: &dyn Mechanism,
    v: &[f64],
    strategies: &[&[f64]],
    bids: &mut Vec<f64>,
    served: &mut Vec<bool>,
) -> Result<f64, MechanismError> {
    bids.clear();
    for s in strategies {
        bids.extend_from_slice(s);
    }
    let out = mechanism.run(bids)?;
    served.clear();
    let mut start = 0;
    for s in strategies {
        let end = start + s.len();
        served.push(out.winners.iter().any(|&w| w >= start && w < end));
        start = end;
    }
    Ok(social_cost(mechanism.cost(), served, v)?)
}

/// Enumerates every `b` in the product of the agents' strategy sets and
/// reports the first profile (in lexicographic order of member indices)
/// whose Sybil social cost exceeds the truthful one by more than `1e-7`.
pub fn check_swi_shapley(
    cost: &CostFunction,
    v: &[f64],
    step: f64,
    max_ids: usize,
) -> Result<CheckReport, MechanismError> {
    let started = Instant::now();
    check_bids(v)?;
    let mechanism = MechanismId::Shapley.with_cost(cost.clone())?;
    let truthful = truthful_social_cost(&mechanism, v)?;
    let sets: Vec<Vec<Vec<f64>>> = v
        .iter()
        .map(|&x| enumerate_b(x, cost, step, max_ids).members)
        .collect();
    let total: u64 = sets.iter().map(|s| s.len() as u64).product();
    if v.is_empty() {
        return Ok(CheckReport::finish(None, 1, started));
    }

    let hit = (0..sets[0].len())
        .into_par_iter()
        .map(|first| -> Result<Option<(u64, Witness)>, MechanismError> {
            let n = v.len();
            let mut idx = vec![0usize; n];
            idx[0] = first;
            let mut bids = Vec::new();
            let mut served = Vec::with_capacity(n);
            let mut offset = 0u64;
            loop {
                let chosen: Vec<&[f64]> = (0..n).map(|a| sets[a][idx[a]].as_slice()).collect();
                let pi = profile_cost(&mechanism, v, &chosen, &mut bids, &mut served)?;
                if pi > truthful + UTILITY_TAU {
                    let witness = Witness {
                        kind: WitnessKind::SocialCost,
                        valuations: v.to_vec(),
                        reports: chosen.iter().map(|s| s.to_vec()).collect(),
                        utilities: vec![truthful, pi],
                        deviator: None,
                    };
                    return Ok(Some((offset, witness)));
                }
                offset += 1;
                // Advance the mixed-radix counter over agents 1..n.
                let mut a = n;
                loop {
                    if a == 1 {
                        return Ok(None);
                    }
                    a -= 1;
                    idx[a] += 1;
                    if idx[a] < sets[a].len() {
                        break;
                    }
                    idx[a] = 0;
                }
            }
        })
        .enumerate()
        .find_map_first(|(first, r)| match r {
            Ok(None) => None,
            Ok(Some((offset, w))) => Some(Ok((first, offset, w))),
            Err(e) => Some(Err(e)),
        })
        .transpose()?;

    let per_first: u64 = sets[1..].iter().map(|s| s.len() as u64).product();
    let (witness, examined) = match hit {
        None => (None, total),
        Some((first, offset, w)) => (Some(w), first as u64 * per_first + offset + 1),
    };
    let mut report = CheckReport::finish(witness, examined, started);
    if (cost.single() - 1.0).abs() > crate::TAU {
        report = report.with_note("strategy bounds use f(1)/l since f(1) != 1");
    }
    Ok(report)
}

/// Outcome of [`check_swi_shapley_grid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwiSweep {
    pub profiles: u64,
    pub cases_examined: u64,
    pub violations: u64,
    /// Violating profile that comes first in enumeration order.
    pub witness: Option<Witness>,
    pub elapsed_ms: u64,
}

/// [`check_swi_shapley`] over every valuation multiset on `{0, v_step, ...,
/// v_max}` with `1..=max_agents` agents, followed by `extra` profiles.
pub fn check_swi_shapley_grid(
    cost: &CostFunction,
    v_step: f64,
    v_max: f64,
    max_agents: usize,
    extra: &[Vec<f64>],
    step: f64,
    max_ids: usize,
) -> Result<SwiSweep, MechanismError> {
    let started = Instant::now();
    let values = grid_values(v_step, v_max);
    let mut profiles: Vec<Vec<f64>> = (1..=max_agents)
        .flat_map(|n| multisets(&values, n))
        .collect();
    profiles.extend(extra.iter().cloned());
    let reports: Vec<CheckReport> = profiles
        .par_iter()
        .map(|v| check_swi_shapley(cost, v, step, max_ids))
        .collect::<Result<_, _>>()?;
    let violations = reports.iter().filter(|r| !r.passed()).count() as u64;
    Ok(SwiSweep {
        profiles: profiles.len() as u64,
        cases_examined: reports.iter().map(|r| r.cases_examined).sum(),
        violations,
        witness: reports.into_iter().find_map(|r| r.witness),
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Verdict;
    use crate::sybil::{run_sybil_extension, SybilProfile};

    #[test]
    fn counterexample_profile_passes() {
        let eps = 0.01;
        let v = [1.0 + eps, 1.0 / 3.0 - eps, 1.0 / 3.0 - eps];
        let c = CostFunction::constant(1.0);
        let r = check_swi_shapley(&c, &v, 0.05, 3).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.witness);
        let sets: u64 = v
            .iter()
            .map(|&x| enumerate_b(x, &c, 0.05, 3).len() as u64)
            .product();
        assert_eq!(r.cases_examined, sets);

        // The profitable split serves everyone and lowers the social cost.
        let m = MechanismId::Shapley.with_cost(c).unwrap();
        let truthful = truthful_social_cost(&m, &v).unwrap();
        let split = SybilProfile::new(vec![vec![0.25, 0.25], vec![v[1]], vec![v[2]]]).unwrap();
        assert!(super::super::sybil_social_cost(&m, &v, &split).unwrap() < truthful);
    }

    #[test]
    fn zero_values_pass_trivially() {
        let r = check_swi_shapley(&CostFunction::constant(1.0), &[0.0, 0.0], 0.05, 3).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.cases_examined, 1);
    }

    #[test]
    fn concave_random_profiles_pass() {
        let t = CostFunction::concave(vec![0.0, 1.0, 1.4, 1.7, 1.9, 2.05, 2.15]);
        for v in [
            [0.8, 0.5, 0.3],
            [1.2, 0.4, 0.4],
            [0.6, 0.6, 0.6],
            [1.0, 0.2, 0.7],
        ] {
            let r = check_swi_shapley(&t, &v, 0.1, 3).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{v:?}: {:?}", r.witness);
        }
    }

    /// Agents served under truth-telling stay served under any B-profile.
    #[test]
    fn truthful_winners_stay_served() {
        let c = CostFunction::concave(vec![0.0, 1.0, 1.4, 1.7, 1.9]);
        let m = MechanismId::Shapley.with_cost(c.clone()).unwrap();
        for v in multisets(&[0.3, 0.5, 0.9, 1.1], 3) {
            let truth = m.run(&v).unwrap();
            let sets: Vec<_> = v
                .iter()
                .map(|&x| enumerate_b(x, &c, 0.1, 2).members)
                .collect();
            for a in &sets[0] {
                for b in &sets[1] {
                    for d in &sets[2] {
                        let p = SybilProfile::new(vec![a.clone(), b.clone(), d.clone()]).unwrap();
                        let out = run_sybil_extension(&m, &p).unwrap();
                        for &w in &truth.winners {
                            assert!(out.served[w], "v={v:?} b={:?}", p.per_agent());
                        }
                    }
                }
            }
        }
    }
}
