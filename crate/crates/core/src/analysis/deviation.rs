//! Exhaustive single-agent deviation searches (truthfulness and Sybil-proofness).
//!
//! The mechanisms are anonymous, so a profile of true valuations is searched
//! once per multiset: the deviator is agent 0 and the opponents are listed in
//! ascending order. Opponents bid truthfully. Jobs are ordered
//! lexicographically by `(n, valuations)` and the first violating job wins,
//! which keeps the witness independent of thread scheduling.

use std::time::Instant;

use rayon::prelude::*;

use super::{CheckReport, Grid, Witness, WitnessKind, UTILITY_TAU};
use crate::enumerate::{merge_values, multisets};
use crate::mechanisms::{Mechanism, MechanismError};
use crate::types::check_bids;

/// Candidate identity bids for a deviator with value `v`: the grid plus the
/// knife-edge points `v, v/2, v/3, f(1), f(1) + step`.
fn deviation_values(mechanism: &dyn Mechanism, grid: &Grid, v: f64) -> Vec<f64> {
    let single = mechanism.cost().single();
    let special = [v, v / 2.0, v / 3.0, single, single + grid.step];
    merge_values(&grid.values(), &special)
}

/// Non-increasing identity lists of length `1..=max_len`. Lists ending in a
/// zero bid are skipped beyond length one: by consistency they behave like the
/// shorter list.
fn deviation_lists(values: &[f64], max_len: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        for mut m in multisets(values, len) {
            if len > 1 && m[0] == 0.0 {
                continue;
            }
            m.reverse();
            out.push(m);
        }
    }
    out
}

/// Best deviation of agent `deviator` at true values `v`; `None` if nothing
/// beats truth-telling by more than [`UTILITY_TAU`]. Ties keep the earliest list.
fn best_deviation(
    mechanism: &dyn Mechanism,
    v: &[f64],
    deviator: usize,
    lists: &[Vec<f64>],
) -> Result<Option<Witness>, MechanismError> {
    let value = v[deviator];
    let truthful = mechanism.run(v)?;
    let u0 = if truthful.is_winner(deviator) {
        value - truthful.payments[deviator]
    } else {
        0.0
    };

    let mut buf = Vec::with_capacity(v.len() + lists.last().map_or(1, Vec::len));
    let mut best: Option<(f64, f64, usize)> = None;
    for (idx, list) in lists.iter().enumerate() {
        buf.clear();
        buf.extend_from_slice(&v[..deviator]);
        buf.extend_from_slice(list);
        buf.extend_from_slice(&v[deviator + 1..]);
        let out = mechanism.run(&buf)?;
        let own = deviator..deviator + list.len();
        let served = out.winners.iter().any(|w| own.contains(w));
        let paid: f64 = out.payments[own].iter().sum();
        let u = if served { value } else { 0.0 } - paid;
        let gain = u - u0;
        if gain > UTILITY_TAU && best.is_none_or(|(g, _, _)| gain > g) {
            best = Some((gain, u, idx));
        }
    }
    Ok(best.map(|(_, u, idx)| {
        let reports = (0..v.len())
            .map(|a| {
                if a == deviator {
                    lists[idx].clone()
                } else {
                    vec![v[a]]
                }
            })
            .collect();
        Witness {
            kind: WitnessKind::Deviation,
            valuations: v.to_vec(),
            reports,
            utilities: vec![u0, u],
            deviator: Some(deviator),
        }
    }))
}

fn search(
    mechanism: &dyn Mechanism,
    grid: &Grid,
    max_ids: usize,
) -> Result<CheckReport, MechanismError> {
    let started = Instant::now();
    let values = grid.values();

    // Deviator first, opponents ascending.
    let mut jobs: Vec<Vec<f64>> = Vec::new();
    for n in 1..=grid.max_agents {
        for &v in &values {
            for opponents in multisets(&values, n - 1) {
                let mut profile = Vec::with_capacity(n);
                profile.push(v);
                profile.extend(opponents);
                jobs.push(profile);
            }
        }
    }
    // Lists depend only on the deviator's value; build them once per value.
    let lists: Vec<Vec<Vec<f64>>> = values
        .iter()
        .map(|&v| deviation_lists(&deviation_values(mechanism, grid, v), max_ids))
        .collect();
    let lists_for = |v: f64| -> &Vec<Vec<f64>> {
        let i = values
            .iter()
            .position(|&x| x == v)
            .expect("deviator value from the grid");
        &lists[i]
    };

    let hit = jobs
        .par_iter()
        .enumerate()
        .map(|(j, profile)| {
            best_deviation(mechanism, profile, 0, lists_for(profile[0])).map(|f| f.map(|f| (j, f)))
        })
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });

    let (witness, last) = match hit {
        None => (None, jobs.len()),
        Some(Err(e)) => return Err(e),
        Some(Ok(None)) => unreachable!(),
        Some(Ok(Some((j, w)))) => (Some(w), j + 1),
    };
    let cases: u64 = jobs[..last]
        .iter()
        .map(|p| 1 + lists_for(p[0]).len() as u64)
        .sum();
    let mut report = CheckReport::finish(witness, cases, started);
    if max_ids > 1 {
        report = report.with_note(format!(
            "deviations: up to {max_ids} identities over grid step {} plus v, v/2, v/3, f(1), f(1)+step",
            grid.step
        ));
    }
    Ok(report)
}

/// Single-identity misreports over the grid.
pub fn check_truthful(
    mechanism: &dyn Mechanism,
    grid: &Grid,
) -> Result<CheckReport, MechanismError> {
    search(mechanism, grid, 1)
}

/// Multi-identity deviations with up to `grid.max_sybils` identities.
pub fn check_sybil_proof(
    mechanism: &dyn Mechanism,
    grid: &Grid,
) -> Result<CheckReport, MechanismError> {
    search(mechanism, grid, grid.max_sybils)
}

fn search_at(
    mechanism: &dyn Mechanism,
    valuations: &[f64],
    deviator: usize,
    grid: &Grid,
    max_ids: usize,
) -> Result<CheckReport, MechanismError> {
    let started = Instant::now();
    check_bids(valuations)?;
    if deviator >= valuations.len() {
        return Err(MechanismError::NoSuchIdentity {
            identity: deviator,
            len: valuations.len(),
        });
    }
    let lists = deviation_lists(
        &deviation_values(mechanism, grid, valuations[deviator]),
        max_ids,
    );
    let found = best_deviation(mechanism, valuations, deviator, &lists)?;
    Ok(CheckReport::finish(found, 1 + lists.len() as u64, started))
}

/// Sybil deviations of one agent at an explicit valuation profile; the
/// witness is the most profitable deviation found.
pub fn check_sybil_proof_at(
    mechanism: &dyn Mechanism,
    valuations: &[f64],
    deviator: usize,
    grid: &Grid,
) -> Result<CheckReport, MechanismError> {
    search_at(mechanism, valuations, deviator, grid, grid.max_sybils)
}

pub fn check_truthful_at(
    mechanism: &dyn Mechanism,
    valuations: &[f64],
    deviator: usize,
    grid: &Grid,
) -> Result<CheckReport, MechanismError> {
    search_at(mechanism, valuations, deviator, grid, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Verdict;
    use crate::cost::CostFunction;
    use crate::mechanisms::fixtures::FirstPriceShapley;
    use crate::mechanisms::MechanismId;

    fn unit(id: MechanismId) -> Box<dyn Mechanism> {
        Box::new(id.with_cost(CostFunction::constant(1.0)).unwrap())
    }

    #[test]
    fn shapley_and_osp_are_truthful() {
        let grid = Grid::new(0.1, 1.2, 1, 3).unwrap();
        for id in [MechanismId::Shapley, MechanismId::OptimalSybilProof] {
            let r = check_truthful(unit(id).as_ref(), &grid).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{id}: {:?}", r.witness);
            assert!(r.cases_examined > 0);
        }
    }

    #[test]
    fn first_price_shading_is_found() {
        let m = FirstPriceShapley {
            cost: CostFunction::constant(1.0),
        };
        let grid = Grid::new(0.1, 1.2, 1, 2).unwrap();
        let r = check_truthful(&m, &grid).unwrap();
        let w = r.witness.expect("violation");
        assert!(w.replay(&m).unwrap());
        // Shading strictly below the value while still winning.
        let v = w.valuations[0];
        let report = w.reports[0][0];
        assert!(report < v);
        assert!(w.utilities[1] > w.utilities[0] + UTILITY_TAU);
    }

    #[test]
    fn vcg_one_third_profile() {
        let third = 1.0 / 3.0;
        let grid = Grid::new(third, 1.0, 3, 2).unwrap();
        let m = unit(MechanismId::Vcg);
        let r = check_sybil_proof_at(m.as_ref(), &[third, third], 0, &grid).unwrap();
        let w = r.witness.expect("violation");
        assert!((w.utilities[0]).abs() < 1e-12);
        assert!((w.utilities[1] - third).abs() < 1e-9);
        assert!(w.replay(m.as_ref()).unwrap());
        // The full search also fails, at the smallest violating profile.
        let full = check_sybil_proof(m.as_ref(), &grid).unwrap();
        assert_eq!(full.verdict, Verdict::Violated);
        assert!(full.witness.unwrap().replay(m.as_ref()).unwrap());
    }

    #[test]
    fn witness_is_stable_across_thread_counts() {
        let grid = Grid::new(0.25, 1.0, 2, 2).unwrap();
        let m = unit(MechanismId::Shapley);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| check_sybil_proof(m.as_ref(), &grid).unwrap());
        let b = four.install(|| check_sybil_proof(m.as_ref(), &grid).unwrap());
        assert_eq!(a.witness, b.witness);
        assert_eq!(a.cases_examined, b.cases_examined);
    }

    #[test]
    fn zero_tail_lists_are_skipped() {
        let lists = deviation_lists(&[0.0, 0.5, 1.0], 2);
        assert!(lists.contains(&vec![0.0]));
        assert!(!lists.contains(&vec![1.0, 0.0]));
        assert!(lists.contains(&vec![1.0, 0.5]));
    }
}
