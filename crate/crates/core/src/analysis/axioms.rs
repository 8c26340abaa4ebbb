//! Randomized axiom checks: strong monotonicity, anonymity, consistency and
//! separability.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CheckReport, Grid, Witness, WitnessKind};
use crate::enumerate::snap;
use crate::mechanisms::{Mechanism, MechanismError};
use crate::types::Outcome;

/// Payment agreement tolerance. Threshold payments come out of a bisection,
/// so this sits well above its bracket width.
const PAYMENT_TOL: f64 = 1e-7;

fn witness(kind: WitnessKind, reports: Vec<Vec<f64>>) -> Witness {
    Witness {
        kind,
        valuations: Vec::new(),
        reports,
        utilities: Vec::new(),
        deviator: None,
    }
}

/// Runs `cases` in parallel and returns the first violation by index.
fn first_violation<T, F>(cases: &[T], check: F) -> Result<Option<(usize, Witness)>, MechanismError>
where
    T: Sync,
    F: Fn(&T) -> Result<Option<Witness>, MechanismError> + Sync,
{
    cases
        .par_iter()
        .enumerate()
        .map(|(i, c)| check(c).map(|w| w.map(|w| (i, w))))
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        })
        .transpose()
        .map(Option::flatten)
}

fn finish(hit: Option<(usize, Witness)>, total: usize, started: Instant) -> CheckReport {
    let examined = hit.as_ref().map_or(total, |(i, _)| i + 1) as u64;
    CheckReport::finish(hit.map(|(_, w)| w), examined, started)
}

/// Description of the first way `b -> b2` (with `b <= b2`) breaks strong
/// monotonicity, if any.
pub(crate) fn monotonicity_violation(
    mechanism: &dyn Mechanism,
    b: &[f64],
    b2: &[f64],
    check_payments: bool,
) -> Result<Option<String>, MechanismError> {
    let before = mechanism.run(b)?;
    let after = mechanism.run(b2)?;
    for &w in &before.winners {
        if !after.is_winner(w) {
            return Ok(Some(format!("identity {w} dropped from the winner set")));
        }
        if check_payments && after.payments[w] > before.payments[w] + PAYMENT_TOL {
            return Ok(Some(format!(
                "payment of identity {w} rose from {} to {}",
                before.payments[w], after.payments[w]
            )));
        }
    }
    Ok(None)
}

/// Random pairs `b <= b'` on the grid with up to `grid.max_agents`
/// identities. Winner sets must be nested; with `check_payments`, no common
/// winner may pay more under `b'`.
pub fn check_strong_monotonic(
    mechanism: &dyn Mechanism,
    samples: usize,
    grid: &Grid,
    seed: u64,
    check_payments: bool,
) -> Result<CheckReport, MechanismError> {
    let started = Instant::now();
    let values = grid.values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..samples)
        .map(|_| {
            let n = rng.gen_range(1..=grid.max_agents.max(1));
            let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..values.len())).collect();
            let b: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
            // Raise a random subset of coordinates to a higher grid point.
            let b2 = idx
                .iter()
                .map(|&i| {
                    if rng.gen_bool(0.5) {
                        values[rng.gen_range(i..values.len())]
                    } else {
                        values[i]
                    }
                })
                .collect();
            (b, b2)
        })
        .collect();
    let hit = first_violation(&pairs, |(b, b2)| {
        Ok(monotonicity_violation(mechanism, b, b2, check_payments)?
            .map(|_| witness(WitnessKind::StrongMonotonicity, vec![b.clone(), b2.clone()])))
    })?;
    Ok(finish(hit, samples, started))
}

/// Sorted `(bid, served, payment)` triples.
fn triples(bids: &[f64], out: &Outcome) -> Vec<(f64, bool, f64)> {
    let mut t: Vec<_> = bids
        .iter()
        .enumerate()
        .map(|(i, &b)| (b, out.is_winner(i), out.payments[i]))
        .collect();
    t.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then(x.1.cmp(&y.1))
            .then(x.2.total_cmp(&y.2))
    });
    t
}

/// Whether `b` and its permutation produce the same multiset of per-identity
/// results. Equal bids may trade places; everything else must follow its bid.
pub(crate) fn same_multiset_outcome(
    mechanism: &dyn Mechanism,
    b: &[f64],
    permuted: &[f64],
) -> Result<bool, MechanismError> {
    let a = triples(b, &mechanism.run(b)?);
    let c = triples(permuted, &mechanism.run(permuted)?);
    Ok(a.len() == c.len()
        && a.iter()
            .zip(&c)
            .all(|(x, y)| x.0 == y.0 && x.1 == y.1 && (x.2 - y.2).abs() <= PAYMENT_TOL))
}

/// Whether the outcome on `padded` (which is `b` followed by zeros) agrees
/// with the outcome on `b` for the original identities.
pub(crate) fn restriction_matches(
    mechanism: &dyn Mechanism,
    b: &[f64],
    padded: &[f64],
) -> Result<bool, MechanismError> {
    let short = mechanism.run(b)?;
    let long = mechanism.run(padded)?;
    Ok((0..b.len()).all(|i| {
        short.is_winner(i) == long.is_winner(i)
            && (short.payments[i] - long.payments[i]).abs() <= PAYMENT_TOL
    }))
}

/// Random profiles, one random permutation and one zero-padding each.
/// Profiles draw from a coarse grid so that ties are common.
pub fn check_anonymity_consistency(
    mechanism: &dyn Mechanism,
    samples: usize,
    seed: u64,
) -> Result<CheckReport, MechanismError> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..samples)
        .map(|_| {
            let b = random_profile(&mut rng, 6);
            let mut permuted = b.clone();
            permuted.shuffle(&mut rng);
            let mut padded = b.clone();
            padded.extend(std::iter::repeat_n(0.0, rng.gen_range(1..=3)));
            (b, permuted, padded)
        })
        .collect();
    let hit = first_violation(&cases, |(b, permuted, padded)| {
        if !same_multiset_outcome(mechanism, b, permuted)? {
            return Ok(Some(witness(
                WitnessKind::Anonymity,
                vec![b.clone(), permuted.clone()],
            )));
        }
        if !restriction_matches(mechanism, b, padded)? {
            return Ok(Some(witness(
                WitnessKind::Consistency,
                vec![b.clone(), padded.clone()],
            )));
        }
        Ok(None)
    })?;
    Ok(finish(hit, samples, started))
}

/// Up to `max_n` bids drawn from `{0, 0.05, ..., 1.5}`.
pub(crate) fn random_profile(rng: &mut ChaCha8Rng, max_n: usize) -> Vec<f64> {
    let n = rng.gen_range(1..=max_n);
    (0..n)
        .map(|_| snap(rng.gen_range(0..=30) as f64 * 0.05))
        .collect()
}

pub(crate) fn payments_differ_on_same_set(a: &Outcome, b: &Outcome) -> bool {
    a.winners == b.winners
        && a.payments.len() == b.payments.len()
        && a.winners
            .iter()
            .any(|&w| (a.payments[w] - b.payments[w]).abs() > PAYMENT_TOL)
}

/// Separability: payments depend on the winner set only. Each random profile
/// is compared with a copy whose winners bid higher; pairs whose winner sets
/// differ are skipped. This stands in for a coalition search.
pub fn check_separable(
    mechanism: &dyn Mechanism,
    samples: usize,
    seed: u64,
) -> Result<CheckReport, MechanismError> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(Vec<f64>, Vec<f64>)> = (0..samples)
        .map(|_| {
            let b = random_profile(&mut rng, 6);
            let bumps: Vec<f64> = b
                .iter()
                .map(|_| rng.gen_range(0..=10) as f64 * 0.05)
                .collect();
            (b, bumps)
        })
        .collect();
    let hit = first_violation(&cases, |(b, bumps)| {
        let out = mechanism.run(b)?;
        let raised: Vec<f64> = b
            .iter()
            .zip(bumps)
            .enumerate()
            .map(|(i, (&x, &d))| if out.is_winner(i) { x + d } else { x })
            .collect();
        let other = mechanism.run(&raised)?;
        Ok(payments_differ_on_same_set(&out, &other)
            .then(|| witness(WitnessKind::Separability, vec![b.clone(), raised])))
    })?;
    Ok(finish(hit, samples, started)
        .with_note("separability proxy: payments compared across profiles with equal winner sets"))
}
