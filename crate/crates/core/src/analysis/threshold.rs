//! Threshold (infimum winning) bids.

use serde::{Deserialize, Serialize};

use crate::mechanisms::{Mechanism, MechanismError};

/// Default bracket width at which bisection stops early.
pub const THRESHOLD_TOL: f64 = 1e-12;

const SCAN_POINTS: usize = 64;
const BISECTION_STEPS: usize = 60;

/// Least bid at which an identity wins, or `Never` if it loses everywhere
/// up to the search bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Threshold {
    Finite(f64),
    Never,
}

impl Threshold {
    pub fn value(self) -> f64 {
        match self {
            Threshold::Finite(t) => t,
            Threshold::Never => f64::INFINITY,
        }
    }
}

/// Infimum of the bids in `[0, hi]` at which `wins` holds.
///
/// A coarse scan first looks for a win followed by a loss at a higher bid and
/// reports it as [`MechanismError::NonMonotone`]; the crossing is then
/// refined by bisection.
pub fn infimum_winning_bid<F>(
    identity: usize,
    hi: f64,
    tol: f64,
    mut wins: F,
) -> Result<Threshold, MechanismError>
where
    F: FnMut(f64) -> Result<bool, MechanismError>,
{
    let mut first_win: Option<(usize, f64)> = None;
    for k in 0..=SCAN_POINTS {
        let x = hi * k as f64 / SCAN_POINTS as f64;
        let w = wins(x)?;
        match (first_win, w) {
            (None, true) => first_win = Some((k, x)),
            (Some((_, won_at)), false) => {
                return Err(MechanismError::NonMonotone {
                    identity,
                    won_at,
                    lost_at: x,
                });
            }
            _ => {}
        }
    }
    let Some((k, mut upper)) = first_win else {
        return Ok(Threshold::Never);
    };
    if k == 0 {
        return Ok(Threshold::Finite(0.0));
    }
    let mut lower = hi * (k - 1) as f64 / SCAN_POINTS as f64;
    for _ in 0..BISECTION_STEPS {
        if upper - lower <= tol {
            break;
        }
        let mid = 0.5 * (lower + upper);
        if wins(mid)? {
            upper = mid;
        } else {
            lower = mid;
        }
    }
    Ok(Threshold::Finite(upper))
}

/// Least bid in the winning interval that contains `bid`: the lowest report
/// down to which the identity keeps winning. Agrees with
/// [`infimum_winning_bid`] whenever the win region is monotone.
pub fn continuation_threshold<F>(bid: f64, tol: f64, mut wins: F) -> Result<f64, MechanismError>
where
    F: FnMut(f64) -> Result<bool, MechanismError>,
{
    let mut upper = bid;
    let mut lower = None;
    for k in (0..SCAN_POINTS).rev() {
        let x = bid * k as f64 / SCAN_POINTS as f64;
        if wins(x)? {
            upper = x;
        } else {
            lower = Some(x);
            break;
        }
    }
    let Some(mut lower) = lower else {
        return Ok(0.0);
    };
    for _ in 0..BISECTION_STEPS {
        if upper - lower <= tol {
            break;
        }
        let mid = 0.5 * (lower + upper);
        if wins(mid)? {
            upper = mid;
        } else {
            lower = mid;
        }
    }
    Ok(upper)
}

/// Threshold bid of identity `i` against `b_minus_i`, with `i` inserted at
/// position `i` of the bid vector.
pub fn threshold_payment(
    mechanism: &dyn Mechanism,
    i: usize,
    b_minus_i: &[f64],
    tol: f64,
) -> Result<Threshold, MechanismError> {
    if i > b_minus_i.len() {
        return Err(MechanismError::NoSuchIdentity {
            identity: i,
            len: b_minus_i.len() + 1,
        });
    }
    crate::types::check_bids(b_minus_i)?;
    let n = b_minus_i.len() + 1;
    let top = b_minus_i.iter().copied().fold(0.0, f64::max);
    let hi = top + mechanism.cost().cost_of(n)? + 1.0;
    let mut bids = Vec::with_capacity(n);
    bids.extend_from_slice(&b_minus_i[..i]);
    bids.push(0.0);
    bids.extend_from_slice(&b_minus_i[i..]);
    infimum_winning_bid(i, hi, tol, |x| {
        bids[i] = x;
        Ok(mechanism.run(&bids)?.is_winner(i))
    })
}
