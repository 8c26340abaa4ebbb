use super::{argmax_largest, descending_order, MechanismError};
use crate::analysis::threshold::{continuation_threshold, THRESHOLD_TOL};
use crate::cost::CostFunction;
use crate::types::Outcome;
use crate::TAU;

/// Winner set of the hybrid rule, as identity indices by descending bid.
///
/// Start from the surplus-maximising set `S*` (a top-bidder prefix, larger on
/// ties), then repeatedly drop the lowest bidder below `C(S*)/|S|`. The
/// numerator stays at the cost of the original `S*`.
pub fn hybrid_allocation(bids: &[f64], cost: &CostFunction) -> Result<Vec<usize>, MechanismError> {
    allocate(bids, cost, true)
}

/// Same removal loop against the current set's cost, `C(S)/|S|`.
pub fn hybrid_allocation_current_cost(
    bids: &[f64],
    cost: &CostFunction,
) -> Result<Vec<usize>, MechanismError> {
    allocate(bids, cost, false)
}

fn allocate(bids: &[f64], cost: &CostFunction, fixed: bool) -> Result<Vec<usize>, MechanismError> {
    let order = descending_order(bids);
    let mut surplus = Vec::with_capacity(bids.len() + 1);
    surplus.push(0.0);
    let mut sum = 0.0;
    for (k, &i) in order.iter().enumerate() {
        sum += bids[i];
        surplus.push(sum - cost.cost_of(k + 1)?);
    }
    let best = argmax_largest(&surplus);
    let base_cost = cost.cost_of(best)?;
    let mut size = best;
    while size > 0 {
        let numerator = if fixed {
            base_cost
        } else {
            cost.cost_of(size)?
        };
        if bids[order[size - 1]] >= numerator / size as f64 - TAU {
            break;
        }
        size -= 1;
    }
    Ok(order[..size].to_vec())
}

/// Hybrid mechanism; each winner pays the least bid down to which it would
/// continue to win with everyone else's bid held fixed.
pub fn run_hybrid(bids: &[f64], cost: &CostFunction) -> Result<Outcome, MechanismError> {
    let n = bids.len();
    let winners = hybrid_allocation(bids, cost)?;
    if winners.is_empty() {
        return Ok(Outcome::empty(n));
    }
    let mut payments = vec![0.0; n];
    let mut probe = bids.to_vec();
    for &i in &winners {
        let t = continuation_threshold(bids[i], THRESHOLD_TOL, |x| {
            probe[i] = x;
            let won = hybrid_allocation(&probe, cost).map(|w| w.contains(&i));
            probe[i] = bids[i];
            won
        })?;
        payments[i] = t.min(bids[i]);
    }
    Ok(Outcome::from_parts(winners, payments))
}
