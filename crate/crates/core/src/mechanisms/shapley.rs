use super::{descending_order, MechanismError};
use crate::cost::CostFunction;
use crate::types::Outcome;
use crate::TAU;

/// Size of the Shapley winner set: the largest `k` such that the `k`-th
/// highest bid covers the equal share `f(k)/k`, or zero.
pub fn shapley_winner_count(
    sorted_desc: &[f64],
    cost: &CostFunction,
) -> Result<usize, MechanismError> {
    let mut k = 0;
    for (i, &b) in sorted_desc.iter().enumerate() {
        if b >= cost.share(i + 1)? - TAU {
            k = i + 1;
        }
    }
    Ok(k)
}

/// Shapley value mechanism: serve the largest top-bidder set whose members
/// all cover the equal share, and charge each of them `f(k)/k`.
pub fn run_shapley(bids: &[f64], cost: &CostFunction) -> Result<Outcome, MechanismError> {
    let n = bids.len();
    let order = descending_order(bids);
    let sorted: Vec<f64> = order.iter().map(|&i| bids[i]).collect();
    let k = shapley_winner_count(&sorted, cost)?;
    if k == 0 {
        return Ok(Outcome::empty(n));
    }
    let share = cost.share(k)?;
    let mut payments = vec![0.0; n];
    for &i in &order[..k] {
        payments[i] = share;
    }
    Ok(Outcome::from_parts(order[..k].to_vec(), payments))
}
