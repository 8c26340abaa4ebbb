use super::{argmax_largest, descending_order, HarmonicTable};
use crate::types::Outcome;

/// Best value of `sum_{i in S} b_i - H_|S|` over top-bidder prefixes,
/// returned as `(k, value)` with ties going to the larger prefix.
fn best_prefix(sorted_desc: &[f64], h: &HarmonicTable) -> (usize, f64) {
    let mut values = Vec::with_capacity(sorted_desc.len() + 1);
    let mut sum = 0.0;
    values.push(0.0);
    for (k, b) in sorted_desc.iter().enumerate() {
        sum += b;
        values.push(sum - h.get(k + 1));
    }
    let k = argmax_largest(&values);
    (k, values[k])
}

/// Potential mechanism for unit cost.
///
/// Serves the set maximising `sum b_i - H_|S|` and charges each winner the
/// Clarke pivot: the best value without it, minus the others' value in the
/// chosen set.
pub fn run_potential(bids: &[f64]) -> Outcome {
    let n = bids.len();
    let h = HarmonicTable::new(n);
    let order = descending_order(bids);
    let sorted: Vec<f64> = order.iter().map(|&i| bids[i]).collect();
    let (k, _) = best_prefix(&sorted, &h);
    if k == 0 {
        return Outcome::empty(n);
    }
    let winners = &order[..k];
    let winners_sum: f64 = sorted[..k].iter().sum();
    let mut payments = vec![0.0; n];
    for &i in winners {
        let without: Vec<f64> = order
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| bids[j])
            .collect();
        let (_, best_without) = best_prefix(&without, &h);
        let others_in_choice = winners_sum - bids[i] - h.get(k);
        // Tolerance-level ties can push the pivot a hair outside [0, b_i].
        payments[i] = (best_without - others_in_choice).clamp(0.0, bids[i]);
    }
    Outcome::from_parts(winners.to_vec(), payments)
}
