use super::descending_order;
use crate::types::Outcome;
use crate::TAU;

/// Optimal Sybil-proof mechanism for constant cost `c`.
///
/// Bidders at or above `c/2` are served at `c/2` each when there are at
/// least two of them. A lone such bidder is served at price `c` only if it
/// bid at least `c`; otherwise nobody is served.
pub fn run_optimal_sybil_proof(bids: &[f64], c: f64) -> Outcome {
    let n = bids.len();
    let order = descending_order(bids);
    let half = c / 2.0;
    let k = order.iter().take_while(|&&i| bids[i] >= half - TAU).count();
    let mut payments = vec![0.0; n];
    match k {
        0 => Outcome::empty(n),
        1 => {
            let top = order[0];
            if bids[top] >= c - TAU {
                payments[top] = c;
                Outcome::from_parts(vec![top], payments)
            } else {
                Outcome::empty(n)
            }
        }
        _ => {
            for &i in &order[..k] {
                payments[i] = half;
            }
            Outcome::from_parts(order[..k].to_vec(), payments)
        }
    }
}
