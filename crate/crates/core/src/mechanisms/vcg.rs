use crate::types::Outcome;
use crate::TAU;

/// VCG for a public excludable good of cost `c`.
///
/// Everyone is served iff the bids sum strictly above `c`; identity `i` then
/// pays its externality `max(0, c - sum of the other bids)`.
pub fn run_vcg(bids: &[f64], c: f64) -> Outcome {
    let n = bids.len();
    let total: f64 = bids.iter().sum();
    if n == 0 || total - c <= TAU {
        return Outcome::empty(n);
    }
    let payments = bids.iter().map(|b| (c - (total - b)).max(0.0)).collect();
    Outcome::from_parts((0..n).collect(), payments)
}
