use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{approx_ratio, Ratio};
use crate::analysis::Grid;
use crate::enumerate::{merge_values, multisets};
use crate::mechanisms::{Mechanism, MechanismError};

/// Offset of the extremal profiles below their knife edges.
pub const WITNESS_DELTA: f64 = 1e-6;

/// Infinite-ratio profiles kept in a report.
const MAX_INFINITE_WITNESSES: usize = 16;

/// `1/i - delta` for `i = 1..=n`, plus `1/2 - delta` and `1 - delta`.
pub fn witness_points(n: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = (1..=n.max(2))
        .map(|i| 1.0 / i as f64 - WITNESS_DELTA)
        .collect();
    pts.push(0.5 - WITNESS_DELTA);
    pts.push(1.0 - WITNESS_DELTA);
    merge_values(&[], &pts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCase {
    pub n: usize,
    /// Largest finite ratio.
    pub ratio: f64,
    /// First profile (ascending values, lexicographic order) attaining it.
    pub witness: Vec<f64>,
    /// Profiles whose optimum is free but whose allocation is not.
    pub infinite_witnesses: Vec<Vec<f64>>,
    pub infinite_count: u64,
    pub cases_examined: u64,
    pub elapsed_ms: u64,
}

struct Partial {
    ratio: f64,
    witness: Vec<f64>,
    infinite: Vec<Vec<f64>>,
    infinite_count: u64,
    cases: u64,
}

impl Partial {
    fn merge(mut self, later: Partial) -> Partial {
        if later.ratio > self.ratio {
            self.ratio = later.ratio;
            self.witness = later.witness;
        }
        let room = MAX_INFINITE_WITNESSES.saturating_sub(self.infinite.len());
        self.infinite.extend(later.infinite.into_iter().take(room));
        self.infinite_count += later.infinite_count;
        self.cases += later.cases;
        self
    }
}

/// Maximum approximation ratio over all `n`-agent valuation multisets drawn
/// from the grid plus [`witness_points`]. Ties keep the lexicographically
/// first profile.
pub fn worst_case_ratio(
    mechanism: &dyn Mechanism,
    n: usize,
    grid: &Grid,
) -> Result<WorstCase, MechanismError> {
    let started = Instant::now();
    if n == 0 {
        return Ok(WorstCase {
            n,
            ratio: 1.0,
            witness: Vec::new(),
            infinite_witnesses: Vec::new(),
            infinite_count: 0,
            cases_examined: 1,
            elapsed_ms: 0,
        });
    }
    let values = merge_values(&grid.values(), &witness_points(n));
    let empty = || Partial {
        ratio: f64::NEG_INFINITY,
        witness: Vec::new(),
        infinite: Vec::new(),
        infinite_count: 0,
        cases: 0,
    };

    // One job per smallest value; its profiles continue over the values above it.
    let parts: Vec<Partial> = (0..values.len())
        .into_par_iter()
        .map(|first| {
            let mut acc = empty();
            let mut v = Vec::with_capacity(n);
            for tail in multisets(&values[first..], n - 1) {
                v.clear();
                v.push(values[first]);
                v.extend_from_slice(&tail);
                acc.cases += 1;
                match approx_ratio(mechanism, &v)?.ratio {
                    Ratio::Finite(r) => {
                        if r > acc.ratio {
                            acc.ratio = r;
                            acc.witness = v.clone();
                        }
                    }
                    Ratio::Infinite => {
                        acc.infinite_count += 1;
                        if acc.infinite.len() < MAX_INFINITE_WITNESSES {
                            acc.infinite.push(v.clone());
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_, MechanismError>>()?;
    let total = parts.into_iter().fold(empty(), Partial::merge);
    Ok(WorstCase {
        n,
        ratio: total.ratio,
        witness: total.witness,
        infinite_witnesses: total.infinite,
        infinite_count: total.infinite_count,
        cases_examined: total.cases,
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}
