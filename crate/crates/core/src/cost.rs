//! Symmetric cost functions `C(S) = f(|S|)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::TAU;

/// Largest identity count a table-backed cost function answers for.
pub const N_MAX: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("cost requested for {k} identities but the table is capped at {cap}")]
    OutOfRange { k: usize, cap: usize },
}

/// Cost of serving a set of identities, which only depends on the set size.
///
/// A `Concave` table lists `f(0), f(1), ..., f(m)`. Sizes beyond the last
/// entry (up to [`N_MAX`]) reuse the last value, which keeps `f`
/// non-decreasing and concave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CostFunction {
    Constant { c: f64 },
    Concave { f: Vec<f64> },
}

impl CostFunction {
    pub fn constant(c: f64) -> Self {
        CostFunction::Constant { c }
    }

    pub fn concave(f: Vec<f64>) -> Self {
        CostFunction::Concave { f }
    }

    /// `C(S)` for `|S| = k`.
    pub fn cost_of(&self, k: usize) -> Result<f64, CostError> {
        match self {
            CostFunction::Constant { c } => Ok(if k == 0 { 0.0 } else { *c }),
            CostFunction::Concave { f } => {
                if k > N_MAX {
                    return Err(CostError::OutOfRange { k, cap: N_MAX });
                }
                if k == 0 {
                    return Ok(0.0);
                }
                Ok(match f.get(k) {
                    Some(v) => *v,
                    None => f.last().copied().unwrap_or(0.0),
                })
            }
        }
    }

    /// `f(1)`, the stand-alone cost of serving a single identity.
    pub fn single(&self) -> f64 {
        self.cost_of(1).unwrap_or(0.0)
    }

    /// Per-identity share `f(k)/k`; zero for `k = 0`.
    pub fn share(&self, k: usize) -> Result<f64, CostError> {
        if k == 0 {
            return Ok(0.0);
        }
        Ok(self.cost_of(k)? / k as f64)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CostFunction::Constant { .. })
    }

    /// Short label used in CSV output.
    pub fn kind(&self) -> &'static str {
        match self {
            CostFunction::Constant { .. } => "constant",
            CostFunction::Concave { .. } => "concave",
        }
    }

    /// Largest identity count this cost function answers for.
    pub fn capacity(&self) -> usize {
        match self {
            CostFunction::Constant { .. } => usize::MAX,
            CostFunction::Concave { .. } => N_MAX,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_cost_function(self)
    }
}

/// One violated assumption on a cost function.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum CostViolation {
    NonPositiveConstant {
        c: f64,
    },
    NotFinite {
        index: usize,
    },
    EmptyTable,
    NonZeroAtEmpty {
        value: f64,
    },
    Decreasing {
        k: usize,
        before: f64,
        after: f64,
    },
    NotConcave {
        k: usize,
        increment: f64,
        previous: f64,
    },
    TableTooLong {
        len: usize,
        cap: usize,
    },
}

impl std::fmt::Display for CostViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CostViolation::NonPositiveConstant { c } => {
                write!(f, "constant cost must be positive, got {c}")
            }
            CostViolation::NotFinite { index } => write!(f, "entry {index} is not finite"),
            CostViolation::EmptyTable => f.write_str("cost table is empty"),
            CostViolation::NonZeroAtEmpty { value } => write!(f, "f(0) must be 0, got {value}"),
            CostViolation::Decreasing { k, before, after } => {
                write!(f, "f decreases at {k}: {before} -> {after}")
            }
            CostViolation::NotConcave {
                k,
                increment,
                previous,
            } => {
                write!(
                    f,
                    "f is not concave at {k}: increment {increment} exceeds {previous}"
                )
            }
            CostViolation::TableTooLong { len, cap } => {
                write!(f, "table has {len} entries, cap is {cap}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<CostViolation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Reports every violated invariant of `cost` rather than stopping at the first.
pub fn validate_cost_function(cost: &CostFunction) -> ValidationReport {
    let mut violations = Vec::new();
    match cost {
        CostFunction::Constant { c } => {
            if !c.is_finite() {
                violations.push(CostViolation::NotFinite { index: 0 });
            } else if *c <= 0.0 {
                violations.push(CostViolation::NonPositiveConstant { c: *c });
            }
        }
        CostFunction::Concave { f } => {
            if f.is_empty() {
                violations.push(CostViolation::EmptyTable);
            }
            if f.len() > N_MAX + 1 {
                violations.push(CostViolation::TableTooLong {
                    len: f.len(),
                    cap: N_MAX + 1,
                });
            }
            for (index, v) in f.iter().enumerate() {
                if !v.is_finite() {
                    violations.push(CostViolation::NotFinite { index });
                }
            }
            if let Some(&f0) = f.first() {
                if f0.abs() > TAU {
                    violations.push(CostViolation::NonZeroAtEmpty { value: f0 });
                }
            }
            for k in 1..f.len() {
                if f[k] < f[k - 1] - TAU {
                    violations.push(CostViolation::Decreasing {
                        k,
                        before: f[k - 1],
                        after: f[k],
                    });
                }
            }
            for k in 1..f.len().saturating_sub(1) {
                let previous = f[k] - f[k - 1];
                let increment = f[k + 1] - f[k];
                if increment > previous + TAU {
                    violations.push(CostViolation::NotConcave {
                        k: k + 1,
                        increment,
                        previous,
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}
