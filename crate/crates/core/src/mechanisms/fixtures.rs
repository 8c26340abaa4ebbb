//! Reference mechanisms outside the catalog, used as negative controls and
//! baselines by the analysis suite.

use super::{run_shapley, Mechanism, MechanismError};
use crate::cost::CostFunction;
use crate::types::{check_bids, Outcome};
use crate::TAU;

/// Shapley allocation, but every winner pays its own bid. Not truthful.
#[derive(Debug, Clone)]
pub struct FirstPriceShapley {
    pub cost: CostFunction,
}

impl Mechanism for FirstPriceShapley {
    fn name(&self) -> String {
        "first-price-shapley".into()
    }

    fn cost(&self) -> &CostFunction {
        &self.cost
    }

    fn run(&self, bids: &[f64]) -> Result<Outcome, MechanismError> {
        check_bids(bids)?;
        let mut out = run_shapley(bids, &self.cost)?;
        for &w in &out.winners {
            out.payments[w] = bids[w];
        }
        Ok(out)
    }
}

/// Non-excludable baseline: serve everyone iff every bid covers `c/n`, each
/// paying `c/n`; otherwise serve nobody. Truthful and budget-balanced.
#[derive(Debug, Clone)]
pub struct AllOrNothing {
    pub cost: CostFunction,
}

impl AllOrNothing {
    pub fn unit() -> Self {
        AllOrNothing {
            cost: CostFunction::constant(1.0),
        }
    }
}

impl Mechanism for AllOrNothing {
    fn name(&self) -> String {
        "all-or-nothing".into()
    }

    fn cost(&self) -> &CostFunction {
        &self.cost
    }

    fn run(&self, bids: &[f64]) -> Result<Outcome, MechanismError> {
        check_bids(bids)?;
        let n = bids.len();
        if n == 0 {
            return Ok(Outcome::empty(0));
        }
        let share = self.cost.share(n)?;
        if bids.iter().all(|&b| b >= share - TAU) {
            Ok(Outcome::from_parts((0..n).collect(), vec![share; n]))
        } else {
            Ok(Outcome::empty(n))
        }
    }
}
