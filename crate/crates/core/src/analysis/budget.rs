//! Budget classification: do payments cover the cost of the served set?

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Grid;
use crate::enumerate::multisets;
use crate::mechanisms::{Mechanism, MechanismError};
use crate::TAU;

/// Ordered from worst to best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BudgetClass {
    Deficit,
    NoDeficit,
    BudgetBalanced,
}

pub fn classify_budget(total_payment: f64, cost: f64) -> BudgetClass {
    if total_payment < cost - TAU {
        BudgetClass::Deficit
    } else if total_payment <= cost + TAU {
        BudgetClass::BudgetBalanced
    } else {
        BudgetClass::NoDeficit
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    /// Worst class over all profiles.
    pub worst: BudgetClass,
    /// First profile (in enumeration order) of the worst class.
    pub witness: Vec<f64>,
    pub deficit: u64,
    pub no_deficit: u64,
    pub budget_balanced: u64,
    pub elapsed_ms: u64,
}

impl BudgetReport {
    pub fn cases_examined(&self) -> u64 {
        self.deficit + self.no_deficit + self.budget_balanced
    }
}

/// Classifies the given bid profiles.
pub fn check_budget_profiles(
    mechanism: &dyn Mechanism,
    profiles: &[Vec<f64>],
) -> Result<BudgetReport, MechanismError> {
    let started = Instant::now();
    let classes: Vec<BudgetClass> = profiles
        .par_iter()
        .map(|b| {
            let out = mechanism.run(b)?;
            let cost = mechanism.cost().cost_of(out.winners.len())?;
            Ok(classify_budget(out.total_payment(), cost))
        })
        .collect::<Result<_, MechanismError>>()?;
    let worst = classes
        .iter()
        .copied()
        .min()
        .unwrap_or(BudgetClass::BudgetBalanced);
    let witness = classes
        .iter()
        .position(|&c| c == worst)
        .map(|i| profiles[i].clone())
        .unwrap_or_default();
    let count = |k: BudgetClass| classes.iter().filter(|&&c| c == k).count() as u64;
    Ok(BudgetReport {
        worst,
        witness,
        deficit: count(BudgetClass::Deficit),
        no_deficit: count(BudgetClass::NoDeficit),
        budget_balanced: count(BudgetClass::BudgetBalanced),
        elapsed_ms: started.elapsed().as_millis() as u64,
    })
}

/// Every bid multiset on the grid with `1..=grid.max_agents` identities.
pub fn check_budget(
    mechanism: &dyn Mechanism,
    grid: &Grid,
) -> Result<BudgetReport, MechanismError> {
    let values = grid.values();
    let profiles: Vec<Vec<f64>> = (1..=grid.max_agents)
        .flat_map(|n| multisets(&values, n))
        .collect();
    check_budget_profiles(mechanism, &profiles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostFunction;
    use crate::mechanisms::MechanismId;

    fn grid() -> Grid {
        Grid::new(0.1, 1.2, 1, 4).unwrap()
    }

    #[test]
    fn classes() {
        assert_eq!(classify_budget(0.0, 1.0), BudgetClass::Deficit);
        assert_eq!(classify_budget(1.0, 1.0), BudgetClass::BudgetBalanced);
        assert_eq!(classify_budget(1.5, 1.0), BudgetClass::NoDeficit);
        assert!(BudgetClass::Deficit < BudgetClass::NoDeficit);
    }

    #[test]
    fn shapley_balances_everywhere() {
        for cost in [
            CostFunction::constant(1.0),
            CostFunction::concave(vec![0.0, 1.0, 1.4, 1.7, 1.9]),
        ] {
            let m = MechanismId::Shapley.with_cost(cost).unwrap();
            let r = check_budget(&m, &grid()).unwrap();
            assert_eq!(r.worst, BudgetClass::BudgetBalanced);
            assert_eq!(r.cases_examined(), r.budget_balanced);
        }
    }

    #[test]
    fn osp_and_potential_never_run_a_deficit() {
        for id in [MechanismId::OptimalSybilProof, MechanismId::Potential] {
            let m = id.with_cost(CostFunction::constant(1.0)).unwrap();
            let r = check_budget(&m, &grid()).unwrap();
            assert_eq!(r.deficit, 0, "{id}: {:?}", r.witness);
            assert_eq!(r.worst, BudgetClass::NoDeficit);
        }
    }

    #[test]
    fn vcg_deficit_witness() {
        let m = MechanismId::Vcg
            .with_cost(CostFunction::constant(1.0))
            .unwrap();
        let r = check_budget_profiles(&m, &[vec![1.0, 1.0]]).unwrap();
        assert_eq!(r.worst, BudgetClass::Deficit);
        assert_eq!(r.witness, vec![1.0, 1.0]);
        assert_eq!(
            check_budget(&m, &grid()).unwrap().worst,
            BudgetClass::Deficit
        );
    }
}
