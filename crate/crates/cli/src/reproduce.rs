//! Canned scenarios with their expected numbers.

use serde::Serialize;
use sybilshare::analysis::Grid;
use sybilshare::mechanisms::fixtures::AllOrNothing;
use sybilshare::welfare::{
    approx_ratio, check_swi_shapley, sybil_social_cost, truthful_social_cost, worst_case_ratio,
};
use sybilshare::{
    agent_utility, harmonic, run_sybil_extension, CostFunction, Mechanism, MechanismError,
    MechanismId, SybilProfile,
};

use crate::UsageError;

pub const CASES: [&str; 7] = [
    "vcg-sybil",
    "shapley-sybil",
    "potential-sybil",
    "osp-worst-case",
    "shapley-worst-case",
    "swi-shapley",
    "nonexcludable-baseline",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Equal,
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseCheck {
    pub name: String,
    pub relation: Relation,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CaseCheck {
    fn new(
        name: impl Into<String>,
        relation: Relation,
        expected: f64,
        observed: f64,
        tolerance: f64,
    ) -> Self {
        let pass = match relation {
            Relation::Equal => (observed - expected).abs() <= tolerance,
            Relation::AtLeast => observed >= expected - tolerance,
            Relation::AtMost => observed <= expected + tolerance,
        };
        CaseCheck {
            name: name.into(),
            relation,
            expected,
            observed,
            tolerance,
            pass,
        }
    }

    fn equal(name: impl Into<String>, expected: f64, observed: f64, tolerance: f64) -> Self {
        CaseCheck::new(name, Relation::Equal, expected, observed, tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub pass: bool,
    pub checks: Vec<CaseCheck>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn unit(id: MechanismId) -> Box<dyn Mechanism> {
    Box::new(
        id.with_cost(CostFunction::constant(1.0))
            .expect("unit cost fits every catalog mechanism"),
    )
}

/// Utility of agent 0 under truthful play and under `deviation`.
fn utilities(
    m: &dyn Mechanism,
    v: &[f64],
    deviation: Vec<f64>,
) -> Result<(f64, f64), MechanismError> {
    let truthful = SybilProfile::truthful(v)?;
    let deviated = truthful.with_agent(0, deviation)?;
    let before = agent_utility(v[0], &run_sybil_extension(m, &truthful)?, 0);
    let after = agent_utility(v[0], &run_sybil_extension(m, &deviated)?, 0);
    Ok((before, after))
}

fn vcg_sybil() -> Result<Vec<CaseCheck>, MechanismError> {
    let third = 1.0 / 3.0;
    let (before, after) = utilities(
        unit(MechanismId::Vcg).as_ref(),
        &[third, third],
        vec![third, 1.0, 1.0],
    )?;
    Ok(vec![
        CaseCheck::equal("truthful utility", 0.0, before, 1e-9),
        CaseCheck::equal("sybil utility (1/3, 1, 1)", third, after, 1e-9),
    ])
}

fn shapley_sybil() -> Result<Vec<CaseCheck>, MechanismError> {
    let eps = 0.01;
    let v = [1.0 + eps, 1.0 / 3.0 - eps, 1.0 / 3.0 - eps];
    let (before, after) = utilities(unit(MechanismId::Shapley).as_ref(), &v, vec![0.25, 0.25])?;
    Ok(vec![
        CaseCheck::equal("truthful utility", 0.01, before, 1e-9),
        CaseCheck::equal("sybil utility (1/4, 1/4)", 0.51, after, 1e-9),
    ])
}

/// Agent 1 of `v = (1+e, 1/2-e, ..., 1/n-e)` adds a second identity bidding
/// `1+e`. Returns (identity payment, truthful utility, Sybil utility).
pub fn potential_sybil_numbers(n: usize, eps: f64) -> Result<(f64, f64, f64), MechanismError> {
    let m = unit(MechanismId::Potential);
    let v: Vec<f64> = (1..=n)
        .map(|i| {
            if i == 1 {
                1.0 + eps
            } else {
                1.0 / i as f64 - eps
            }
        })
        .collect();
    let deviated = SybilProfile::truthful(&v)?.with_agent(0, vec![1.0 + eps, 1.0 + eps])?;
    let out = run_sybil_extension(m.as_ref(), &deviated)?;
    let payment = out.identity.payments[0];
    let (before, after) = utilities(m.as_ref(), &v, vec![1.0 + eps, 1.0 + eps])?;
    Ok((payment, before, after))
}

fn potential_sybil() -> Result<Vec<CaseCheck>, MechanismError> {
    let (n, eps) = (4, 0.001);
    let (payment, before, after) = potential_sybil_numbers(n, eps)?;
    let (_, _, after_small) = potential_sybil_numbers(n, 1e-5)?;
    let limit = 1.0 - 1.0 / (n as f64 + 1.0);
    Ok(vec![
        CaseCheck::equal(
            "identity payment 1/(n+1) - (n-2)e",
            1.0 / (n as f64 + 1.0) - (n as f64 - 2.0) * eps,
            payment,
            1e-9,
        ),
        CaseCheck::equal("truthful utility", eps, before, 1e-9),
        CaseCheck::new(
            "sybil utility positive",
            Relation::AtLeast,
            1e-9,
            after,
            0.0,
        ),
        CaseCheck::equal(
            "sybil utility at e=1e-5 near 1 - 1/(n+1)",
            limit,
            after_small,
            1e-2,
        ),
    ])
}

fn worst_case_grid() -> Grid {
    Grid::new(0.1, 1.2, 1, 1).expect("static grid")
}

fn osp_worst_case() -> Result<Vec<CaseCheck>, MechanismError> {
    let m = unit(MechanismId::OptimalSybilProof);
    let n = 5;
    let eps = 1e-6;
    let mut v = vec![1.0 - eps];
    v.extend(std::iter::repeat_n(0.5 - eps, n - 1));
    let at_witness = approx_ratio(m.as_ref(), &v)?.ratio.value();
    let target = (n as f64 + 1.0) / 2.0;
    let sweep = worst_case_ratio(m.as_ref(), n, &worst_case_grid())?;
    Ok(vec![
        CaseCheck::equal("ratio at (1-e, 1/2-e, ...)", target, at_witness, 1e-4),
        CaseCheck::new(
            "sweep ratio lower",
            Relation::AtLeast,
            target,
            sweep.ratio,
            0.01,
        ),
        CaseCheck::new(
            "sweep ratio upper",
            Relation::AtMost,
            target,
            sweep.ratio,
            1e-7,
        ),
    ])
}

fn shapley_worst_case() -> Result<Vec<CaseCheck>, MechanismError> {
    let m = unit(MechanismId::Shapley);
    let n = 5;
    let v: Vec<f64> = (1..=n).map(|i| 1.0 / i as f64 - 1e-6).collect();
    let at_witness = approx_ratio(m.as_ref(), &v)?.ratio.value();
    let sweep = worst_case_ratio(m.as_ref(), n, &worst_case_grid())?;
    Ok(vec![
        CaseCheck::equal("ratio at (1/i - 1e-6)", harmonic(n), at_witness, 1e-4),
        CaseCheck::new(
            "sweep ratio lower",
            Relation::AtLeast,
            harmonic(n),
            sweep.ratio,
            0.01,
        ),
        CaseCheck::new(
            "sweep ratio upper",
            Relation::AtMost,
            harmonic(n),
            sweep.ratio,
            1e-7,
        ),
    ])
}

fn swi_shapley() -> Result<Vec<CaseCheck>, MechanismError> {
    let eps = 0.01;
    let v = [1.0 + eps, 1.0 / 3.0 - eps, 1.0 / 3.0 - eps];
    let cost = CostFunction::constant(1.0);
    let report = check_swi_shapley(&cost, &v, 0.05, 3)?;
    let m = MechanismId::Shapley.with_cost(cost)?;
    let truthful = truthful_social_cost(&m, &v)?;
    let split = SybilProfile::truthful(&v)?.with_agent(0, vec![0.25, 0.25])?;
    let sybil = sybil_social_cost(&m, &v, &split)?;
    Ok(vec![
        CaseCheck::equal(
            "violations over B(v) profiles",
            0.0,
            if report.passed() { 0.0 } else { 1.0 },
            0.0,
        ),
        CaseCheck::equal("truthful social cost", 1.0 + 2.0 * v[1], truthful, 1e-9),
        CaseCheck::new(
            "social cost after the split",
            Relation::AtMost,
            truthful,
            sybil,
            1e-7,
        ),
    ])
}

fn nonexcludable_baseline() -> Result<Vec<CaseCheck>, MechanismError> {
    let m = AllOrNothing::unit();
    let eps = 1e-3;
    let mut checks = Vec::new();
    for n in 2..=6 {
        let mut v = vec![1.0 - eps; n];
        v[n - 1] = 1.0 / n as f64 - eps;
        let r = approx_ratio(&m, &v)?.ratio.value();
        checks.push(CaseCheck::new(
            format!("n={n} ratio at the witness"),
            Relation::AtLeast,
            n as f64 - 1.0 + 1.0 / n as f64,
            r,
            0.01,
        ));
    }
    Ok(checks)
}

pub fn reproduce(case: &str) -> Result<CaseReport, anyhow::Error> {
    let checks = match case {
        "vcg-sybil" => vcg_sybil()?,
        "shapley-sybil" => shapley_sybil()?,
        "potential-sybil" => potential_sybil()?,
        "osp-worst-case" => osp_worst_case()?,
        "shapley-worst-case" => shapley_worst_case()?,
        "swi-shapley" => swi_shapley()?,
        "nonexcludable-baseline" => nonexcludable_baseline()?,
        other => {
            return Err(UsageError(format!(
                "unknown case `{other}` (expected one of: {}, all)",
                CASES.join(", ")
            ))
            .into());
        }
    };
    let mut notes = Vec::new();
    if case == "potential-sybil" {
        notes.push(
            "the Clarke-pivot payment for this profile works out to 1/(n+1) + (n-1)e, and the Sybil utility tends to \
             1 - 2/(n+1); the expected values are the reference ones"
                .to_string(),
        );
    }
    if case == "nonexcludable-baseline" {
        notes.push(
            "the lower bound over all truthful no-deficit mechanisms is a universal statement; this case evaluates one \
             serve-all-or-none mechanism at the witness profile"
                .to_string(),
        );
    }
    Ok(CaseReport {
        case: case.to_string(),
        pass: checks.iter().all(|c| c.pass),
        checks,
        notes,
    })
}
