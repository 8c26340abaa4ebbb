//! JSON run configurations and the inline-flag equivalents.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sybilshare::analysis::{Grid, MAX_EXHAUSTIVE_IDENTITIES};
use sybilshare::cost::validate_cost_function;
use sybilshare::{CostFunction, MechanismId};

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Run,
    CheckTruthful,
    CheckSybil,
    WorstCase,
    Swi,
    Reproduce,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Run => "run",
            Mode::CheckTruthful => "check-truthful",
            Mode::CheckSybil => "check-sybil",
            Mode::WorstCase => "worst-case",
            Mode::Swi => "swi",
            Mode::Reproduce => "reproduce",
        }
    }
}

/// Agent counts for a sweep: a single `n` or an inclusive range `"2-6"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NSpecRaw", into = "String")]
pub struct NRange {
    pub lo: usize,
    pub hi: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NSpecRaw {
    One(usize),
    Text(String),
}

impl TryFrom<NSpecRaw> for NRange {
    type Error = String;
    fn try_from(raw: NSpecRaw) -> Result<Self, String> {
        match raw {
            NSpecRaw::One(n) => Ok(NRange { lo: n, hi: n }),
            NSpecRaw::Text(s) => s.parse(),
        }
    }
}

impl From<NRange> for String {
    fn from(r: NRange) -> String {
        if r.lo == r.hi {
            r.lo.to_string()
        } else {
            format!("{}-{}", r.lo, r.hi)
        }
    }
}

impl std::str::FromStr for NRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("invalid agent count `{s}` (expected N or LO-HI)");
        let (lo, hi) = match s.split_once('-') {
            Some((a, b)) => (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ),
            None => {
                let n = s.trim().parse().map_err(|_| bad())?;
                (n, n)
            }
        };
        if lo == 0 || lo > hi {
            return Err(bad());
        }
        Ok(NRange { lo, hi })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub mechanism: Option<MechanismId>,
    pub cost: Option<CostFunction>,
    /// Identity bids for `run`.
    pub bids: Option<Vec<f64>>,
    /// Per-agent identity lists for `run` through the Sybil extension.
    pub profile: Option<Vec<Vec<f64>>>,
    /// Valuation profile for `swi` and explicit-profile checks.
    #[serde(alias = "valuations")]
    pub v: Option<Vec<f64>>,
    pub step: Option<f64>,
    pub max_value: Option<f64>,
    pub max_sybils: Option<usize>,
    pub max_agents: Option<usize>,
    pub n: Option<NRange>,
    pub case: Option<String>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn empty() -> Self {
        RunConfig {
            mode: None,
            mechanism: None,
            cost: None,
            bids: None,
            profile: None,
            v: None,
            step: None,
            max_value: None,
            max_sybils: None,
            max_agents: None,
            n: None,
            case: None,
            out: None,
        }
    }

    /// Fields set in `other` replace those here.
    pub fn overlay(mut self, other: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            mode, mechanism, cost, bids, profile, v, step, max_value, max_sybils, max_agents, n,
            case, out
        );
        self
    }

    pub fn cost(&self) -> Result<CostFunction, UsageError> {
        let cost = self.cost.clone().unwrap_or(CostFunction::constant(1.0));
        let report = validate_cost_function(&cost);
        if !report.is_ok() {
            let msgs: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
            return Err(UsageError(format!(
                "invalid cost function: {}",
                msgs.join("; ")
            )));
        }
        Ok(cost)
    }

    pub fn mechanism(&self) -> Result<MechanismId, UsageError> {
        self.mechanism
            .ok_or_else(|| UsageError(format!("`{}` needs a mechanism", self.mode_str())))
    }

    pub fn mode_str(&self) -> &'static str {
        self.mode.map_or("run", Mode::as_str)
    }

    /// Search grid with per-mode defaults.
    pub fn grid(&self, default_agents: usize, default_sybils: usize) -> Result<Grid, UsageError> {
        let grid = Grid {
            step: self.step.unwrap_or(0.05),
            max_value: self.max_value.unwrap_or(1.2),
            max_sybils: self.max_sybils.unwrap_or(default_sybils),
            max_agents: self.max_agents.unwrap_or(default_agents),
            extra_values: Vec::new(),
        };
        grid.validate().map_err(|e| {
            UsageError(format!(
                "{e}; exhaustive searches are capped at {MAX_EXHAUSTIVE_IDENTITIES} identities, \
                 lower max_agents or max_sybils"
            ))
        })?;
        Ok(grid)
    }
}

/// Reads a config file; parse errors carry the line and column.
pub fn load_config(path: &Path) -> Result<RunConfig, UsageError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        UsageError(format!(
            "{}: line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

/// `constant:1` or `concave:0,1,1.4,1.7`.
pub fn parse_cost(spec: &str) -> Result<CostFunction, String> {
    let (kind, rest) = spec.split_once(':').ok_or_else(|| {
        format!("invalid cost `{spec}` (expected constant:C or concave:F0,F1,...)")
    })?;
    match kind.trim().to_ascii_lowercase().as_str() {
        "constant" => rest
            .trim()
            .parse()
            .map(CostFunction::constant)
            .map_err(|_| format!("invalid constant cost `{rest}`")),
        "concave" => parse_list(rest).map(CostFunction::concave),
        other => Err(format!(
            "unknown cost kind `{other}` (expected constant or concave)"
        )),
    }
}

/// Comma-separated numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number `{}`", t.trim()))
        })
        .collect()
}

/// Semicolon-separated agents, each a comma-separated identity list.
pub fn parse_profile(s: &str) -> Result<Vec<Vec<f64>>, String> {
    s.split(';').map(parse_list).collect()
}
