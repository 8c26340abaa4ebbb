//! Command-line front end: config-driven analyses and canned scenarios.

pub mod config;
pub mod reproduce;

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};
use sybilshare::analysis::{
    check_sybil_proof, check_sybil_proof_at, check_truthful, check_truthful_at, CheckReport,
};
use sybilshare::format::{fmt_num, round_json};
use sybilshare::mechanisms::hybrid_allocation_current_cost;
use sybilshare::welfare::{check_swi_shapley, check_swi_shapley_grid, worst_case_ratio, WorstCase};
use sybilshare::{run_sybil_extension, Mechanism, MechanismId, SybilProfile};

use config::{Mode, RunConfig};

/// Bad input: flags, config files, unknown names. Maps to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

/// Caps the worker pool at `SYBILSHARE_THREADS` when set.
pub fn init_threads() -> Result<(), UsageError> {
    let Ok(raw) = std::env::var("SYBILSHARE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        UsageError(format!(
            "SYBILSHARE_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    // A second call in the same process (tests) finds the pool built already.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Result of one analysis, ready to print or write.
#[derive(Debug, Clone)]
pub struct Execution {
    /// One line per result, for the terminal.
    pub summary: String,
    pub report: Value,
    /// Sweeps only.
    pub csv: Option<String>,
    /// A property was violated or a reproduced value did not match.
    pub violated: bool,
}

impl Execution {
    pub fn exit_code(&self) -> u8 {
        if self.violated {
            EXIT_VIOLATION
        } else {
            EXIT_OK
        }
    }

    /// Pretty JSON, floats at 12 significant digits, trailing newline.
    pub fn json_text(&self) -> String {
        let mut v = self.report.clone();
        round_json(&mut v);
        let mut s = serde_json::to_string_pretty(&v).expect("report values serialize");
        s.push('\n');
        s
    }

    /// Zeroes wall-clock fields so that reports compare byte for byte.
    pub fn without_timing(mut self) -> Self {
        zero_timing(&mut self.report);
        if let Some(csv) = self.csv.take() {
            self.csv = Some(zero_runtime_column(&csv));
        }
        self
    }

    /// Writes the JSON report to `out` and any CSV next to it.
    pub fn write(&self, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        std::fs::write(out, self.json_text())
            .with_context(|| format!("writing {}", out.display()))?;
        written.push(out.to_path_buf());
        if let Some(csv) = &self.csv {
            let path = csv_path(out);
            std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// `report.json` -> `report.csv`; a `.csv` output path gets a `.sweep.csv` sibling.
pub fn csv_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "csv") {
        out.with_extension("sweep.csv")
    } else {
        out.with_extension("csv")
    }
}

fn zero_timing(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for (k, x) in map.iter_mut() {
                if k == "elapsed_ms" || k == "runtime_ms" {
                    *x = json!(0);
                } else {
                    zero_timing(x);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(zero_timing),
        _ => {}
    }
}

fn zero_runtime_column(csv: &str) -> String {
    let mut reader = csv::ReaderBuilder::new().from_reader(csv.as_bytes());
    let headers = reader.headers().cloned().unwrap_or_default();
    let col = headers.iter().position(|h| h == "runtime_ms");
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&headers).expect("in-memory write");
    for record in reader.records().flatten() {
        let row: Vec<&str> = record
            .iter()
            .enumerate()
            .map(|(i, f)| if Some(i) == col { "0" } else { f })
            .collect();
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn nums(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| fmt_num(x)).collect();
    format!("({})", parts.join(", "))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

fn build(cfg: &RunConfig, id: MechanismId) -> Result<sybilshare::CostSharingMechanism, UsageError> {
    id.with_cost(cfg.cost()?)
        .map_err(|e| UsageError(e.to_string()))
}

/// Runs the analysis that `cfg.mode` names (default `run`).
pub fn execute(cfg: &RunConfig) -> anyhow::Result<Execution> {
    match cfg.mode.unwrap_or(Mode::Run) {
        Mode::Run => run_mechanism(cfg),
        Mode::CheckTruthful => check(cfg, false),
        Mode::CheckSybil => check(cfg, true),
        Mode::WorstCase => worst_case(cfg),
        Mode::Swi => swi(cfg),
        Mode::Reproduce => reproduce_cases(cfg),
    }
}

fn run_mechanism(cfg: &RunConfig) -> anyhow::Result<Execution> {
    let id = cfg.mechanism()?;
    let m = build(cfg, id)?;
    let cost = m.cost().clone();
    match (&cfg.bids, &cfg.profile) {
        (Some(bids), None) => {
            let out = m.run(bids).map_err(|e| UsageError(e.to_string()))?;
            let served_cost = cost.cost_of(out.winners.len())?;
            let mut summary = format!(
                "{id}: winners {:?}, payments {}, total {} for cost {}",
                out.winners,
                nums(&out.payments),
                fmt_num(out.total_payment()),
                fmt_num(served_cost)
            );
            let mut notes = Vec::new();
            if id == MechanismId::Hybrid {
                let mut alt = hybrid_allocation_current_cost(bids, &cost)?;
                alt.sort_unstable();
                if alt != out.winners {
                    let note = format!(
                        "removing against C(S)/|S| instead of C(S*)/|S| would serve {alt:?}"
                    );
                    summary.push_str(&format!("; {note}"));
                    notes.push(note);
                }
            }
            let mut report = json!({
                "mode": "run",
                "mechanism": id,
                "cost": cost,
                "bids": bids,
                "winners": out.winners,
                "payments": out.payments,
                "total_payment": out.total_payment(),
                "cost_of_service": served_cost,
            });
            if !notes.is_empty() {
                report["notes"] = json!(notes);
            }
            Ok(Execution {
                summary,
                report,
                csv: None,
                violated: false,
            })
        }
        (None, Some(lists)) => {
            let profile =
                SybilProfile::new(lists.clone()).map_err(|e| UsageError(e.to_string()))?;
            let out = run_sybil_extension(&m, &profile).map_err(|e| UsageError(e.to_string()))?;
            let summary = format!(
                "{id} sybil extension: served agents {:?}, payments {}",
                out.served_agents(),
                nums(&out.total_payment)
            );
            let report = json!({
                "mode": "run",
                "mechanism": id,
                "cost": cost,
                "profile": profile,
                "served": out.served,
                "payments": out.total_payment,
                "identity_winners": out.identity.winners,
                "identity_payments": out.identity.payments,
            });
            Ok(Execution {
                summary,
                report,
                csv: None,
                violated: false,
            })
        }
        (Some(_), Some(_)) => {
            Err(UsageError("give either bids or profile, not both".into()).into())
        }
        (None, None) => Err(UsageError("`run` needs bids or a Sybil profile".into()).into()),
    }
}

fn check_summary(label: &str, id: MechanismId, r: &CheckReport) -> String {
    match &r.witness {
        None => format!("{label} {id}: pass ({} cases)", r.cases_examined),
        Some(w) => {
            let reports: Vec<String> = w.reports.iter().map(|l| nums(l)).collect();
            format!(
                "{label} {id}: violated at v={} with reports [{}], utility {} -> {} ({} cases)",
                nums(&w.valuations),
                reports.join(", "),
                w.utilities.first().map_or("-".into(), |&u| fmt_num(u)),
                w.utilities.get(1).map_or("-".into(), |&u| fmt_num(u)),
                r.cases_examined
            )
        }
    }
}

fn check(cfg: &RunConfig, sybil: bool) -> anyhow::Result<Execution> {
    let id = cfg.mechanism()?;
    let m = build(cfg, id)?;
    let grid = cfg.grid(3, if sybil { 3 } else { 1 })?;
    let report = match (&cfg.v, sybil) {
        (Some(v), true) => check_sybil_proof_at(&m, v, 0, &grid),
        (Some(v), false) => check_truthful_at(&m, v, 0, &grid),
        (None, true) => check_sybil_proof(&m, &grid),
        (None, false) => check_truthful(&m, &grid),
    }
    .map_err(|e| UsageError(e.to_string()))?;
    let label = if sybil {
        "sybil-proofness"
    } else {
        "truthfulness"
    };
    let mut value = json!({
        "mode": cfg.mode_str(),
        "mechanism": id,
        "cost": m.cost(),
        "grid": {"step": grid.step, "max_value": grid.max_value, "max_sybils": grid.max_sybils, "max_agents": grid.max_agents},
    });
    merge(&mut value, to_value(&report));
    Ok(Execution {
        summary: check_summary(label, id, &report),
        report: value,
        csv: None,
        violated: !report.passed(),
    })
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn worst_case(cfg: &RunConfig) -> anyhow::Result<Execution> {
    let id = cfg.mechanism()?;
    let m = build(cfg, id)?;
    let range = cfg.n.ok_or_else(|| {
        UsageError("`worst-case` needs n (a count or a range such as 2-6)".into())
    })?;
    let grid = cfg.grid(1, 1)?;
    let mut results: Vec<WorstCase> = Vec::new();
    for n in range.lo..=range.hi {
        results.push(worst_case_ratio(&m, n, &grid).map_err(|e| UsageError(e.to_string()))?);
    }
    let kind = m.cost().kind();
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "n",
        "mechanism",
        "cost_kind",
        "ratio",
        "witness",
        "runtime_ms",
    ])?;
    let mut lines = Vec::new();
    for r in &results {
        let witness: Vec<String> = r.witness.iter().map(|&x| fmt_num(x)).collect();
        writer.write_record([
            r.n.to_string(),
            id.to_string(),
            kind.to_string(),
            fmt_num(r.ratio),
            witness.join(";"),
            r.elapsed_ms.to_string(),
        ])?;
        let mut line = format!(
            "{id} worst case n={}: ratio {} at v={}",
            r.n,
            fmt_num(r.ratio),
            nums(&r.witness)
        );
        if r.infinite_count > 0 {
            line.push_str(&format!(
                ", {} profiles with a free optimum",
                r.infinite_count
            ));
        }
        lines.push(line);
    }
    let csv = String::from_utf8(writer.into_inner()?)?;
    let report = json!({
        "mode": "worst-case",
        "mechanism": id,
        "cost": m.cost(),
        "step": grid.step,
        "max_value": grid.max_value,
        "results": results,
    });
    Ok(Execution {
        summary: lines.join("\n"),
        report,
        csv: Some(csv),
        violated: false,
    })
}

fn swi(cfg: &RunConfig) -> anyhow::Result<Execution> {
    if let Some(id) = cfg.mechanism.filter(|&id| id != MechanismId::Shapley) {
        return Err(UsageError(format!(
            "`swi` applies to the shapley mechanism only, got {id}"
        ))
        .into());
    }
    let cost = cfg.cost()?;
    let step = cfg.step.unwrap_or(0.05);
    let max_ids = cfg.max_sybils.unwrap_or(3);
    if step <= 0.0 || !step.is_finite() {
        return Err(UsageError(format!("step must be positive, got {step}")).into());
    }
    match &cfg.v {
        Some(v) => {
            let total = v.len() * max_ids;
            if total > sybilshare::analysis::MAX_EXHAUSTIVE_IDENTITIES {
                return Err(UsageError(format!(
                    "{total} identities requested; exhaustive searches are capped at {}, lower max_sybils",
                    sybilshare::analysis::MAX_EXHAUSTIVE_IDENTITIES
                ))
                .into());
            }
            let report = check_swi_shapley(&cost, v, step, max_ids)
                .map_err(|e| UsageError(e.to_string()))?;
            let summary = match &report.witness {
                None => format!(
                    "swi shapley at v={}: pass ({} profiles)",
                    nums(v),
                    report.cases_examined
                ),
                Some(w) => format!(
                    "swi shapley at v={}: violated, social cost {} -> {}",
                    nums(v),
                    fmt_num(w.utilities[0]),
                    fmt_num(w.utilities[1])
                ),
            };
            let mut value = json!({"mode": "swi", "mechanism": "shapley", "cost": cost, "v": v, "step": step, "max_sybils": max_ids});
            merge(&mut value, to_value(&report));
            Ok(Execution {
                summary,
                report: value,
                csv: None,
                violated: !report.passed(),
            })
        }
        None => {
            let grid = cfg.grid(3, max_ids)?;
            let sweep = check_swi_shapley_grid(
                &cost,
                grid.step,
                grid.max_value,
                grid.max_agents,
                &[],
                grid.step,
                max_ids,
            )
            .map_err(|e| UsageError(e.to_string()))?;
            let summary = format!(
                "swi shapley sweep: {} violations over {} valuation profiles ({} strategy profiles)",
                sweep.violations, sweep.profiles, sweep.cases_examined
            );
            let mut value = json!({"mode": "swi", "mechanism": "shapley", "cost": cost, "step": grid.step, "max_value": grid.max_value, "max_agents": grid.max_agents, "max_sybils": max_ids});
            merge(&mut value, to_value(&sweep));
            Ok(Execution {
                summary,
                report: value,
                csv: None,
                violated: sweep.violations > 0,
            })
        }
    }
}

fn reproduce_cases(cfg: &RunConfig) -> anyhow::Result<Execution> {
    let case = cfg
        .case
        .as_deref()
        .ok_or_else(|| UsageError("`reproduce` needs a case id or `all`".into()))?;
    let cases: Vec<&str> = if case == "all" {
        reproduce::CASES.to_vec()
    } else {
        vec![case]
    };
    let mut reports = Vec::new();
    let mut lines = Vec::new();
    for c in cases {
        let r = reproduce::reproduce(c)?;
        lines.push(format!(
            "{} {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.case
        ));
        for check in &r.checks {
            let rel = match check.relation {
                reproduce::Relation::Equal => "=",
                reproduce::Relation::AtLeast => ">=",
                reproduce::Relation::AtMost => "<=",
            };
            lines.push(format!(
                "  {} {}: expected {rel} {} (tol {}), observed {}",
                if check.pass { "ok  " } else { "MISS" },
                check.name,
                fmt_num(check.expected),
                fmt_num(check.tolerance),
                fmt_num(check.observed)
            ));
        }
        for note in &r.notes {
            lines.push(format!("  note: {note}"));
        }
        reports.push(r);
    }
    let violated = reports.iter().any(|r| !r.pass);
    let report = json!({"mode": "reproduce", "cases": reports});
    Ok(Execution {
        summary: lines.join("\n"),
        report,
        csv: None,
        violated,
    })
}
