use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sybilshare::{CostFunction, MechanismId};
use sybilshare_cli::config::{
    load_config, parse_cost, parse_list, parse_profile, Mode, NRange, RunConfig,
};
use sybilshare_cli::{execute, init_threads, UsageError, EXIT_ERROR};

/// Cost-sharing mechanisms, their Sybil extensions, and checks of their properties.
#[derive(Parser)]
#[command(name = "sybilshare", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on bids, or its Sybil extension on a profile. With
    /// `--config`, runs whatever mode the file names.
    Run(Common),
    /// Search for profitable misreports.
    Check {
        #[arg(long, value_enum)]
        property: Option<Property>,
        #[command(flatten)]
        common: Common,
    },
    /// Worst approximation ratio over valuation grids.
    WorstCase(Common),
    /// Sybil welfare invariance of the Shapley mechanism.
    Swi(Common),
    /// Canned scenarios with expected values.
    Reproduce {
        /// A case id, or `all`.
        case: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Truthful,
    Sybil,
}

// Aliases keep clap from treating the lists as repeated flags.
type Numbers = Vec<f64>;
type Lists = Vec<Vec<f64>>;

#[derive(Args)]
struct Common {
    /// JSON run configuration; inline flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mechanism: Option<MechanismId>,
    /// `constant:C` or `concave:F0,F1,...`
    #[arg(long, value_parser = parse_cost)]
    cost: Option<CostFunction>,
    /// Comma-separated identity bids.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    bids: Option<Numbers>,
    /// Agents separated by `;`, identities by `,`.
    #[arg(long, value_parser = parse_profile, allow_hyphen_values = true)]
    profile: Option<Lists>,
    /// Comma-separated valuations.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    v: Option<Numbers>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    max_value: Option<f64>,
    #[arg(long)]
    max_sybils: Option<usize>,
    #[arg(long)]
    max_agents: Option<usize>,
    /// Agent count, or a range such as `2-6`.
    #[arg(long)]
    n: Option<NRange>,
    /// JSON report path; sweeps also write a CSV with the same stem.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
    /// Write 0 for wall-clock fields so repeated runs give identical files.
    #[arg(long)]
    no_timing: bool,
}

impl Common {
    fn inline(&self) -> RunConfig {
        RunConfig {
            mechanism: self.mechanism,
            cost: self.cost.clone(),
            bids: self.bids.clone(),
            profile: self.profile.clone(),
            v: self.v.clone(),
            step: self.step,
            max_value: self.max_value,
            max_sybils: self.max_sybils,
            max_agents: self.max_agents,
            n: self.n,
            out: self.out.clone(),
            ..RunConfig::empty()
        }
    }
}

fn allowed(command: &str, mode: Mode) -> bool {
    match command {
        "run" => true,
        "check" => matches!(mode, Mode::CheckTruthful | Mode::CheckSybil),
        "worst-case" => mode == Mode::WorstCase,
        "swi" => mode == Mode::Swi,
        _ => mode == Mode::Reproduce,
    }
}

fn resolve(cli: Cli) -> Result<(RunConfig, bool, bool), UsageError> {
    let (name, common, default_mode, case) = match cli.command {
        Command::Run(c) => ("run", c, Mode::Run, None),
        Command::Check { property, common } => {
            let mode = match property {
                Some(Property::Truthful) => Some(Mode::CheckTruthful),
                Some(Property::Sybil) => Some(Mode::CheckSybil),
                None => None,
            };
            let mut cfg = common.inline();
            cfg.mode = mode;
            return finish("check", common, cfg, Mode::CheckSybil);
        }
        Command::WorstCase(c) => ("worst-case", c, Mode::WorstCase, None),
        Command::Swi(c) => ("swi", c, Mode::Swi, None),
        Command::Reproduce { case, common } => ("reproduce", common, Mode::Reproduce, case),
    };
    let mut cfg = common.inline();
    cfg.case = case;
    if name != "run" {
        cfg.mode = Some(default_mode);
    }
    finish(name, common, cfg, default_mode)
}

fn finish(
    name: &str,
    common: Common,
    inline: RunConfig,
    default_mode: Mode,
) -> Result<(RunConfig, bool, bool), UsageError> {
    let base = match &common.config {
        Some(path) => load_config(path)?,
        None => RunConfig::empty(),
    };
    if let (Some(file_mode), Some(flag_mode)) = (base.mode, inline.mode) {
        if file_mode != flag_mode && name != "run" {
            return Err(UsageError(format!(
                "config mode `{}` conflicts with `{name}` ({})",
                file_mode.as_str(),
                flag_mode.as_str()
            )));
        }
    }
    if let Some(mode) = base.mode {
        if !allowed(name, mode) {
            return Err(UsageError(format!(
                "config mode `{}` cannot run under `{name}`",
                mode.as_str()
            )));
        }
    }
    let mut cfg = base.overlay(inline);
    if cfg.mode.is_none() {
        cfg.mode = Some(default_mode);
    }
    Ok((cfg, common.json, common.no_timing))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = (|| -> anyhow::Result<u8> {
        init_threads()?;
        let (cfg, print_json, no_timing) = resolve(cli)?;
        let mut exec = execute(&cfg)?;
        if no_timing {
            exec = exec.without_timing();
        }
        if print_json {
            print!("{}", exec.json_text());
        } else {
            println!("{}", exec.summary);
        }
        if let Some(out) = &cfg.out {
            for path in exec.write(out)? {
                if !print_json {
                    println!("wrote {}", path.display());
                }
            }
        }
        Ok(exec.exit_code())
    })();
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
