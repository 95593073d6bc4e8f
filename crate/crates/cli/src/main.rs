use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trihybrid::experiments::config::parse_case;
use trihybrid::experiments::{bounds_table, dump_placement, run_sweep, to_csv, ExperimentConfig, ReportMode, UserModel};
use trihybrid::model::UserPosition;
use trihybrid::{selftest, Error};

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_SELFTEST: u8 = 4;

/// Tri-hybrid pinching-antenna beamforming experiments.
#[derive(Parser, Debug)]
#[command(name = "pass-trihybrid", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the configured sweep and write CSV rows.
    Sweep(Common),
    /// Dump refined antenna positions for the configured (or centered) user.
    Placement(Common),
    /// Analytical bounds only, with the surrogate largest spacing.
    Bounds(Common),
    /// Run the invariant suite on the configured parameters.
    Selftest(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Loss case: 1 (lossless) or 2 (lossy).
    #[arg(long, value_parser = ["1", "2"])]
    case: Option<String>,
    /// Architectures to report.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Single,
    Multi,
    Baseline,
    All,
}

impl ModeArg {
    fn as_str(self) -> &'static str {
        match self {
            ModeArg::Single => "single",
            ModeArg::Multi => "multi",
            ModeArg::Baseline => "baseline",
            ModeArg::All => "all",
        }
    }
}

fn load(common: &Common) -> trihybrid::Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(case) = &common.case {
        config.cases = parse_case(case).expect("clap restricts the case values");
    }
    if let Some(mode) = common.mode {
        config.modes = ReportMode::parse_set(mode.as_str()).expect("clap restricts the mode values");
    }
    config.validate()?;
    Ok(config)
}

fn emit(common: &Common, text: &str) -> std::result::Result<(), String> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    if err.is_infeasible() {
        EXIT_INFEASIBLE
    } else {
        EXIT_CONFIG
    }
}

fn run(cli: Cli) -> std::result::Result<(), (u8, String)> {
    let fail = |e: Error| (exit_code(&e), e.to_string());
    let io = |e: String| (1, e);
    match cli.command {
        Command::Sweep(common) => {
            let config = load(&common).map_err(fail)?;
            let rows = run_sweep(&config).map_err(fail)?;
            emit(&common, &to_csv(&config, &rows)).map_err(io)
        }
        Command::Placement(common) => {
            let config = load(&common).map_err(fail)?;
            let user = match config.user {
                UserModel::Fixed(u) => u,
                UserModel::Uniform => UserPosition::center(),
            };
            emit(&common, &dump_placement(&config, &user).map_err(fail)?).map_err(io)
        }
        Command::Bounds(common) => {
            let config = load(&common).map_err(fail)?;
            emit(&common, &bounds_table(&config).map_err(fail)?).map_err(io)
        }
        Command::Selftest(common) => {
            let config = load(&common).map_err(fail)?;
            let checks = selftest::run(&config.params).map_err(fail)?;
            let mut report = String::new();
            for c in &checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                report.push_str(&format!("{status} {} {}\n", c.name, c.detail).replace(" \n", "\n"));
            }
            emit(&common, &report).map_err(io)?;
            match checks.iter().filter(|c| !c.passed).count() {
                0 => Ok(()),
                n => Err((EXIT_SELFTEST, format!("{n} selftest checks failed"))),
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
