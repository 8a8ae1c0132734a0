//! Flag parsing and the process entry point.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use collapse_lab_core::rules::Rule;

use crate::config::{Command, DimRange, ExperimentConfig, GenSpec, DEFAULT_TRIALS};
use crate::error::{exit, CliError};
use crate::report::{emit_report, Format};
use crate::run::{load_config, run_timed};

/// Environment variable capping the size of the worker pool.
pub const THREADS_ENV: &str = "COLLAPSE_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "collapse-lab",
    version,
    about = "Run and verify quantum measurement-update rules."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Sample outcomes of one observable on one state and apply an update rule.
    Measure(MeasureArgs),
    /// Apply every non-selective rule to the same instances and compare them.
    CompareRules(CommonArgs),
    /// Look for commutant projections that fail to be unit-trace positive operators.
    P4Scan(CommonArgs),
    /// Check the system-pointer dilation against the projection rule and the Born rule.
    DilationCheck(CommonArgs),
    /// Compare the projected state against random states of the same eigenspace.
    MinDisturbance(MinDisturbanceArgs),
    /// Measure, update, and measure again.
    Repeatability(RepeatabilityArgs),
    /// Repeat an experiment from a report's echoed configuration.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Record wall-clock duration in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// State or observable file; may be given once for each.
    #[arg(long = "input", value_name = "FILE")]
    pub inputs: Vec<PathBuf>,
    /// Generator for objects not read from files: dim=N,rank=R,mults=a:b:c.
    #[arg(long, value_name = "SPEC")]
    pub gen: Option<GenSpec>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Override the main tolerance of the command.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Dimension range for generated instances, A-B.
    #[arg(long, default_value_t = DimRange::default())]
    pub dims: DimRange,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// luders, vn, vn-basis or weighted.
    #[arg(long)]
    pub rule: Option<Rule>,
    /// Centre of the Gaussian weights for the weighted rule.
    #[arg(long, allow_negative_numbers = true)]
    pub mean: Option<f64>,
    /// Standard deviation of the Gaussian weights.
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MinDisturbanceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Condition on this eigenvalue instead of a random possible one.
    #[arg(long, allow_negative_numbers = true)]
    pub outcome: Option<f64>,
    /// Random probe states per trial (default 1000).
    #[arg(long)]
    pub probes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RepeatabilityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// luders or vn; both when omitted.
    #[arg(long)]
    pub rule: Option<Rule>,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    /// A report or a bare configuration.
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn base(command: Command, c: CommonArgs) -> (ExperimentConfig, OutputArgs) {
    let config = ExperimentConfig {
        inputs: c.inputs,
        gen: c.gen,
        master_seed: c.seed,
        trials: c.trials,
        tol: c.tol,
        dims: c.dims,
        ..ExperimentConfig::new(command)
    };
    (config, c.output)
}

impl Sub {
    /// Splits parsed flags into the echoed configuration and the output options.
    pub fn into_config(self) -> Result<(ExperimentConfig, OutputArgs), CliError> {
        Ok(match self {
            Sub::Measure(a) => {
                let (mut c, o) = base(Command::Measure, a.common);
                c.rule = a.rule;
                c.mean = a.mean;
                c.sigma = a.sigma;
                (c, o)
            }
            Sub::CompareRules(a) => base(Command::CompareRules, a),
            Sub::P4Scan(a) => base(Command::P4Scan, a),
            Sub::DilationCheck(a) => base(Command::DilationCheck, a),
            Sub::MinDisturbance(a) => {
                let (mut c, o) = base(Command::MinDisturbance, a.common);
                c.outcome = a.outcome;
                c.probes = a.probes;
                (c, o)
            }
            Sub::Repeatability(a) => {
                let (mut c, o) = base(Command::Repeatability, a.common);
                c.rule = a.rule;
                (c, o)
            }
            Sub::Rerun(a) => (load_config(&a.config)?, a.output),
        })
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    // a second call in the same process finds the pool already built; that is fine
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn execute(sub: Sub) -> Result<bool, CliError> {
    configure_threads()?;
    let (config, output) = sub.into_config()?;
    let report = run_timed(&config, output.timing)?;
    let bytes = emit_report(&report, output.format)?;
    match &output.out {
        Some(path) => fs::write(path, &bytes).map_err(|e| CliError::io(path, e))?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::io("<stdout>", e))?,
    }
    Ok(report.passed())
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(true) => exit::PASS,
        Ok(false) => exit::VIOLATION,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
