//! Experiment configuration, as parsed from flags and as echoed into reports.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use collapse_lab_core::rules::Rule;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Measure,
    CompareRules,
    P4Scan,
    DilationCheck,
    MinDisturbance,
    Repeatability,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Measure => "measure",
            Command::CompareRules => "compare-rules",
            Command::P4Scan => "p4-scan",
            Command::DilationCheck => "dilation-check",
            Command::MinDisturbance => "min-disturbance",
            Command::Repeatability => "repeatability",
        }
    }
}

/// `dim=N,rank=R,mults=a:b:c`; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mults: Option<Vec<usize>>,
}

impl GenSpec {
    /// Dimension implied by `dim` and `mults`, which must agree when both are given.
    pub fn dim(&self) -> Result<Option<usize>, CliError> {
        let from_mults = self.mults.as_ref().map(|m| m.iter().sum::<usize>());
        match (self.dim, from_mults) {
            (Some(d), Some(s)) if d != s => Err(CliError::Config(format!(
                "--gen dim={d} disagrees with multiplicities summing to {s}"
            ))),
            (d, s) => Ok(d.or(s)),
        }
    }
}

impl FromStr for GenSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut spec = GenSpec::default();
        for part in s.split(',').filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got '{part}'"))?;
            let int = |v: &str| v.parse::<usize>().map_err(|e| format!("{key}: {e}"));
            match key {
                "dim" => spec.dim = Some(int(value)?),
                "rank" => spec.rank = Some(int(value)?),
                "mults" => spec.mults = Some(value.split(':').map(int).collect::<Result<_, _>>()?),
                _ => return Err(format!("unknown generator key '{key}'")),
            }
        }
        Ok(spec)
    }
}

/// Inclusive dimension range, written `A-B` (or a single `A`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimRange {
    pub min: usize,
    pub max: usize,
}

impl DimRange {
    pub fn dims(self) -> Vec<usize> {
        (self.min..=self.max).collect()
    }
}

impl Default for DimRange {
    fn default() -> Self {
        DimRange { min: 2, max: 8 }
    }
}

impl FromStr for DimRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once('-').unwrap_or((s, s));
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("'{v}': {e}"));
        let (min, max) = (parse(a)?, parse(b)?);
        if min == 0 || min > max {
            return Err(format!("need 1 <= A <= B, got {min}-{max}"));
        }
        Ok(DimRange { min, max })
    }
}

impl fmt::Display for DimRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.min, self.max)
    }
}

/// Everything that determines a report's numeric content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gen: Option<GenSpec>,
    #[serde(default)]
    pub rule: Option<Rule>,
    pub master_seed: u64,
    pub trials: usize,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub dims: DimRange,
    #[serde(default)]
    pub outcome: Option<f64>,
    #[serde(default)]
    pub probes: Option<usize>,
    #[serde(default)]
    pub mean: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
}

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_PROBES: usize = 1000;

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            inputs: Vec::new(),
            gen: None,
            rule: None,
            master_seed: 0,
            trials: DEFAULT_TRIALS,
            tol: None,
            dims: DimRange::default(),
            outcome: None,
            probes: None,
            mean: None,
            sigma: None,
        }
    }

    /// Flag combinations that no command accepts, or that this command does not use.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let cmd = self.command.name();
        if self.trials == 0 {
            return bad("--trials must be at least 1".into());
        }
        if let Some(t) = self.tol {
            if !(t.is_finite() && t >= 0.0) {
                return bad(format!("--tol must be a finite non-negative number, got {t}"));
            }
        }
        if self.dims.min == 0 || self.dims.min > self.dims.max {
            return bad(format!("invalid dimension range {}", self.dims));
        }
        if let Some(g) = &self.gen {
            g.dim()?;
            if g.dim == Some(0) || g.rank == Some(0) || g.mults.as_ref().is_some_and(|m| m.is_empty() || m.contains(&0))
            {
                return bad("--gen values must be positive".into());
            }
        }
        match (self.command, self.rule) {
            (Command::Measure, _) | (_, None) => {}
            (Command::Repeatability, Some(Rule::Luders | Rule::Vn)) => {}
            (Command::Repeatability, Some(r)) => {
                return bad(format!("repeatability supports the luders and vn rules, not {r}"))
            }
            (_, Some(_)) => return bad(format!("--rule does not apply to {cmd}")),
        }
        let weighted = self.command == Command::Measure && self.rule == Some(Rule::Weighted);
        if weighted {
            match (self.mean, self.sigma) {
                (Some(m), Some(s)) if m.is_finite() && s.is_finite() && s > 0.0 => {}
                (Some(_), Some(s)) => return bad(format!("--sigma must be positive and finite, got {s}")),
                _ => return bad("the weighted rule needs --mean and --sigma".into()),
            }
        } else if self.mean.is_some() || self.sigma.is_some() {
            return bad("--mean and --sigma only apply to measure with --rule weighted".into());
        }
        if self.command != Command::MinDisturbance && (self.outcome.is_some() || self.probes.is_some()) {
            return bad(format!("--outcome and --probes do not apply to {cmd}"));
        }
        if self.probes == Some(0) {
            return bad("--probes must be at least 1".into());
        }
        if self.command == Command::P4Scan {
            if !self.inputs.is_empty() {
                return bad("p4-scan draws its own states and observables; --input is not accepted".into());
            }
            if self.gen.as_ref().is_some_and(|g| g.rank.is_some() || g.mults.is_some()) {
                return bad("p4-scan accepts only dim= in --gen".into());
            }
            if self.gen.as_ref().and_then(|g| g.dim).unwrap_or(self.dims.min) < 2 {
                return bad("p4-scan needs dimensions of at least 2".into());
            }
        }
        Ok(())
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}
