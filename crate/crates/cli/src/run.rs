//! Dispatch from a configuration to the campaigns in the core crate.

use std::fs;
use std::path::Path;
use std::time::Instant;

use collapse_lab_core::campaign::{
    compare_rules_campaign, dilation_campaign, min_disturbance_campaign, repeatability_campaign, Check, InstanceSpec,
    ObservableSpec, StateSpec,
};
use collapse_lab_core::commutant::{p4_conjecture_scan_with_threshold, COUNTEREXAMPLE_THRESHOLD};
use collapse_lab_core::operator::MatrixJson;
use collapse_lab_core::rules::{
    gaussian_weights, vn_basis_selective, weighted_update, RefiningBasis, Rule, SelectiveRule, DISTURBANCE_TOL,
    REPEAT_LEAK_TOL,
};
use collapse_lab_core::seed::derive_seed;
use collapse_lab_core::states::{born, LabObject, StateDefects, STATE_TOL};
use collapse_lab_core::{Error, Observable};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig};
use crate::error::CliError;
use crate::report::{CheckRow, CounterexampleRow, ExperimentReport};

/// Objects read from `--input` files.
#[derive(Debug, Default)]
pub struct Inputs {
    pub state: Option<LabObject>,
    pub observable: Option<Observable>,
}

pub fn load_inputs(paths: &[impl AsRef<Path>]) -> Result<Inputs, CliError> {
    let mut inputs = Inputs::default();
    for path in paths {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let obj = LabObject::parse(&text).map_err(|e| match e {
            Error::Format(message) => CliError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => CliError::Validation(other),
        })?;
        let kind = if matches!(obj, LabObject::Observable(_)) {
            "observable"
        } else {
            "state"
        };
        let slot_taken = match obj {
            LabObject::Observable(obs) => inputs.observable.replace(obs).is_some(),
            state => inputs.state.replace(state).is_some(),
        };
        if slot_taken {
            return Err(CliError::Config(format!(
                "{} supplies a second {kind}; give at most one state and one observable",
                path.display()
            )));
        }
    }
    Ok(inputs)
}

/// Builds the per-trial instance source: file objects are fixed, the rest are generated.
fn instance_spec(config: &ExperimentConfig, inputs: &Inputs, need_pure: bool) -> Result<InstanceSpec, CliError> {
    let gen = config.gen.clone().unwrap_or_default();
    let conflict = |what: &str, key: &str| {
        CliError::Config(format!(
            "the {what} comes from --input, so --gen {key}= cannot also describe it"
        ))
    };
    let state = match &inputs.state {
        Some(_) if gen.rank.is_some() => return Err(conflict("state", "rank")),
        Some(LabObject::Pure(psi)) => StateSpec::FixedPure(psi.clone()),
        Some(LabObject::Density(_)) if need_pure => {
            return Err(CliError::Config(format!(
                "{} needs a pure state input",
                config.command.name()
            )))
        }
        Some(LabObject::Density(rho)) => StateSpec::Fixed(rho.clone()),
        Some(LabObject::Observable(_)) => unreachable!("observables are stored separately"),
        None if need_pure => match gen.rank {
            None | Some(1) => StateSpec::RandomPure,
            Some(r) => {
                return Err(CliError::Config(format!(
                    "{} needs pure states, got rank={r}",
                    config.command.name()
                )))
            }
        },
        None => StateSpec::Random { rank: gen.rank },
    };
    let observable = match &inputs.observable {
        Some(_) if gen.mults.is_some() => return Err(conflict("observable", "mults")),
        Some(obs) => ObservableSpec::fixed(obs.clone())?,
        None => ObservableSpec::Random {
            multiplicities: gen.mults.clone(),
        },
    };
    let dims = match gen.dim()? {
        Some(d) => vec![d],
        None => config.dims.dims(),
    };
    let require_degenerate = need_pure && matches!(observable, ObservableSpec::Random { multiplicities: None });
    let spec = InstanceSpec {
        dims,
        state,
        observable,
        require_degenerate,
    };
    if let Some(d) = gen.dim {
        match spec.fixed_dim() {
            Ok(Some(f)) if f != d => {
                return Err(CliError::Config(format!(
                    "--gen dim={d} disagrees with input dimension {f}"
                )))
            }
            _ => {}
        }
    }
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(spec)
}

/// Check rows for one campaign; the first row's detail carries the campaign summary.
fn rows<S: Serialize>(prefix: &str, checks: &[Check], summary: &S) -> Vec<CheckRow> {
    checks
        .iter()
        .enumerate()
        .map(|(i, check)| {
            let name = if prefix.is_empty() {
                check.name.to_string()
            } else {
                format!("{prefix}/{}", check.name)
            };
            let detail = if i == 0 {
                json!({"tolerance": check.tolerance, "summary": summary})
            } else {
                json!({"tolerance": check.tolerance})
            };
            CheckRow {
                name,
                pass: check.pass,
                worst_dev: check.worst_dev,
                detail,
            }
        })
        .collect()
}

#[derive(Serialize)]
struct MeasureSummary {
    rule: Rule,
    dim: usize,
    distribution: Vec<(f64, f64)>,
    samples: usize,
    counts: Vec<(f64, usize)>,
    sampled_outcome: f64,
    post_state: MatrixJson,
}

fn measure(config: &ExperimentConfig, spec: &InstanceSpec) -> Result<Vec<CheckRow>, CliError> {
    let rule = config.rule.unwrap_or(Rule::Luders);
    let dim = spec.dim_for(0)?;
    let (inst, mut rng) = spec.draw(dim, derive_seed(config.master_seed, 0))?;
    let (rho, fam) = (&inst.state, &inst.family);
    let dist = born(rho, fam)?;
    let mut hits = vec![0usize; fam.len()];
    let mut first = None;
    for _ in 0..config.trials {
        let k = dist.index_for(rng.random::<f64>());
        hits[k] += 1;
        first.get_or_insert(k);
    }
    let k = first.expect("trials >= 1");
    let outcome = fam.eigenvalues()[k];
    let post = match rule {
        Rule::Luders => SelectiveRule::Luders.apply(rho, fam, outcome)?,
        Rule::Vn => SelectiveRule::Vn.apply(rho, fam, outcome)?,
        Rule::VnBasis => vn_basis_selective(rho, &RefiningBasis::from_family(fam), outcome)?,
        Rule::Weighted => {
            let w = gaussian_weights(fam, config.mean.unwrap_or(0.0), config.sigma.unwrap_or(1.0))?;
            weighted_update(rho, fam, &w)?
        }
    };

    let n = config.trials as f64;
    let freq_dev = dist
        .outcomes
        .iter()
        .zip(&hits)
        .map(|(&(_, p), &h)| (h as f64 / n - p).abs())
        .fold(0.0, f64::max);
    let defects = StateDefects::of(post.matrix())?;
    let summary = MeasureSummary {
        rule,
        dim,
        distribution: dist.outcomes.clone(),
        samples: config.trials,
        counts: fam.eigenvalues().iter().copied().zip(hits).collect(),
        sampled_outcome: outcome,
        post_state: MatrixJson::from_matrix(post.matrix()),
    };
    let checks = [
        Check {
            name: "born_normalized",
            pass: (dist.total() - 1.0).abs() <= config.tol_or(STATE_TOL),
            worst_dev: (dist.total() - 1.0).abs(),
            tolerance: config.tol_or(STATE_TOL),
        },
        Check {
            name: "post_state_valid",
            pass: defects.within(1e-9),
            worst_dev: defects.worst(),
            tolerance: 1e-9,
        },
        // five binomial standard deviations at p = 1/2
        Check {
            name: "sample_frequencies",
            pass: freq_dev <= 2.5 / n.sqrt(),
            worst_dev: freq_dev,
            tolerance: 2.5 / n.sqrt(),
        },
    ];
    Ok(rows("", &checks, &summary))
}

fn p4_scan(config: &ExperimentConfig) -> Result<(Vec<CheckRow>, Vec<CounterexampleRow>), CliError> {
    let dims = match config.gen.as_ref().and_then(|g| g.dim) {
        Some(d) => vec![d],
        None => config.dims.dims(),
    };
    let per_dim = config.trials.div_ceil(dims.len());
    let threshold = config.tol_or(COUNTEREXAMPLE_THRESHOLD);
    let scan = p4_conjecture_scan_with_threshold(&dims, per_dim, config.master_seed, threshold)?;
    let neg = (-scan.worst_min_eigenvalue).max(0.0);
    let checks = [
        Check {
            name: "positive",
            pass: neg <= threshold,
            worst_dev: neg,
            tolerance: threshold,
        },
        Check {
            name: "unit_trace",
            pass: scan.worst_trace_dev <= threshold,
            worst_dev: scan.worst_trace_dev,
            tolerance: threshold,
        },
    ];
    let cex = scan
        .counterexamples
        .iter()
        .map(|c| CounterexampleRow::from_campaign("p4_positive_unit_trace", c))
        .collect();
    Ok((rows("", &checks, &scan), cex))
}

/// Runs the configured experiment. `duration_ms` is left empty.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    config.validate()?;
    let inputs = load_inputs(&config.inputs)?;
    let seed = config.master_seed;
    let trials = config.trials;
    let cmd = config.command.name();
    let mut counterexamples = Vec::new();
    let mut cex = |name: &str, list: &[collapse_lab_core::campaign::Counterexample]| {
        counterexamples.extend(list.iter().map(|c| CounterexampleRow::from_campaign(name, c)));
    };

    let checks = match config.command {
        Command::Measure => measure(config, &instance_spec(config, &inputs, false)?)?,
        Command::CompareRules => {
            let spec = instance_spec(config, &inputs, false)?;
            let fixed = inputs.state.is_some() && inputs.observable.is_some();
            let r = compare_rules_campaign(&spec, if fixed { 1 } else { trials }, seed, config.tol_or(1e-10))?;
            rows("", &r.checks(), &r)
        }
        Command::P4Scan => {
            let (rows, list) = p4_scan(config)?;
            counterexamples = list;
            rows
        }
        Command::DilationCheck => {
            let spec = instance_spec(config, &inputs, false)?;
            let r = dilation_campaign(&spec, trials, seed, config.tol_or(1e-9))?;
            cex(cmd, &r.failures);
            rows("", &r.checks(), &r)
        }
        Command::MinDisturbance => {
            let spec = instance_spec(config, &inputs, true)?;
            let probes = config.probes.unwrap_or(crate::config::DEFAULT_PROBES);
            let r = min_disturbance_campaign(
                &spec,
                trials,
                probes,
                config.outcome,
                seed,
                config.tol_or(DISTURBANCE_TOL),
            )?;
            cex(cmd, &r.failures);
            rows("", &r.checks(), &r)
        }
        Command::Repeatability => {
            let spec = instance_spec(config, &inputs, false)?;
            let rules = match config.rule {
                Some(Rule::Vn) => vec![SelectiveRule::Vn],
                Some(_) => vec![SelectiveRule::Luders],
                None => vec![SelectiveRule::Luders, SelectiveRule::Vn],
            };
            let mut out = Vec::new();
            for (i, rule) in rules.into_iter().enumerate() {
                // each rule gets its own stream so that adding a rule never shifts the other's trials
                let r = repeatability_campaign(
                    &spec,
                    trials,
                    rule,
                    derive_seed(seed, i as u64),
                    config.tol_or(REPEAT_LEAK_TOL),
                )?;
                let name = match rule {
                    SelectiveRule::Luders => "luders",
                    SelectiveRule::Vn => "vn",
                };
                cex(&format!("{cmd}/{name}"), &r.failures);
                out.extend(rows(name, &r.checks(), &r));
            }
            out
        }
    };
    Ok(ExperimentReport {
        config: config.clone(),
        checks,
        counterexamples,
        master_seed: seed,
        duration_ms: None,
    })
}

/// [`run`], filling in `duration_ms` when `timing` is set.
pub fn run_timed(config: &ExperimentConfig, timing: bool) -> Result<ExperimentReport, CliError> {
    let start = Instant::now();
    let mut report = run(config)?;
    if timing {
        report.duration_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}

/// Reads a configuration from either a bare config file or a report that echoes one.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let inner = match value.get("config") {
        Some(c) if value.get("checks").is_some() => c.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes a state or observable file in the shared object format.
pub fn write_object(path: &Path, obj: &LabObject) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&obj.to_json()).map_err(|e| CliError::io(path, e))?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}
