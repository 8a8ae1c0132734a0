//! Seeded verification campaigns over random or fixed instances.
//!
//! A campaign runs `trials` independent trials. Trial `i` draws its instance
//! and any further randomness from `derive_seed(master, i)`, so a report is a
//! pure function of its inputs regardless of thread count. Trials run on the
//! rayon pool and are reduced in trial order; failure lists are sorted by seed.
//!
//! Every failure records `(seed, dim)`, which is enough to rebuild the trial
//! with [`InstanceSpec::draw`].

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::commutant::{commutant_basis, commutant_basis_oracle, p4_update, span_residual, ScanCounterexample};
use crate::dilation::{build_dilation, dilated_measurement, global_purity, pointer_distribution};
use crate::error::{Error, Result};
use crate::operator::{argmax_abs_diff, identity, max_abs_diff};
use crate::rules::{
    luders_nonselective, verify_minimal_disturbance, verify_repeatability, vn_applicability, vn_basis_nonselective,
    vn_nonselective, weighted_update, RefiningBasis, SelectiveRule, WeightDistribution,
};
use crate::seed::{derive_seed, rng_from_seed, LabRng};
use crate::states::{
    born, projector_family, random_multiplicities, DensityOperator, Observable, ProjectorFamily, PureState,
    IMPOSSIBLE_PROBABILITY,
};

/// A failing trial: `{seed, dim, violation}`.
pub type Counterexample = ScanCounterexample;

/// Pass/fail summary of one property checked by a campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub worst_dev: f64,
    pub tolerance: f64,
}

impl Check {
    fn at_most(name: &'static str, worst_dev: f64, tolerance: f64) -> Self {
        Check {
            name,
            pass: worst_dev <= tolerance,
            worst_dev,
            tolerance,
        }
    }
}

#[derive(Debug, Clone)]
pub enum StateSpec {
    Fixed(DensityOperator),
    FixedPure(PureState),
    /// Ginibre state of the given rank, or of a uniformly random rank.
    Random {
        rank: Option<usize>,
    },
    RandomPure,
}

#[derive(Debug, Clone)]
pub enum ObservableSpec {
    Fixed(Observable, ProjectorFamily),
    /// Random levels in a Haar-random basis, with the given or random multiplicities.
    Random {
        multiplicities: Option<Vec<usize>>,
    },
    /// The unit observable, a single projector onto the whole space.
    Unit,
}

impl ObservableSpec {
    pub fn fixed(obs: Observable) -> Result<Self> {
        let fam = projector_family(&obs)?;
        Ok(ObservableSpec::Fixed(obs, fam))
    }
}

/// Where each trial's state and observable come from.
#[derive(Debug, Clone)]
pub struct InstanceSpec {
    /// Candidate dimensions, cycled through by trial index when nothing fixes the dimension.
    pub dims: Vec<usize>,
    pub state: StateSpec,
    pub observable: ObservableSpec,
    /// Redraw random multiplicities until some level is degenerate.
    pub require_degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub state: DensityOperator,
    pub pure: Option<PureState>,
    pub observable: Observable,
    pub family: ProjectorFamily,
}

impl Instance {
    pub fn dim(&self) -> usize {
        self.state.dim()
    }
}

impl InstanceSpec {
    pub fn random(dims: Vec<usize>) -> Self {
        InstanceSpec {
            dims,
            state: StateSpec::Random { rank: None },
            observable: ObservableSpec::Random { multiplicities: None },
            require_degenerate: false,
        }
    }

    /// The dimension every trial is pinned to, if any input fixes it.
    pub fn fixed_dim(&self) -> Result<Option<usize>> {
        let from_state = match &self.state {
            StateSpec::Fixed(rho) => Some(rho.dim()),
            StateSpec::FixedPure(psi) => Some(psi.dim()),
            _ => None,
        };
        let from_obs = match &self.observable {
            ObservableSpec::Fixed(obs, _) => Some(obs.dim()),
            ObservableSpec::Random {
                multiplicities: Some(m),
            } => Some(m.iter().sum()),
            _ => None,
        };
        match (from_state, from_obs) {
            (Some(a), Some(b)) if a != b => Err(Error::DimensionMismatch { expected: b, found: a }),
            (a, b) => Ok(a.or(b)),
        }
    }

    /// Checks that every trial can be drawn.
    pub fn validate(&self) -> Result<()> {
        let fixed = self.fixed_dim()?;
        if fixed.is_none() && self.dims.is_empty() {
            return Err(Error::InvalidArgument("no dimensions to draw from".into()));
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidArgument(format!("dimension must be positive, got {d}")));
        }
        if let StateSpec::Random { rank: Some(r) } = self.state {
            let smallest = fixed.unwrap_or_else(|| self.dims.iter().copied().min().unwrap_or(0));
            if r == 0 || r > smallest {
                return Err(Error::InvalidArgument(format!("rank {r} must lie in 1..={smallest}")));
            }
        }
        if let ObservableSpec::Random {
            multiplicities: Some(m),
        } = &self.observable
        {
            if m.is_empty() || m.contains(&0) {
                return Err(Error::InvalidArgument("multiplicities must be positive".into()));
            }
        }
        if self.require_degenerate {
            let degenerate = match &self.observable {
                ObservableSpec::Fixed(_, fam) => fam.multiplicities().iter().any(|&m| m >= 2),
                ObservableSpec::Random {
                    multiplicities: Some(m),
                } => m.iter().any(|&m| m >= 2),
                ObservableSpec::Random { multiplicities: None } | ObservableSpec::Unit => {
                    fixed.map_or(self.dims.iter().all(|&d| d >= 2), |d| d >= 2)
                }
            };
            if !degenerate {
                return Err(Error::InvalidArgument("observable has no degenerate level".into()));
            }
        }
        Ok(())
    }

    /// Dimension of trial `index`.
    pub fn dim_for(&self, index: usize) -> Result<usize> {
        Ok(match self.fixed_dim()? {
            Some(d) => d,
            None => self.dims[index % self.dims.len()],
        })
    }

    /// Builds the instance of a trial from its dimension and seed, returning the
    /// generator positioned after the draw.
    pub fn draw(&self, dim: usize, seed: u64) -> Result<(Instance, LabRng)> {
        let mut rng = rng_from_seed(seed);
        let (observable, family) = match &self.observable {
            ObservableSpec::Fixed(obs, fam) => (obs.clone(), fam.clone()),
            ObservableSpec::Unit => (Observable::diagonal(&vec![1.0; dim]), ProjectorFamily::unit(dim)),
            ObservableSpec::Random { multiplicities } => {
                let mults = match multiplicities {
                    Some(m) => m.clone(),
                    None => loop {
                        let m = random_multiplicities(dim, &mut rng);
                        if !self.require_degenerate || m.iter().any(|&k| k >= 2) {
                            break m;
                        }
                    },
                };
                let obs = Observable::random(&mults, &mut rng)?;
                let fam = projector_family(&obs)?;
                (obs, fam)
            }
        };
        let (state, pure) = match &self.state {
            StateSpec::Fixed(rho) => (rho.clone(), None),
            StateSpec::FixedPure(psi) => (psi.density(), Some(psi.clone())),
            StateSpec::Random { rank } => {
                let r = rank.unwrap_or_else(|| rng.random_range(1..=dim));
                (DensityOperator::random(dim, r, &mut rng)?, None)
            }
            StateSpec::RandomPure => {
                let psi = PureState::random(dim, &mut rng);
                (psi.density(), Some(psi))
            }
        };
        if state.dim() != family.dim() {
            return Err(Error::DimensionMismatch {
                expected: family.dim(),
                found: state.dim(),
            });
        }
        let instance = Instance {
            seed,
            state,
            pure,
            observable,
            family,
        };
        Ok((instance, rng))
    }
}

/// Runs `f` on every trial in parallel and returns the results in trial order.
pub fn run_trials<T, F>(spec: &InstanceSpec, trials: usize, master_seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Instance, &mut LabRng) -> Result<T> + Sync,
{
    spec.validate()?;
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let (inst, mut rng) = spec.draw(spec.dim_for(i)?, derive_seed(master_seed, i as u64))?;
            f(&inst, &mut rng)
        })
        .collect()
}

fn worst(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

fn failures(items: impl Iterator<Item = (u64, usize, f64)>, tol: f64) -> Vec<Counterexample> {
    let mut out: Vec<Counterexample> = items
        .filter(|&(_, _, v)| v.is_nan() || v > tol)
        .map(|(seed, dim, violation)| Counterexample { seed, dim, violation })
        .collect();
    out.sort_by_key(|c| c.seed);
    out
}

/// Lüders against von Neumann for the unit observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitOperatorReport {
    pub trials: usize,
    /// `‖Lüders(ρ) - ρ‖_max`.
    pub max_luders_dev: f64,
    /// `‖vN(ρ) - I/n‖_max`.
    pub max_vn_dev: f64,
    pub tolerance: f64,
    pub failures: Vec<Counterexample>,
}

impl UnitOperatorReport {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::at_most("luders_leaves_state_unchanged", self.max_luders_dev, self.tolerance),
            Check::at_most("vn_maps_to_maximally_mixed", self.max_vn_dev, self.tolerance),
        ]
    }
}

pub fn unit_operator_campaign(dims: &[usize], trials: usize, master_seed: u64, tol: f64) -> Result<UnitOperatorReport> {
    let spec = InstanceSpec {
        observable: ObservableSpec::Unit,
        ..InstanceSpec::random(dims.to_vec())
    };
    let rows = run_trials(&spec, trials, master_seed, |inst, _| {
        let n = inst.dim();
        let l = max_abs_diff(
            luders_nonselective(&inst.state, &inst.family)?.matrix(),
            inst.state.matrix(),
        );
        let v = max_abs_diff(
            vn_nonselective(&inst.state, &inst.family)?.matrix(),
            &identity(n).unscale(n as f64),
        );
        Ok((inst.seed, n, l, v))
    })?;
    Ok(UnitOperatorReport {
        trials,
        max_luders_dev: worst(rows.iter().map(|r| r.2)),
        max_vn_dev: worst(rows.iter().map(|r| r.3)),
        tolerance: tol,
        failures: failures(rows.iter().map(|r| (r.0, r.1, r.2.max(r.3))), tol),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinDisturbanceCampaign {
    pub trials: usize,
    pub probes: usize,
    /// Largest `max(probe fidelity) - F*` over all trials.
    pub max_excess: f64,
    /// Largest `|F* - ⟨ψ|P_α|ψ⟩|`.
    pub max_fidelity_gap: f64,
    pub tolerance: f64,
    pub failures: Vec<Counterexample>,
}

impl MinDisturbanceCampaign {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::at_most("no_probe_beats_projection", self.max_excess, self.tolerance),
            Check::at_most(
                "projected_fidelity_is_born_weight",
                self.max_fidelity_gap,
                self.tolerance,
            ),
        ]
    }
}

/// The outcome to condition on: `outcome` if given, otherwise a uniformly
/// chosen possible level, preferring degenerate ones.
fn pick_outcome(inst: &Instance, outcome: Option<f64>, rng: &mut LabRng) -> Result<f64> {
    if let Some(a) = outcome {
        return Ok(a);
    }
    let dist = born(&inst.state, &inst.family)?;
    let fam = &inst.family;
    let possible: Vec<usize> = (0..fam.len())
        .filter(|&k| dist.outcomes[k].1 > IMPOSSIBLE_PROBABILITY)
        .collect();
    let degenerate: Vec<usize> = possible
        .iter()
        .copied()
        .filter(|&k| fam.multiplicities()[k] >= 2)
        .collect();
    let pool = if degenerate.is_empty() { &possible } else { &degenerate };
    Ok(fam.eigenvalues()[pool[rng.random_range(0..pool.len())]])
}

pub fn min_disturbance_campaign(
    spec: &InstanceSpec,
    trials: usize,
    probes: usize,
    outcome: Option<f64>,
    master_seed: u64,
    tol: f64,
) -> Result<MinDisturbanceCampaign> {
    let rows = run_trials(spec, trials, master_seed, |inst, rng| {
        let psi = inst
            .pure
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("minimal disturbance needs a pure state".into()))?;
        let a = pick_outcome(inst, outcome, rng)?;
        let r = verify_minimal_disturbance(psi, &inst.family, a, probes, rng)?;
        Ok((
            inst.seed,
            inst.dim(),
            r.max_excess,
            (r.projected_fidelity - r.born_weight).abs(),
        ))
    })?;
    Ok(MinDisturbanceCampaign {
        trials,
        probes,
        max_excess: rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max),
        max_fidelity_gap: worst(rows.iter().map(|r| r.3)),
        tolerance: tol,
        failures: failures(rows.iter().map(|r| (r.0, r.1, r.2.max(r.3))), tol),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatabilityCampaign {
    pub rule: SelectiveRule,
    pub trajectories: usize,
    pub agreements: usize,
    pub agreement_fraction: f64,
    pub max_leak: f64,
    pub tolerance: f64,
    pub failures: Vec<Counterexample>,
}

impl RepeatabilityCampaign {
    pub fn checks(&self) -> Vec<Check> {
        let disagreements = (self.trajectories - self.agreements) as f64;
        vec![
            Check::at_most("repeat_agrees", disagreements, 0.0),
            Check::at_most("leaked_probability", self.max_leak, self.tolerance),
        ]
    }
}

/// One measure-update-remeasure trajectory per trial.
pub fn repeatability_campaign(
    spec: &InstanceSpec,
    trials: usize,
    rule: SelectiveRule,
    master_seed: u64,
    tol: f64,
) -> Result<RepeatabilityCampaign> {
    let rows = run_trials(spec, trials, master_seed, |inst, rng| {
        let r = verify_repeatability(&inst.state, &inst.family, rule, 1, rng)?;
        Ok((inst.seed, inst.dim(), r.agreements == 1, r.max_leak))
    })?;
    let agreements = rows.iter().filter(|r| r.2).count();
    Ok(RepeatabilityCampaign {
        rule,
        trajectories: trials,
        agreements,
        agreement_fraction: if trials == 0 {
            1.0
        } else {
            agreements as f64 / trials as f64
        },
        max_leak: worst(rows.iter().map(|r| r.3)),
        tolerance: tol,
        failures: failures(
            rows.iter().map(|r| (r.0, r.1, if r.2 { r.3 } else { f64::INFINITY })),
            tol,
        ),
    })
}

/// Tolerance for the block-basis projection against the null-space oracle.
pub const ORACLE_AGREEMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct P4EquivalenceReport {
    pub trials: usize,
    /// `‖Π(ρ) - Σ P_α ρ P_α‖_max`.
    pub max_luders_dev: f64,
    /// `‖Π(ρ) - Π_oracle(ρ)‖_max`.
    pub max_oracle_dev: f64,
    /// Largest distance of an oracle basis element from the block span.
    pub max_span_residual: f64,
    /// Trials where the oracle's commutant dimension differs from `Σ n_α²`.
    pub dimension_mismatches: usize,
    pub tolerance: f64,
    pub failures: Vec<Counterexample>,
}

impl P4EquivalenceReport {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::at_most("p4_equals_luders", self.max_luders_dev, self.tolerance),
            Check::at_most("block_basis_matches_oracle", self.max_oracle_dev, ORACLE_AGREEMENT_TOL),
            Check::at_most("oracle_dimension_mismatches", self.dimension_mismatches as f64, 0.0),
        ]
    }
}

pub fn p4_equivalence_campaign(
    spec: &InstanceSpec,
    trials: usize,
    master_seed: u64,
    tol: f64,
) -> Result<P4EquivalenceReport> {
    let rows = run_trials(spec, trials, master_seed, |inst, _| {
        let p4 = p4_update(&inst.state, &inst.family)?;
        let luders = luders_nonselective(&inst.state, &inst.family)?;
        let blocks = commutant_basis(&inst.family);
        let oracle = commutant_basis_oracle(&inst.observable)?;
        let mismatch = oracle.dimension() != blocks.dimension();
        let oracle_dev = max_abs_diff(&oracle.project(inst.state.matrix())?, &p4);
        let residual = span_residual(&oracle, &blocks)?;
        Ok((
            inst.seed,
            inst.dim(),
            max_abs_diff(&p4, luders.matrix()),
            oracle_dev,
            residual,
            mismatch,
        ))
    })?;
    Ok(P4EquivalenceReport {
        trials,
        max_luders_dev: worst(rows.iter().map(|r| r.2)),
        max_oracle_dev: worst(rows.iter().map(|r| r.3)),
        max_span_residual: worst(rows.iter().map(|r| r.4)),
        dimension_mismatches: rows.iter().filter(|r| r.5).count(),
        tolerance: tol,
        failures: failures(
            rows.iter().map(|r| {
                let v = if r.5 {
                    f64::INFINITY
                } else {
                    r.2.max(r.3 * tol / ORACLE_AGREEMENT_TOL)
                };
                (r.0, r.1, v)
            }),
            tol,
        ),
    })
}

/// Tolerance for pointer statistics against the Born rule.
pub const POINTER_BORN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DilationCampaign {
    pub trials: usize,
    /// `‖tr_pointer[U(ρ⊗r)U†] - Σ P_α ρ P_α‖_max`.
    pub max_luders_dev: f64,
    pub max_born_dev: f64,
    pub max_unitarity_defect: f64,
    pub max_isometry_defect: f64,
    /// `|tr Ψ²_after - tr Ψ²_before|` for the global state.
    pub max_global_purity_dev: f64,
    pub tolerance: f64,
    pub failures: Vec<Counterexample>,
}

impl DilationCampaign {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::at_most("dilation_equals_luders", self.max_luders_dev, self.tolerance),
            Check::at_most("pointer_statistics_equal_born", self.max_born_dev, POINTER_BORN_TOL),
            Check::at_most("unitary", self.max_unitarity_defect, 1e-9),
            Check::at_most("ready_sector_isometry", self.max_isometry_defect, 1e-9),
            Check::at_most("global_purity_preserved", self.max_global_purity_dev, 1e-10),
        ]
    }
}

pub fn dilation_campaign(spec: &InstanceSpec, trials: usize, master_seed: u64, tol: f64) -> Result<DilationCampaign> {
    let rows = run_trials(spec, trials, master_seed, |inst, _| {
        let dil = build_dilation(&inst.family);
        let out = dilated_measurement(&inst.state, &dil)?;
        let luders = luders_nonselective(&inst.state, &inst.family)?;
        let pointer = pointer_distribution(&inst.state, &dil)?.probabilities();
        let b = born(&inst.state, &inst.family)?.probabilities();
        let born_dev = worst(pointer.iter().zip(&b).map(|(x, y)| (x - y).abs()));
        let (before, after) = global_purity(&inst.state, &dil)?;
        let devs = [
            max_abs_diff(out.matrix(), luders.matrix()),
            born_dev,
            dil.unitarity_defect(),
            dil.isometry_defect(&inst.family),
            (after - before).abs(),
        ];
        Ok((inst.seed, inst.dim(), devs))
    })?;
    let col = |j: usize| worst(rows.iter().map(|r| r.2[j]));
    Ok(DilationCampaign {
        trials,
        max_luders_dev: col(0),
        max_born_dev: col(1),
        max_unitarity_defect: col(2),
        max_isometry_defect: col(3),
        max_global_purity_dev: col(4),
        tolerance: tol,
        failures: failures(
            rows.iter()
                .map(|r| (r.0, r.1, r.2[0].max(r.2[1] * tol / POINTER_BORN_TOL))),
            tol,
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRulesReport {
    pub trials: usize,
    /// Largest entry of `|Lüders(ρ) - vN(ρ)|`, the entry where it occurs and that trial's seed.
    pub max_luders_vn_dev: f64,
    pub luders_vn_entry: (usize, usize),
    pub luders_vn_seed: u64,
    pub max_vn_basis_dev: f64,
    pub max_p4_dev: f64,
    pub max_dilation_dev: f64,
    /// Born-weighted update against Lüders.
    pub max_weighted_dev: f64,
    /// Trials where the vN condition holds.
    pub applicable_trials: usize,
    /// Largest Lüders/vN gap among those trials.
    pub max_applicable_gap: f64,
    pub tolerance: f64,
}

impl CompareRulesReport {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::at_most("p4_equals_luders", self.max_p4_dev, self.tolerance),
            Check::at_most("weighted_born_equals_luders", self.max_weighted_dev, self.tolerance),
            Check::at_most("dilation_equals_luders", self.max_dilation_dev, 1e-9),
            Check::at_most("vn_condition_implies_agreement", self.max_applicable_gap, 1e-9),
        ]
    }
}

/// Applies every non-selective rule to each trial and compares them.
pub fn compare_rules_campaign(
    spec: &InstanceSpec,
    trials: usize,
    master_seed: u64,
    tol: f64,
) -> Result<CompareRulesReport> {
    struct Row {
        seed: u64,
        luders_vn: (usize, usize, f64),
        vn_basis: f64,
        p4: f64,
        dilation: f64,
        weighted: f64,
        applicable: bool,
    }
    let rows = run_trials(spec, trials, master_seed, |inst, _| {
        let (rho, fam) = (&inst.state, &inst.family);
        let luders = luders_nonselective(rho, fam)?;
        let vn = vn_nonselective(rho, fam)?;
        let basis = vn_basis_nonselective(rho, &RefiningBasis::from_family(fam))?;
        let p4 = p4_update(rho, fam)?;
        let dil = dilated_measurement(rho, &build_dilation(fam))?;
        let weights = WeightDistribution::from_born(fam, &born(rho, fam)?)?;
        let weighted = weighted_update(rho, fam, &weights)?;
        Ok(Row {
            seed: inst.seed,
            luders_vn: argmax_abs_diff(luders.matrix(), vn.matrix()),
            vn_basis: max_abs_diff(basis.matrix(), luders.matrix()),
            p4: max_abs_diff(&p4, luders.matrix()),
            dilation: max_abs_diff(dil.matrix(), luders.matrix()),
            weighted: max_abs_diff(weighted.matrix(), luders.matrix()),
            applicable: vn_applicability(rho, fam, tol)?.holds,
        })
    })?;
    let mut top: Option<&Row> = None;
    for r in &rows {
        if top.is_none_or(|t| r.luders_vn.2 > t.luders_vn.2) {
            top = Some(r);
        }
    }
    let (entry, dev, seed) = top.map_or(((0, 0), 0.0, 0), |t| {
        ((t.luders_vn.0, t.luders_vn.1), t.luders_vn.2, t.seed)
    });
    Ok(CompareRulesReport {
        trials,
        max_luders_vn_dev: dev,
        luders_vn_entry: entry,
        luders_vn_seed: seed,
        max_vn_basis_dev: worst(rows.iter().map(|r| r.vn_basis)),
        max_p4_dev: worst(rows.iter().map(|r| r.p4)),
        max_dilation_dev: worst(rows.iter().map(|r| r.dilation)),
        max_weighted_dev: worst(rows.iter().map(|r| r.weighted)),
        applicable_trials: rows.iter().filter(|r| r.applicable).count(),
        max_applicable_gap: worst(rows.iter().filter(|r| r.applicable).map(|r| r.luders_vn.2)),
        tolerance: tol,
    })
}

/// Empirical frequency of one outcome over repeated fresh measurements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyReport {
    pub outcome: f64,
    pub samples: usize,
    pub hits: usize,
    pub frequency: f64,
    pub expected: f64,
}

/// Samples the Born distribution of `(state, fam)` `samples` times from one seeded stream.
pub fn outcome_frequency(
    state: &DensityOperator,
    fam: &ProjectorFamily,
    outcome: f64,
    samples: usize,
    seed: u64,
) -> Result<FrequencyReport> {
    let dist = born(state, fam)?;
    let k = fam.index_of(outcome)?;
    let mut rng = rng_from_seed(seed);
    let hits = (0..samples)
        .filter(|_| dist.index_for(rng.random::<f64>()) == k)
        .count();
    Ok(FrequencyReport {
        outcome: fam.eigenvalues()[k],
        samples,
        hits,
        frequency: hits as f64 / samples.max(1) as f64,
        expected: dist.outcomes[k].1,
    })
}
