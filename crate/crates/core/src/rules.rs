//! Measurement-update rules and their verification checks.
//!
//! Selective rules condition on an observed eigenvalue `α`; non-selective
//! rules describe the state when the outcome is not examined.
//!
//! | rule | selective | non-selective |
//! |------|-----------|---------------|
//! | Lüders | `P_α ρ P_α / tr(P_α ρ)` | `Σ_α P_α ρ P_α` |
//! | von Neumann | `P_α / n_α` | `Σ_α (tr(P_α ρ) / n_α) P_α` |
//! | von Neumann, basis form | `Σ_i r_αi \|ψ_αi⟩⟨ψ_αi\| / tr(P_α ρ)` | `Σ_αi r_αi \|ψ_αi⟩⟨ψ_αi\|` |
//! | weighted | n/a | `Σ_α w(α) P_α ρ P_α / tr(P_α ρ)` |
//!
//! The two von Neumann forms depend on a degenerate eigenspace's interior
//! structure in different ways: the first forgets it entirely, the second
//! depends on a chosen orthonormal basis with `r_αi = ⟨ψ_αi|ρ|ψ_αi⟩`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{self, hs_inner, identity, max_abs, max_abs_diff, outer, ComplexMatrix, ComplexVector};
use crate::states::{
    born, check_dims, projector_family, DensityOperator, Observable, OutcomeDistribution, ProjectorFamily, PureState,
    QuantumState, FAMILY_TOL, IMPOSSIBLE_PROBABILITY,
};

/// Largest probability a repeated measurement may assign to a different outcome.
pub const REPEAT_LEAK_TOL: f64 = 1e-9;

/// Slack allowed between probe fidelities and the projected state's fidelity.
pub const DISTURBANCE_TOL: f64 = 1e-10;

/// Stable identifiers for the update rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "luders")]
    Luders,
    #[serde(rename = "vn")]
    Vn,
    #[serde(rename = "vn-basis")]
    VnBasis,
    #[serde(rename = "weighted")]
    Weighted,
}

impl Rule {
    pub const ALL: [Rule; 4] = [Rule::Luders, Rule::Vn, Rule::VnBasis, Rule::Weighted];

    pub fn id(self) -> &'static str {
        match self {
            Rule::Luders => "luders",
            Rule::Vn => "vn",
            Rule::VnBasis => "vn-basis",
            Rule::Weighted => "weighted",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown rule '{s}'")))
    }
}

/// Rules with a selective (outcome-conditioned) form that needs no extra data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectiveRule {
    Luders,
    Vn,
}

impl SelectiveRule {
    pub fn apply<S: QuantumState + ?Sized>(
        self,
        state: &S,
        fam: &ProjectorFamily,
        outcome: f64,
    ) -> Result<DensityOperator> {
        match self {
            SelectiveRule::Luders => luders_selective(state, fam, outcome),
            SelectiveRule::Vn => vn_selective(state, fam, outcome),
        }
    }
}

fn possible_level(rho: &DensityOperator, fam: &ProjectorFamily, outcome: f64) -> Result<(usize, f64)> {
    check_dims(rho.dim(), fam.dim())?;
    let k = fam.index_of(outcome)?;
    let p = hs_inner(&fam.projectors()[k], rho.matrix())?.re;
    if p <= IMPOSSIBLE_PROBABILITY {
        return Err(Error::ImpossibleOutcome {
            outcome: fam.eigenvalues()[k],
            probability: p,
        });
    }
    Ok((k, p))
}

fn sandwich(p: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    p * rho * p
}

/// `P_α ρ P_α / tr(P_α ρ)`.
pub fn luders_selective<S: QuantumState + ?Sized>(
    state: &S,
    fam: &ProjectorFamily,
    outcome: f64,
) -> Result<DensityOperator> {
    let rho = state.as_density();
    let (k, p) = possible_level(&rho, fam, outcome)?;
    let post = sandwich(&fam.projectors()[k], rho.matrix()).unscale(p);
    Ok(DensityOperator::from_matrix_unchecked(post))
}

/// `Σ_α P_α ρ P_α`.
pub fn luders_nonselective<S: QuantumState + ?Sized>(state: &S, fam: &ProjectorFamily) -> Result<DensityOperator> {
    let rho = state.as_density();
    check_dims(rho.dim(), fam.dim())?;
    let n = rho.dim();
    let post = fam
        .projectors()
        .iter()
        .fold(ComplexMatrix::zeros(n, n), |acc, p| acc + sandwich(p, rho.matrix()));
    Ok(DensityOperator::from_matrix_unchecked(post))
}

/// `Σ_α c_α P_α` with `c_α = tr(P_α ρ) / n_α`: maximal ignorance inside each eigenspace.
pub fn vn_nonselective<S: QuantumState + ?Sized>(state: &S, fam: &ProjectorFamily) -> Result<DensityOperator> {
    let rho = state.as_density();
    check_dims(rho.dim(), fam.dim())?;
    let n = rho.dim();
    let mut post = ComplexMatrix::zeros(n, n);
    for (p, &mult) in fam.projectors().iter().zip(fam.multiplicities()) {
        let c = hs_inner(p, rho.matrix())?.re / mult as f64;
        post += p.scale(c);
    }
    Ok(DensityOperator::from_matrix_unchecked(post))
}

/// `P_α / n_α` for any state in which `α` is possible.
pub fn vn_selective<S: QuantumState + ?Sized>(
    state: &S,
    fam: &ProjectorFamily,
    outcome: f64,
) -> Result<DensityOperator> {
    let rho = state.as_density();
    let (k, _) = possible_level(&rho, fam, outcome)?;
    let post = fam.projectors()[k].unscale(fam.multiplicities()[k] as f64);
    Ok(DensityOperator::from_matrix_unchecked(post))
}

/// Whether `P_α ρ P_α = (tr(P_α ρ)/n_α) P_α` holds for every level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Applicability {
    pub holds: bool,
    pub max_deviation: f64,
}

pub fn vn_applicability<S: QuantumState + ?Sized>(state: &S, fam: &ProjectorFamily, tol: f64) -> Result<Applicability> {
    let rho = state.as_density();
    check_dims(rho.dim(), fam.dim())?;
    let mut max_deviation: f64 = 0.0;
    for (p, &mult) in fam.projectors().iter().zip(fam.multiplicities()) {
        let c = hs_inner(p, rho.matrix())?.re / mult as f64;
        max_deviation = max_deviation.max(max_abs_diff(&sandwich(p, rho.matrix()), &p.scale(c)));
    }
    Ok(Applicability {
        holds: max_deviation <= tol,
        max_deviation,
    })
}

/// An orthonormal basis of the whole space in which every vector lies inside one eigenspace.
#[derive(Debug, Clone)]
pub struct RefiningBasis {
    vectors: ComplexMatrix,
    levels: Vec<usize>,
    eigenvalues: Vec<f64>,
}

impl RefiningBasis {
    /// `basis` holds the vectors as columns.
    pub fn new(fam: &ProjectorFamily, basis: ComplexMatrix) -> Result<Self> {
        let n = fam.dim();
        if basis.nrows() != n || basis.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: basis.ncols(),
            });
        }
        let gram_defect = max_abs_diff(&(basis.adjoint() * &basis), &identity(n));
        if gram_defect > FAMILY_TOL {
            return Err(Error::InvalidArgument(format!(
                "basis is not orthonormal (defect {gram_defect:e})"
            )));
        }
        let mut levels = Vec::with_capacity(n);
        for j in 0..n {
            let v = basis.column(j).into_owned();
            let (level, leakage) = fam
                .projectors()
                .iter()
                .enumerate()
                .map(|(k, p)| (k, (&v - p * &v).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("families are non-empty");
            if leakage > FAMILY_TOL {
                return Err(Error::BasisNotRefining { index: j, leakage });
            }
            levels.push(level);
        }
        Ok(RefiningBasis {
            vectors: basis,
            levels,
            eigenvalues: fam.eigenvalues().to_vec(),
        })
    }

    /// The eigenbasis stored in the family itself.
    pub fn from_family(fam: &ProjectorFamily) -> Self {
        let n = fam.dim();
        let mut vectors = ComplexMatrix::zeros(n, n);
        let mut levels = Vec::with_capacity(n);
        let mut col = 0;
        for (k, b) in fam.bases().iter().enumerate() {
            for j in 0..b.ncols() {
                vectors.set_column(col, &b.column(j));
                levels.push(k);
                col += 1;
            }
        }
        RefiningBasis {
            vectors,
            levels,
            eigenvalues: fam.eigenvalues().to_vec(),
        }
    }

    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    /// Level index (into the family) of each basis vector.
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// `r_αi = ⟨ψ_αi|ρ|ψ_αi⟩` for every basis vector, in column order.
    pub fn weights<S: QuantumState + ?Sized>(&self, state: &S) -> Result<Vec<f64>> {
        let rho = state.as_density();
        check_dims(rho.dim(), self.vectors.nrows())?;
        Ok((0..self.vectors.ncols())
            .map(|j| {
                let v = self.vectors.column(j);
                (v.adjoint() * rho.matrix() * v)[(0, 0)].re
            })
            .collect())
    }
}

/// `Σ_αi r_αi |ψ_αi⟩⟨ψ_αi|`.
pub fn vn_basis_nonselective<S: QuantumState + ?Sized>(state: &S, basis: &RefiningBasis) -> Result<DensityOperator> {
    let r = basis.weights(state)?;
    let n = basis.vectors.nrows();
    let mut post = ComplexMatrix::zeros(n, n);
    for (j, w) in r.iter().enumerate() {
        post += outer(&basis.vectors.column(j).into_owned()).scale(*w);
    }
    Ok(DensityOperator::from_matrix_unchecked(post))
}

/// The basis-form post-state conditioned on level `outcome`.
pub fn vn_basis_selective<S: QuantumState + ?Sized>(
    state: &S,
    basis: &RefiningBasis,
    outcome: f64,
) -> Result<DensityOperator> {
    let r = basis.weights(state)?;
    let k = basis
        .eigenvalues
        .iter()
        .position(|&a| (a - outcome).abs() <= 1e-9 * a.abs().max(1.0))
        .ok_or(Error::UnknownOutcome(outcome))?;
    let total: f64 = r
        .iter()
        .zip(&basis.levels)
        .filter(|(_, &l)| l == k)
        .map(|(w, _)| w)
        .sum();
    if total <= IMPOSSIBLE_PROBABILITY {
        return Err(Error::ImpossibleOutcome {
            outcome,
            probability: total,
        });
    }
    let n = basis.vectors.nrows();
    let mut post = ComplexMatrix::zeros(n, n);
    for (j, w) in r.iter().enumerate().filter(|(j, _)| basis.levels[*j] == k) {
        post += outer(&basis.vectors.column(j).into_owned()).scale(*w / total);
    }
    Ok(DensityOperator::from_matrix_unchecked(post))
}

/// A probability distribution over a family's eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightDistribution {
    weights: Vec<(f64, f64)>,
}

impl WeightDistribution {
    /// Weights aligned with the family's eigenvalues.
    pub fn new(fam: &ProjectorFamily, weights: &[f64]) -> Result<Self> {
        if weights.len() != fam.len() {
            return Err(Error::DimensionMismatch {
                expected: fam.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(WeightDistribution {
            weights: fam.eigenvalues().iter().copied().zip(weights.iter().copied()).collect(),
        })
    }

    /// Weights given as `(eigenvalue, weight)` pairs; unlisted eigenvalues get zero.
    pub fn from_pairs(fam: &ProjectorFamily, pairs: &[(f64, f64)]) -> Result<Self> {
        let mut w = vec![0.0; fam.len()];
        for &(a, x) in pairs {
            w[fam.index_of(a)?] += x;
        }
        Self::new(fam, &w)
    }

    pub fn point_mass(fam: &ProjectorFamily, outcome: f64) -> Result<Self> {
        Self::from_pairs(fam, &[(outcome, 1.0)])
    }

    pub fn from_born(fam: &ProjectorFamily, dist: &OutcomeDistribution) -> Result<Self> {
        let total = dist.total();
        let w: Vec<f64> = dist.outcomes.iter().map(|(_, p)| p / total).collect();
        Self::new(fam, &w)
    }

    pub fn weights(&self) -> &[(f64, f64)] {
        &self.weights
    }
}

/// `Σ_α w(α) P_α ρ P_α / tr(P_α ρ)`.
pub fn weighted_update<S: QuantumState + ?Sized>(
    state: &S,
    fam: &ProjectorFamily,
    w: &WeightDistribution,
) -> Result<DensityOperator> {
    let rho = state.as_density();
    check_dims(rho.dim(), fam.dim())?;
    if w.weights.len() != fam.len() {
        return Err(Error::DimensionMismatch {
            expected: fam.len(),
            found: w.weights.len(),
        });
    }
    let n = rho.dim();
    let mut post = ComplexMatrix::zeros(n, n);
    for (p, &(outcome, weight)) in fam.projectors().iter().zip(&w.weights) {
        let prob = hs_inner(p, rho.matrix())?.re;
        if prob <= IMPOSSIBLE_PROBABILITY {
            if weight > IMPOSSIBLE_PROBABILITY {
                return Err(Error::ImpossibleOutcomeInSupport { outcome, weight });
            }
            continue;
        }
        post += sandwich(p, rho.matrix()).scale(weight / prob);
    }
    Ok(DensityOperator::from_matrix_unchecked(post))
}

/// Normal weights `w(α) ∝ exp(-(α - mean)² / (2 sigma²))` over the family's eigenvalues.
pub fn gaussian_weights(fam: &ProjectorFamily, mean: f64, sigma: f64) -> Result<WeightDistribution> {
    if !(sigma > 0.0 && sigma.is_finite()) || !mean.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need finite mean and sigma > 0, got mean={mean} sigma={sigma}"
        )));
    }
    let exps: Vec<f64> = fam
        .eigenvalues()
        .iter()
        .map(|a| -(a - mean).powi(2) / (2.0 * sigma * sigma))
        .collect();
    let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = exps.iter().map(|e| (e - top).exp()).collect();
    let total: f64 = raw.iter().sum();
    let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    WeightDistribution::new(fam, &w)
}

/// Half-open interval `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
}

impl Bin {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.partial_cmp(&upper) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidArgument(format!("empty bin [{lower}, {upper})")));
        }
        Ok(Bin { lower, upper })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x < self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Coarse-grains an observable: one projector per non-empty bin, labelled by the bin midpoint.
pub fn bin_observable(obs: &Observable, bins: &[Bin]) -> Result<ProjectorFamily> {
    for b in bins {
        if b.lower.partial_cmp(&b.upper) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidArgument(format!("empty bin [{}, {})", b.lower, b.upper)));
        }
    }
    if bins.windows(2).any(|w| w[0].upper > w[1].lower) {
        return Err(Error::InvalidArgument("bins must be sorted and non-overlapping".into()));
    }
    let fine = projector_family(obs)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); bins.len()];
    for (k, &a) in fine.eigenvalues().iter().enumerate() {
        let b = bins
            .iter()
            .position(|b| b.contains(a))
            .ok_or(Error::UncoveredEigenvalue(a))?;
        members[b].push(k);
    }
    let n = fine.dim();
    let mut labels = Vec::new();
    let mut bases = Vec::new();
    for (bin, ks) in bins.iter().zip(&members).filter(|(_, ks)| !ks.is_empty()) {
        let cols: Vec<_> = ks
            .iter()
            .flat_map(|&k| {
                let b = &fine.bases()[k];
                (0..b.ncols()).map(move |j| b.column(j).into_owned())
            })
            .collect();
        let mut basis = ComplexMatrix::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            basis.set_column(j, c);
        }
        labels.push(bin.midpoint());
        bases.push(basis);
    }
    ProjectorFamily::from_bases(labels, bases)
}

/// Draws an outcome from the Born distribution and returns it with the Lüders post-state.
pub fn sample_measurement<S: QuantumState + ?Sized, R: Rng + ?Sized>(
    state: &S,
    fam: &ProjectorFamily,
    rng: &mut R,
) -> Result<(f64, DensityOperator)> {
    sample_selective(state, fam, SelectiveRule::Luders, rng)
}

/// As [`sample_measurement`], with the post-state given by `rule`.
pub fn sample_selective<S: QuantumState + ?Sized, R: Rng + ?Sized>(
    state: &S,
    fam: &ProjectorFamily,
    rule: SelectiveRule,
    rng: &mut R,
) -> Result<(f64, DensityOperator)> {
    let rho = state.as_density();
    let dist = born(rho.as_ref(), fam)?;
    let k = dist.index_for(rng.random::<f64>());
    let outcome = fam.eigenvalues()[k];
    Ok((outcome, rule.apply(rho.as_ref(), fam, outcome)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatabilityReport {
    pub rule: SelectiveRule,
    pub trials: usize,
    pub agreements: usize,
    pub agreement_fraction: f64,
    /// Largest probability the repeated measurement gives to any other outcome.
    pub max_leak: f64,
}

impl RepeatabilityReport {
    pub fn passed(&self) -> bool {
        self.agreements == self.trials && self.max_leak <= REPEAT_LEAK_TOL
    }
}

/// Measures, updates with `rule`, and immediately measures again, `trials` times.
pub fn verify_repeatability<S: QuantumState + ?Sized, R: Rng + ?Sized>(
    state: &S,
    fam: &ProjectorFamily,
    rule: SelectiveRule,
    trials: usize,
    rng: &mut R,
) -> Result<RepeatabilityReport> {
    let rho = state.as_density();
    let mut agreements = 0;
    let mut max_leak: f64 = 0.0;
    for _ in 0..trials {
        let (first, post) = sample_selective(rho.as_ref(), fam, rule, rng)?;
        let k = fam.index_of(first)?;
        let leak: f64 = fam
            .projectors()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, p)| hs_inner(p, post.matrix()).map(|z| z.re.abs()))
            .sum::<Result<f64>>()?;
        max_leak = max_leak.max(leak);
        let (second, _) = sample_selective(&post, fam, rule, rng)?;
        if second == first {
            agreements += 1;
        }
    }
    Ok(RepeatabilityReport {
        rule,
        trials,
        agreements,
        agreement_fraction: if trials == 0 {
            1.0
        } else {
            agreements as f64 / trials as f64
        },
        max_leak,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinDisturbanceReport {
    /// `|⟨φ*|ψ⟩|²` for the normalized projection `φ* = P_α ψ / ‖P_α ψ‖`.
    pub projected_fidelity: f64,
    /// `⟨ψ|P_α|ψ⟩`.
    pub born_weight: f64,
    pub probes: usize,
    pub max_probe_fidelity: f64,
    /// `max(probe fidelity) - F*`; non-positive up to rounding when the projection is optimal.
    pub max_excess: f64,
}

impl MinDisturbanceReport {
    pub fn passed(&self) -> bool {
        self.max_excess <= DISTURBANCE_TOL && (self.projected_fidelity - self.born_weight).abs() <= DISTURBANCE_TOL
    }
}

/// Compares the projected state against random unit vectors of the same eigenspace.
pub fn verify_minimal_disturbance<R: Rng + ?Sized>(
    psi: &PureState,
    fam: &ProjectorFamily,
    outcome: f64,
    num_probes: usize,
    rng: &mut R,
) -> Result<MinDisturbanceReport> {
    check_dims(psi.dim(), fam.dim())?;
    let k = fam.index_of(outcome)?;
    let p = &fam.projectors()[k];
    let v = psi.vector();
    let born_weight = (v.adjoint() * p * v)[(0, 0)].re;
    if born_weight <= IMPOSSIBLE_PROBABILITY {
        return Err(Error::ImpossibleOutcome {
            outcome: fam.eigenvalues()[k],
            probability: born_weight,
        });
    }
    let projected = p * v;
    let phi = projected.unscale(projected.norm());
    let projected_fidelity = phi.dotc(v).norm_sqr();

    let basis = &fam.bases()[k];
    let mut max_probe_fidelity = f64::NEG_INFINITY;
    for _ in 0..num_probes {
        let coeffs: ComplexVector = operator::random_unit_vector(basis.ncols(), rng);
        let probe = basis * coeffs;
        max_probe_fidelity = max_probe_fidelity.max(probe.dotc(v).norm_sqr());
    }
    let max_excess = if num_probes == 0 {
        f64::NEG_INFINITY
    } else {
        max_probe_fidelity - projected_fidelity
    };
    Ok(MinDisturbanceReport {
        projected_fidelity,
        born_weight,
        probes: num_probes,
        max_probe_fidelity,
        max_excess,
    })
}

/// Largest `|tr(P_β ρ)|` over `β ≠ α`.
pub fn off_level_weight(rho: &DensityOperator, fam: &ProjectorFamily, outcome: f64) -> Result<f64> {
    let k = fam.index_of(outcome)?;
    let mut worst: f64 = 0.0;
    for (j, p) in fam.projectors().iter().enumerate() {
        if j != k {
            worst = worst.max(hs_inner(p, rho.matrix())?.norm());
        }
    }
    Ok(worst)
}

/// Largest entry of `[ρ, P_α]` over all levels.
pub fn max_commutator(rho: &ComplexMatrix, fam: &ProjectorFamily) -> f64 {
    fam.projectors()
        .iter()
        .map(|p| max_abs(&(rho * p - p * rho)))
        .fold(0.0, f64::max)
}
