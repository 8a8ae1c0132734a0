//! Validated quantum domain types and the Born rule.
//!
//! [`DensityOperator`] and [`PureState`] are the two state representations;
//! every update rule accepts either through [`QuantumState`], promoting a pure
//! vector to its rank-one projector. An [`Observable`] caches its spectral
//! decomposition, and [`projector_family`] groups the spectrum into degenerate
//! levels to produce the complete orthogonal family of eigenprojectors that all
//! measurement rules operate on.

use std::borrow::Cow;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    self, conjugate, hermitian_deviation, hermitian_eig, hs_inner, identity, max_abs_diff, outer, random_unitary,
    symmetrize, trace, ComplexMatrix, ComplexVector, MatrixJson, SpectralDecomposition, HERMITIAN_TOL,
};

/// Tolerance for Hermiticity, positivity and normalization of states.
pub const STATE_TOL: f64 = 1e-10;

/// Tolerance for the projector-family invariants.
pub const FAMILY_TOL: f64 = 1e-9;

/// Outcome probabilities at or below this are impossible.
pub const IMPOSSIBLE_PROBABILITY: f64 = 1e-12;

/// Eigenvalues above this count towards the numerical rank.
pub const RANK_TOL: f64 = 1e-10;

/// How far a matrix is from being a density operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDefects {
    pub hermitian_deviation: f64,
    pub min_eigenvalue: f64,
    pub trace_deviation: f64,
}

impl StateDefects {
    pub fn of(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let hermitian_deviation = hermitian_deviation(m);
        let eig = hermitian_eig(&symmetrize(m), f64::INFINITY)?;
        Ok(StateDefects {
            hermitian_deviation,
            min_eigenvalue: eig.eigenvalues.first().copied().unwrap_or(0.0),
            trace_deviation: (trace(m) - Complex64::new(1.0, 0.0)).norm(),
        })
    }

    /// The largest single violation: non-Hermiticity, negativity, or trace error.
    pub fn worst(&self) -> f64 {
        self.hermitian_deviation
            .max(-self.min_eigenvalue)
            .max(self.trace_deviation)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.hermitian_deviation <= tol && self.min_eigenvalue >= -tol && self.trace_deviation <= tol
    }
}

/// A statistical operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !operator::is_finite(&matrix) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let defects = StateDefects::of(&matrix)?;
        if !defects.within(STATE_TOL) {
            return Err(Error::InvalidState(format!(
                "hermitian deviation {:e}, min eigenvalue {:e}, trace deviation {:e}",
                defects.hermitian_deviation, defects.min_eigenvalue, defects.trace_deviation
            )));
        }
        Ok(DensityOperator { matrix })
    }

    /// Wraps the Hermitian part of `matrix` without checking positivity or trace.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        DensityOperator {
            matrix: symmetrize(&matrix),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            matrix: identity(dim).unscale(dim as f64),
        }
    }

    /// Random state of the given rank (Ginibre construction).
    pub fn random<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<Self> {
        Ok(DensityOperator {
            matrix: operator::random_density(dim, rank, rng)?,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn defects(&self) -> StateDefects {
        StateDefects::of(&self.matrix).expect("density operators are square")
    }

    /// `U ρ U†`.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Self {
        DensityOperator::from_matrix_unchecked(conjugate(u, &self.matrix))
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_eig(&self.matrix, f64::INFINITY)
            .map(|d| d.eigenvalues)
            .unwrap_or_default()
    }
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vector: ComplexVector,
}

impl PureState {
    pub fn new(vector: ComplexVector) -> Result<Self> {
        let norm = vector.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(PureState { vector })
    }

    pub fn normalized(vector: ComplexVector) -> Result<Self> {
        let norm = vector.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(PureState {
            vector: vector.unscale(norm),
        })
    }

    /// Normalizes a vector given by real amplitudes.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(ComplexVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        PureState {
            vector: operator::random_unit_vector(dim, rng),
        }
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_matrix_unchecked(outer(&self.vector))
    }
}

/// Anything the update rules accept as a pre-measurement state.
pub trait QuantumState {
    fn as_density(&self) -> Cow<'_, DensityOperator>;
    fn dim(&self) -> usize;
}

impl QuantumState for DensityOperator {
    fn as_density(&self) -> Cow<'_, DensityOperator> {
        Cow::Borrowed(self)
    }
    fn dim(&self) -> usize {
        DensityOperator::dim(self)
    }
}

impl QuantumState for PureState {
    fn as_density(&self) -> Cow<'_, DensityOperator> {
        Cow::Owned(self.density())
    }
    fn dim(&self) -> usize {
        PureState::dim(self)
    }
}

impl From<&PureState> for DensityOperator {
    fn from(psi: &PureState) -> Self {
        psi.density()
    }
}

/// A self-adjoint operator together with its spectral decomposition.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: ComplexMatrix,
    decomposition: SpectralDecomposition,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let decomposition = hermitian_eig(&matrix, HERMITIAN_TOL)?;
        Ok(Observable {
            matrix: symmetrize(&matrix),
            decomposition,
        })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = ComplexVector::from_iterator(values.len(), values.iter().map(|&x| Complex64::new(x, 0.0)));
        Observable::new(ComplexMatrix::from_diagonal(&d)).expect("real diagonal matrices are Hermitian")
    }

    /// `U diag(levels repeated by multiplicity) U†`.
    pub fn from_levels(levels: &[f64], multiplicities: &[usize], unitary: &ComplexMatrix) -> Result<Self> {
        if levels.len() != multiplicities.len() {
            return Err(Error::InvalidArgument(
                "levels and multiplicities differ in length".into(),
            ));
        }
        let diag: Vec<f64> = levels
            .iter()
            .zip(multiplicities)
            .flat_map(|(&l, &n)| std::iter::repeat_n(l, n))
            .collect();
        if diag.len() != unitary.nrows() {
            return Err(Error::DimensionMismatch {
                expected: unitary.nrows(),
                found: diag.len(),
            });
        }
        let d = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        Observable::new(symmetrize(&conjugate(unitary, &d)))
    }

    /// Random observable with the given level multiplicities, well-separated
    /// levels, and a Haar-random eigenbasis.
    pub fn random<R: Rng + ?Sized>(multiplicities: &[usize], rng: &mut R) -> Result<Self> {
        let dim: usize = multiplicities.iter().sum();
        let mut level = rng.random_range(-2.0..2.0);
        let levels: Vec<f64> = multiplicities
            .iter()
            .map(|_| {
                let l = level;
                level += rng.random_range(0.5..1.5);
                l
            })
            .collect();
        let u = random_unitary(dim, rng);
        Observable::from_levels(&levels, multiplicities, &u)
    }

    /// Overrides the clustering window used by [`projector_family`].
    pub fn with_cluster_tolerance(mut self, tol: f64) -> Self {
        self.decomposition.cluster_tolerance = tol;
        self
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn cluster_tolerance(&self) -> f64 {
        self.decomposition.cluster_tolerance
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Random composition of `dim` into level multiplicities; the number of levels
/// is uniform on `1..=dim`.
pub fn random_multiplicities<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<usize> {
    assert!(dim >= 1);
    let levels = rng.random_range(1..=dim);
    let mut cuts = rand::seq::index::sample(rng, dim - 1, levels - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect::<Vec<_>>();
    cuts.sort_unstable();
    cuts.push(dim);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let n = c - prev;
            prev = c;
            n
        })
        .collect()
}

/// Complete orthogonal family of eigenprojectors `{P_α}` with distinct ascending
/// eigenvalues and multiplicities `n_α = rank P_α`.
#[derive(Debug, Clone)]
pub struct ProjectorFamily {
    eigenvalues: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
    multiplicities: Vec<usize>,
    /// Orthonormal basis of each eigenspace, as columns.
    bases: Vec<ComplexMatrix>,
}

impl ProjectorFamily {
    /// Builds the family from an orthonormal basis of each eigenspace.
    pub fn from_bases(eigenvalues: Vec<f64>, bases: Vec<ComplexMatrix>) -> Result<Self> {
        if eigenvalues.len() != bases.len() || bases.is_empty() {
            return Err(Error::InvalidArgument(
                "need one non-empty eigenspace basis per eigenvalue".into(),
            ));
        }
        if eigenvalues.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be distinct and ascending".into(),
            ));
        }
        let dim = bases[0].nrows();
        if let Some(b) = bases.iter().find(|b| b.nrows() != dim || b.ncols() == 0) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.nrows(),
            });
        }
        let projectors = bases.iter().map(|b| b * b.adjoint()).collect();
        let multiplicities = bases.iter().map(|b| b.ncols()).collect();
        let fam = ProjectorFamily {
            eigenvalues,
            projectors,
            multiplicities,
            bases,
        };
        let defect = fam.defect();
        if defect > FAMILY_TOL {
            return Err(Error::InvalidArgument(format!(
                "not a complete orthogonal projector family (defect {defect:e})"
            )));
        }
        Ok(fam)
    }

    /// Builds the family from explicit projectors, recovering an eigenspace basis from each.
    pub fn from_projectors(eigenvalues: Vec<f64>, projectors: Vec<ComplexMatrix>) -> Result<Self> {
        let bases = projectors
            .iter()
            .map(|p| {
                let d = hermitian_eig(p, FAMILY_TOL)?;
                let cols: Vec<usize> = (0..d.dim()).filter(|&k| d.eigenvalues[k] > 0.5).collect();
                Ok(ComplexMatrix::from_fn(p.nrows(), cols.len(), |i, j| {
                    d.eigenvectors[(i, cols[j])]
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bases(eigenvalues, bases)
    }

    /// The family of the unit observable: the single projector `I`, labelled 1.
    pub fn unit(dim: usize) -> Self {
        ProjectorFamily {
            eigenvalues: vec![1.0],
            projectors: vec![identity(dim)],
            multiplicities: vec![dim],
            bases: vec![identity(dim)],
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn bases(&self) -> &[ComplexMatrix] {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.multiplicities.iter().all(|&n| n == 1)
    }

    /// Index of the level labelled `outcome` (matched to within `1e-9 · max(1, |α|)`).
    pub fn index_of(&self, outcome: f64) -> Result<usize> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &a)| (k, (a - outcome).abs()))
            .filter(|&(k, d)| d <= 1e-9 * self.eigenvalues[k].abs().max(1.0))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(k, _)| k)
            .ok_or(Error::UnknownOutcome(outcome))
    }

    pub fn projector(&self, outcome: f64) -> Result<&ComplexMatrix> {
        Ok(&self.projectors[self.index_of(outcome)?])
    }

    /// Largest violation of idempotence, Hermiticity, mutual orthogonality,
    /// completeness, or `tr P_α = n_α`.
    pub fn defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (a, p) in self.projectors.iter().enumerate() {
            worst = worst.max(max_abs_diff(&(p * p), p));
            worst = worst.max(hermitian_deviation(p));
            worst = worst.max((trace(p).re - self.multiplicities[a] as f64).abs());
            for q in &self.projectors[a + 1..] {
                worst = worst.max(operator::max_abs(&(p * q)));
            }
            sum += p;
        }
        worst.max(max_abs_diff(&sum, &identity(dim)))
    }

    /// The observable `Σ_α α P_α`.
    pub fn synthesize(&self) -> Result<Observable> {
        let dim = self.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (a, p) in self.eigenvalues.iter().zip(&self.projectors) {
            m += p.scale(*a);
        }
        Observable::new(symmetrize(&m))
    }
}

/// Groups the sorted spectrum into levels (a new level starts where the gap
/// exceeds the cluster tolerance) and sums the eigenvector outer products of
/// each level. Level labels are the mean of the clustered eigenvalues.
pub fn projector_family(obs: &Observable) -> Result<ProjectorFamily> {
    let d = obs.decomposition();
    let tol = d.cluster_tolerance;
    let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..d.dim() {
        let gap = d.eigenvalues[k] - d.eigenvalues[k - 1];
        if gap > tol / 4.0 && gap < tol {
            return Err(Error::ClusterAmbiguity {
                gap,
                lower: tol / 4.0,
                upper: tol,
            });
        }
        if gap > tol {
            clusters.push(vec![k]);
        } else {
            clusters.last_mut().expect("non-empty").push(k);
        }
    }
    let n = d.dim();
    let eigenvalues = clusters
        .iter()
        .map(|c| c.iter().map(|&k| d.eigenvalues[k]).sum::<f64>() / c.len() as f64)
        .collect();
    let bases = clusters
        .iter()
        .map(|c| ComplexMatrix::from_fn(n, c.len(), |i, j| d.eigenvectors[(i, c[j])]))
        .collect();
    ProjectorFamily::from_bases(eigenvalues, bases)
}

/// Outcome probabilities keyed by eigenvalue, in the family's order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub outcomes: Vec<(f64, f64)>,
}

impl OutcomeDistribution {
    pub fn probability(&self, outcome: f64) -> Option<f64> {
        self.outcomes.iter().find(|(a, _)| *a == outcome).map(|(_, p)| *p)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|(_, p)| *p).collect()
    }

    pub fn total(&self) -> f64 {
        self.outcomes.iter().map(|(_, p)| p).sum()
    }

    /// Index drawn by inverse-CDF from a uniform `u ∈ [0, 1)`, skipping impossible outcomes.
    pub fn index_for(&self, u: f64) -> usize {
        let total = self.total();
        let mut acc = 0.0;
        let mut last_possible = 0;
        for (k, (_, p)) in self.outcomes.iter().enumerate() {
            if *p <= IMPOSSIBLE_PROBABILITY {
                continue;
            }
            last_possible = k;
            acc += p / total;
            if u < acc {
                return k;
            }
        }
        last_possible
    }
}

/// `p_α = tr(P_α ρ)`, clamped to `[0, 1]`.
pub fn born<S: QuantumState + ?Sized>(state: &S, fam: &ProjectorFamily) -> Result<OutcomeDistribution> {
    let rho = state.as_density();
    check_dims(rho.dim(), fam.dim())?;
    let outcomes = fam
        .eigenvalues()
        .iter()
        .zip(fam.projectors())
        .map(|(&a, p)| {
            let t = hs_inner(p, rho.matrix()).expect("dimensions checked").re;
            (a, t.clamp(0.0, 1.0))
        })
        .collect();
    Ok(OutcomeDistribution { outcomes })
}

/// `(tr ρ², #{eigenvalues > 1e-10})`.
pub fn purity_rank<S: QuantumState + ?Sized>(state: &S) -> (f64, usize) {
    let rho = state.as_density();
    let purity = hs_inner(rho.matrix(), rho.matrix()).expect("square").re;
    let rank = rho.spectrum().iter().filter(|&&l| l > RANK_TOL).count();
    (purity, rank)
}

pub(crate) fn check_dims(state_dim: usize, family_dim: usize) -> Result<()> {
    if state_dim != family_dim {
        return Err(Error::DimensionMismatch {
            expected: family_dim,
            found: state_dim,
        });
    }
    Ok(())
}

/// On-disk wrapper for states and observables:
/// `{"kind": "density"|"pure"|"observable", "matrix"|"vector": <matrix json>}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ObjectJson {
    Density { matrix: MatrixJson },
    Pure { vector: MatrixJson },
    Observable { matrix: MatrixJson },
}

/// A parsed and validated state or observable.
#[derive(Debug, Clone)]
pub enum LabObject {
    Density(DensityOperator),
    Pure(PureState),
    Observable(Observable),
}

impl LabObject {
    pub fn from_json(json: &ObjectJson) -> Result<Self> {
        Ok(match json {
            ObjectJson::Density { matrix } => LabObject::Density(DensityOperator::new(matrix.to_matrix()?)?),
            ObjectJson::Pure { vector } => LabObject::Pure(PureState::new(vector.to_vector()?)?),
            ObjectJson::Observable { matrix } => LabObject::Observable(Observable::new(matrix.to_matrix()?)?),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let json: ObjectJson = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_json(&json)
    }

    pub fn to_json(&self) -> ObjectJson {
        match self {
            LabObject::Density(rho) => ObjectJson::Density {
                matrix: MatrixJson::from_matrix(rho.matrix()),
            },
            LabObject::Pure(psi) => ObjectJson::Pure {
                vector: MatrixJson::from_vector(psi.vector()),
            },
            LabObject::Observable(obs) => ObjectJson::Observable {
                matrix: MatrixJson::from_matrix(obs.matrix()),
            },
        }
    }
}

/// Column vector with a single unit entry.
pub fn basis_vector(dim: usize, index: usize) -> ComplexVector {
    let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    v[index] = Complex64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn sigma_z() -> Observable {
        Observable::diagonal(&[1.0, -1.0])
    }

    #[test]
    fn exact_degeneracy_is_grouped() {
        let fam = projector_family(&Observable::diagonal(&[1.0, 1.0, 2.0])).unwrap();
        assert_eq!(fam.eigenvalues(), &[1.0, 2.0]);
        assert_eq!(fam.multiplicities(), &[2, 1]);
        assert!(fam.defect() < 1e-12);
    }

    #[test]
    fn perturbed_degeneracy_merges() {
        let exact = projector_family(&Observable::diagonal(&[1.0, 1.0, 2.0])).unwrap();
        let perturbed = projector_family(&Observable::diagonal(&[1.0, 1.0 + 1e-12, 2.0])).unwrap();
        assert_eq!(perturbed.multiplicities(), &[2, 1]);
        for (a, b) in exact.projectors().iter().zip(perturbed.projectors()) {
            assert!(max_abs_diff(a, b) < 1e-9);
        }
        assert!((perturbed.eigenvalues()[0] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn nondegenerate_gives_rank_one_projectors() {
        let fam = projector_family(&Observable::diagonal(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(fam.multiplicities(), &[1, 1, 1]);
        assert!(fam.is_nondegenerate());
    }

    #[test]
    fn ambiguous_gap_is_rejected() {
        // Default window is 1e-8 · 2; a gap of 1e-8 sits inside (5e-9, 2e-8).
        let obs = Observable::diagonal(&[1.0, 1.0 + 1e-8, 2.0]);
        assert!(matches!(projector_family(&obs), Err(Error::ClusterAmbiguity { .. })));
    }

    #[test]
    fn born_on_worked_example() {
        let fam = projector_family(&Observable::diagonal(&[1.0, 1.0, 2.0])).unwrap();
        let psi = PureState::from_real(&[1.0, 1.0, 1.0]).unwrap();
        let p = born(&psi, &fam).unwrap();
        assert!((p.probability(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.probability(2.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn born_certainty_and_symmetry() {
        let fam = projector_family(&sigma_z()).unwrap();
        let up = PureState::from_real(&[1.0, 0.0]).unwrap();
        assert_eq!(born(&up, &fam).unwrap().probability(1.0), Some(1.0));
        let plus = PureState::from_real(&[1.0, 1.0]).unwrap();
        let p = born(&plus, &fam).unwrap();
        assert!((p.probability(1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((p.probability(-1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(born(&DensityOperator::maximally_mixed(3), &fam).is_err());
    }

    #[test]
    fn born_on_maximally_mixed_counts_multiplicities() {
        let mut rng = rng_from_seed(4);
        for dim in 2..=9 {
            let mults = random_multiplicities(dim, &mut rng);
            let fam = projector_family(&Observable::random(&mults, &mut rng).unwrap()).unwrap();
            let p = born(&DensityOperator::maximally_mixed(dim), &fam).unwrap();
            for ((_, prob), n) in p.outcomes.iter().zip(fam.multiplicities()) {
                assert!((prob - *n as f64 / dim as f64).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn purity_and_rank() {
        let psi = PureState::from_real(&[3.0, 4.0]).unwrap();
        let (purity, rank) = purity_rank(&psi);
        assert!((purity - 1.0).abs() < 1e-12);
        assert_eq!(rank, 1);
        let (purity, rank) = purity_rank(&DensityOperator::maximally_mixed(2));
        assert!((purity - 0.5).abs() < 1e-15);
        assert_eq!(rank, 2);

        let mut rng = rng_from_seed(12);
        let rho = DensityOperator::random(5, 3, &mut rng).unwrap();
        let u = random_unitary(5, &mut rng);
        let (p0, r0) = purity_rank(&rho);
        let (p1, r1) = purity_rank(&rho.conjugated(&u));
        assert!((p0 - p1).abs() < 1e-12);
        assert_eq!(r0, r1);
        assert_eq!(r0, 3);
    }

    #[test]
    fn density_validation_rejects_bad_matrices() {
        assert!(DensityOperator::new(identity(2)).is_err());
        let mut m = identity(2).scale(0.5);
        m[(0, 0)] = Complex64::new(1.2, 0.0);
        m[(1, 1)] = Complex64::new(-0.2, 0.0);
        assert!(DensityOperator::new(m).is_err());
        assert!(DensityOperator::new(identity(2).scale(0.5)).is_ok());
        assert!(PureState::new(ComplexVector::from_element(2, Complex64::new(1.0, 0.0))).is_err());
        assert!(PureState::from_real(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn random_multiplicities_compose_dim() {
        let mut rng = rng_from_seed(1);
        for dim in 1..=16 {
            for _ in 0..20 {
                let m = random_multiplicities(dim, &mut rng);
                assert_eq!(m.iter().sum::<usize>(), dim);
                assert!(m.iter().all(|&n| n >= 1));
            }
        }
    }

    #[test]
    fn unit_family_and_lookup() {
        let fam = ProjectorFamily::unit(3);
        assert_eq!(fam.multiplicities(), &[3]);
        assert!(fam.defect() < 1e-15);
        assert_eq!(fam.index_of(1.0).unwrap(), 0);
        assert!(matches!(fam.index_of(2.0), Err(Error::UnknownOutcome(_))));
    }

    #[test]
    fn from_projectors_recovers_family() {
        let fam = projector_family(&Observable::diagonal(&[0.0, 1.0, 1.0, 3.0])).unwrap();
        let rebuilt = ProjectorFamily::from_projectors(fam.eigenvalues().to_vec(), fam.projectors().to_vec()).unwrap();
        assert_eq!(rebuilt.multiplicities(), fam.multiplicities());
        for (a, b) in rebuilt.projectors().iter().zip(fam.projectors()) {
            assert!(max_abs_diff(a, b) < 1e-12);
        }
        let incomplete = vec![fam.projectors()[0].clone()];
        assert!(ProjectorFamily::from_projectors(vec![0.0], incomplete).is_err());
    }

    #[test]
    fn object_json_round_trip() {
        let psi = PureState::from_real(&[1.0, 1.0]).unwrap();
        let obj = LabObject::Pure(psi.clone());
        let text = serde_json::to_string(&obj.to_json()).unwrap();
        assert!(text.starts_with(r#"{"kind":"pure","vector":"#));
        match LabObject::parse(&text).unwrap() {
            LabObject::Pure(back) => assert_eq!(back, psi),
            other => panic!("unexpected {other:?}"),
        }
        let bad = r#"{"kind":"density","matrix":{"dims":[2,2],"entries":[[1,0],[0,0],[0,0],[1,0]]}}"#;
        assert!(matches!(LabObject::parse(bad), Err(Error::InvalidState(_))));
        assert!(matches!(LabObject::parse("{"), Err(Error::Format(_))));
    }
}
