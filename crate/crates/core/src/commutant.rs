//! Hilbert–Schmidt-orthogonal projection onto the commutant of an observable.
//!
//! Two independent constructions of the commutant `{X : XÂ = ÂX}` live here:
//!
//! - [`commutant_basis`] builds the block matrix units `|α,i⟩⟨α,j|` from an
//!   orthonormal basis of each eigenspace; its dimension is `Σ_α n_α²`.
//! - [`commutant_basis_oracle`] never looks at the spectral projectors. It
//!   computes the kernel of the commutation map `X ↦ i[Â, X]` directly, by a
//!   singular value decomposition over the real coordinates of Hermitian
//!   matrices. The commutant of a Hermitian operator is closed under `†`, so
//!   its Hermitian part spans it over ℂ and the real problem is enough.
//!
//! [`p4_update`] applies the projection to a state and deliberately returns the
//! raw matrix: the scan in [`p4_conjecture_scan`] has to see any loss of
//! positivity or normalization rather than have it masked by validation.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{ginibre, hermitian_eig, hs_inner, max_abs, max_abs_diff, symmetrize, trace, ComplexMatrix};
use crate::seed::{derive_seed, rng_from_seed};
use crate::states::{
    projector_family, random_multiplicities, DensityOperator, Observable, ProjectorFamily, QuantumState,
};

/// Singular values at or below this fraction of the reference scale are zero.
pub const ORACLE_CUTOFF: f64 = 1e-8;

/// Relative singular values strictly inside this window make the rank decision ambiguous.
pub const ORACLE_AMBIGUOUS: (f64, f64) = (1e-10, 1e-6);

/// Violations of positivity or normalization above this count as counterexamples.
pub const COUNTEREXAMPLE_THRESHOLD: f64 = 1e-8;

/// An HS-orthonormal basis of a commutant.
#[derive(Debug, Clone)]
pub struct CommutantBasis {
    elements: Vec<ComplexMatrix>,
    matrix_dim: usize,
}

impl CommutantBasis {
    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Dimension of the commutant as a complex vector space.
    pub fn dimension(&self) -> usize {
        self.elements.len()
    }

    pub fn matrix_dim(&self) -> usize {
        self.matrix_dim
    }

    /// `Σ_k (X, B_k) B_k`.
    pub fn project(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.matrix_dim;
        if x.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.nrows(),
            });
        }
        let mut out = ComplexMatrix::zeros(n, n);
        for b in &self.elements {
            let coeff = hs_inner(x, b)?;
            out.zip_apply(b, |o, e| *o += coeff * e);
        }
        Ok(out)
    }

    /// Largest `|(B_i, B_j) - δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                let g = hs_inner(a, b).expect("equal shapes");
                worst = worst.max((g - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Largest entry of `[B_k, m]` over the basis.
    pub fn max_commutator(&self, m: &ComplexMatrix) -> f64 {
        self.elements
            .iter()
            .map(|b| max_abs(&(b * m - m * b)))
            .fold(0.0, f64::max)
    }
}

/// Block matrix units `b_i b_j†` for orthonormal bases `{b_i}` of each eigenspace.
pub fn commutant_basis(fam: &ProjectorFamily) -> CommutantBasis {
    let n = fam.dim();
    let mut elements = Vec::with_capacity(fam.multiplicities().iter().map(|m| m * m).sum());
    for basis in fam.bases() {
        for i in 0..basis.ncols() {
            for j in 0..basis.ncols() {
                elements.push(basis.column(i) * basis.column(j).adjoint());
            }
        }
    }
    CommutantBasis {
        elements,
        matrix_dim: n,
    }
}

/// Orthonormal Hermitian basis element `k` of the `n × n` Hermitian matrices:
/// diagonal units first, then `(E_ij + E_ji)/√2` and `i(E_ij - E_ji)/√2` for `i < j`.
fn hermitian_unit(n: usize, k: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(n, n);
    if k < n {
        e[(k, k)] = Complex64::new(1.0, 0.0);
        return e;
    }
    let (i, j, imaginary) = offdiag_index(n, k - n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    if imaginary {
        e[(i, j)] = Complex64::new(0.0, s);
        e[(j, i)] = Complex64::new(0.0, -s);
    } else {
        e[(i, j)] = Complex64::new(s, 0.0);
        e[(j, i)] = Complex64::new(s, 0.0);
    }
    e
}

fn offdiag_index(n: usize, mut r: usize) -> (usize, usize, bool) {
    let imaginary = r % 2 == 1;
    r /= 2;
    for i in 0..n {
        let row = n - 1 - i;
        if r < row {
            return (i, i + 1 + r, imaginary);
        }
        r -= row;
    }
    unreachable!("coordinate index out of range")
}

/// Real coordinates of a Hermitian matrix in the basis of [`hermitian_unit`].
fn hermitian_coords(x: &ComplexMatrix) -> Vec<f64> {
    let n = x.nrows();
    let mut c = Vec::with_capacity(n * n);
    for i in 0..n {
        c.push(x[(i, i)].re);
    }
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            c.push(r2 * x[(i, j)].re);
            c.push(r2 * x[(i, j)].im);
        }
    }
    c
}

fn from_hermitian_coords(n: usize, c: &[f64]) -> ComplexMatrix {
    let mut x = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        x[(i, i)] = Complex64::new(c[i], 0.0);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = Complex64::new(s * c[k], s * c[k + 1]);
            x[(i, j)] = z;
            x[(j, i)] = z.conj();
            k += 2;
        }
    }
    x
}

/// Kernel of `X ↦ i[Â, X]` on Hermitian matrices, found by SVD.
///
/// Singular values are compared against `max(s_max, ‖Â‖_F)`, so that a
/// multiple of the identity (for which every singular value is rounding noise)
/// still has the full matrix algebra as its commutant.
pub fn commutant_basis_oracle(obs: &Observable) -> Result<CommutantBasis> {
    let a = obs.matrix();
    let n = a.nrows();
    let size = n * n;
    let mut map = DMatrix::<f64>::zeros(size, size);
    let i_unit = Complex64::new(0.0, 1.0);
    for k in 0..size {
        let e = hermitian_unit(n, k);
        let image = (a * &e - &e * a).map(|z| z * i_unit);
        for (row, v) in hermitian_coords(&image).into_iter().enumerate() {
            map[(row, k)] = v;
        }
    }
    let frobenius = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let svd = SVD::try_new(map, false, true, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::NumericalFailure("SVD of the commutation map did not converge".into()))?;
    let s_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let scale = s_max.max(frobenius);
    let v_t = svd.v_t.expect("right singular vectors requested");

    let mut elements = Vec::new();
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        let rel = if scale > 0.0 { s / scale } else { 0.0 };
        if rel > ORACLE_AMBIGUOUS.0 && rel < ORACLE_AMBIGUOUS.1 {
            return Err(Error::NumericalFailure(format!(
                "ambiguous rank decision: relative singular value {rel:e}"
            )));
        }
        if rel <= ORACLE_CUTOFF {
            elements.push(from_hermitian_coords(
                n,
                &v_t.row(idx).iter().copied().collect::<Vec<_>>(),
            ));
        }
    }
    Ok(CommutantBasis {
        elements,
        matrix_dim: n,
    })
}

/// Largest entrywise residual `X - Π_other(X)` over the elements of each basis, both ways.
pub fn span_residual(a: &CommutantBasis, b: &CommutantBasis) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (x, y) in [(a, b), (b, a)] {
        for e in x.elements() {
            worst = worst.max(max_abs_diff(e, &y.project(e)?));
        }
    }
    Ok(worst)
}

/// `Π(ρ)`: projection of the state onto the commutant of the family's observable.
/// The result is not validated as a density operator.
pub fn p4_update<S: QuantumState + ?Sized>(state: &S, fam: &ProjectorFamily) -> Result<ComplexMatrix> {
    let rho = state.as_density();
    commutant_basis(fam).project(rho.matrix())
}

/// Positivity and normalization of one projected state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct P4Trial {
    pub dim: usize,
    pub seed: u64,
    pub min_eigenvalue: f64,
    pub trace_dev: f64,
}

impl P4Trial {
    pub fn violation(&self) -> f64 {
        (-self.min_eigenvalue).max(self.trace_dev)
    }
}

/// One scan trial, fully determined by `(dim, seed)`: a random observable with
/// random multiplicities and a random state of random rank.
pub fn p4_scan_trial(dim: usize, seed: u64) -> Result<P4Trial> {
    let mut rng = rng_from_seed(seed);
    let mults = random_multiplicities(dim, &mut rng);
    let obs = Observable::random(&mults, &mut rng)?;
    let fam = projector_family(&obs)?;
    let rank = rng.random_range(1..=dim);
    let rho = DensityOperator::random(dim, rank, &mut rng)?;
    let out = p4_update(&rho, &fam)?;
    let min_eigenvalue = hermitian_eig(&symmetrize(&out), f64::INFINITY)?.eigenvalues[0];
    let trace_dev = (trace(&out) - Complex64::new(1.0, 0.0)).norm();
    Ok(P4Trial {
        dim,
        seed,
        min_eigenvalue,
        trace_dev,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCounterexample {
    pub seed: u64,
    pub dim: usize,
    pub violation: f64,
}

/// Scan report, serialized as
/// `{"dims", "trials", "worst_min_eigenvalue", "worst_trace_dev", "counterexamples", "master_seed"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P4ScanReport {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub worst_min_eigenvalue: f64,
    pub worst_trace_dev: f64,
    pub counterexamples: Vec<ScanCounterexample>,
    pub master_seed: u64,
}

/// Seed of trial `t` for the `d`-th entry of `dims`.
pub fn p4_scan_seed(master_seed: u64, dim_index: usize, trials_per_dim: usize, trial: usize) -> u64 {
    derive_seed(master_seed, (dim_index * trials_per_dim + trial) as u64)
}

/// Checks whether `Π(ρ)` stays a unit-trace positive operator over random trials.
pub fn p4_conjecture_scan(dims: &[usize], trials_per_dim: usize, master_seed: u64) -> Result<P4ScanReport> {
    p4_conjecture_scan_with_threshold(dims, trials_per_dim, master_seed, COUNTEREXAMPLE_THRESHOLD)
}

/// As [`p4_conjecture_scan`], reporting trials whose violation exceeds `threshold`.
pub fn p4_conjecture_scan_with_threshold(
    dims: &[usize],
    trials_per_dim: usize,
    master_seed: u64,
    threshold: f64,
) -> Result<P4ScanReport> {
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidArgument(format!("scan dimensions must be >= 2, got {d}")));
    }
    let jobs: Vec<(usize, u64)> = dims
        .iter()
        .enumerate()
        .flat_map(|(di, &d)| (0..trials_per_dim).map(move |t| (d, p4_scan_seed(master_seed, di, trials_per_dim, t))))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(d, seed)| p4_scan_trial(d, seed))
        .collect::<Result<Vec<_>>>()?;

    let mut worst_min_eigenvalue = f64::INFINITY;
    let mut worst_trace_dev: f64 = 0.0;
    let mut counterexamples = Vec::new();
    for t in &trials {
        worst_min_eigenvalue = worst_min_eigenvalue.min(t.min_eigenvalue);
        worst_trace_dev = worst_trace_dev.max(t.trace_dev);
        if t.violation() > threshold {
            counterexamples.push(ScanCounterexample {
                seed: t.seed,
                dim: t.dim,
                violation: t.violation(),
            });
        }
    }
    counterexamples.sort_by_key(|c| c.seed);
    Ok(P4ScanReport {
        dims: dims.to_vec(),
        trials: trials.len(),
        worst_min_eigenvalue,
        worst_trace_dev,
        counterexamples,
        master_seed,
    })
}

/// Projection-algebra checks on random, generally non-Hermitian operators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdempotenceReport {
    pub trials: usize,
    /// `‖Π(Π(X)) - Π(X)‖_max`.
    pub max_idempotence_dev: f64,
    /// `|(Π(X), Y) - (X, Π(Y))|`.
    pub max_adjoint_dev: f64,
    /// `|(X - Π(X), B_k)|` over basis elements.
    pub max_residual_overlap: f64,
    /// `|tr Π(H) - tr H|` for Hermitian `H`.
    pub max_trace_dev: f64,
    /// `(Π(X), Π(X)) - (X, X)`; non-positive for a contraction.
    pub max_contraction_excess: f64,
}

impl IdempotenceReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_idempotence_dev <= tol
            && self.max_adjoint_dev <= tol
            && self.max_residual_overlap <= tol
            && self.max_trace_dev <= tol
            && self.max_contraction_excess <= tol
    }
}

pub fn p4_idempotence_check<R: Rng + ?Sized>(
    fam: &ProjectorFamily,
    trials: usize,
    rng: &mut R,
) -> Result<IdempotenceReport> {
    let basis = commutant_basis(fam);
    let n = fam.dim();
    let mut report = IdempotenceReport {
        trials,
        max_idempotence_dev: 0.0,
        max_adjoint_dev: 0.0,
        max_residual_overlap: 0.0,
        max_trace_dev: 0.0,
        max_contraction_excess: f64::NEG_INFINITY,
    };
    for _ in 0..trials {
        let x = ginibre(n, n, rng);
        let y = ginibre(n, n, rng);
        let px = basis.project(&x)?;
        let py = basis.project(&y)?;
        report.max_idempotence_dev = report.max_idempotence_dev.max(max_abs_diff(&basis.project(&px)?, &px));
        report.max_adjoint_dev = report
            .max_adjoint_dev
            .max((hs_inner(&px, &y)? - hs_inner(&x, &py)?).norm());
        let residual = &x - &px;
        for b in basis.elements() {
            report.max_residual_overlap = report.max_residual_overlap.max(hs_inner(&residual, b)?.norm());
        }
        let h = symmetrize(&x);
        report.max_trace_dev = report
            .max_trace_dev
            .max((trace(&basis.project(&h)?) - trace(&h)).norm());
        report.max_contraction_excess = report
            .max_contraction_excess
            .max(hs_inner(&px, &px)?.re - hs_inner(&x, &x)?.re);
    }
    Ok(report)
}
