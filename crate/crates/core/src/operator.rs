//! Dense complex-matrix substrate.
//!
//! Everything above this module works with [`ComplexMatrix`] (an alias for a
//! dynamically sized `nalgebra` matrix of `Complex64`). This module supplies the
//! few primitives the measurement rules need: Hermitian spectral
//! decomposition with ascending eigenvalues, the partial trace over one factor
//! of a bipartite space, the Hilbert–Schmidt inner product `tr(a b†)`, seeded
//! generators for density operators and unitaries, and the JSON matrix format
//! shared by every file the command-line harness reads or writes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Absolute tolerance on `max |m - m†|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative width of the eigenvalue clustering window.
pub const CLUSTER_REL_TOL: f64 = 1e-8;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise distance between two equally shaped matrices.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    argmax_abs_diff(a, b).2
}

/// Row, column and size of the largest entrywise deviation, scanning row-major
/// so that ties resolve to the first entry in reading order.
pub fn argmax_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> (usize, usize, f64) {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in matrix comparison");
    let mut best = (0, 0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let d = (a[(i, j)] - b[(i, j)]).norm();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    best
}

/// `max |m_ij - conj(m_ji)|`; infinite for non-square input.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(m + m†) / 2`.
pub fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `|v⟩⟨v|`.
pub fn outer(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `u m u†`.
pub fn conjugate(u: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    u * m * u.adjoint()
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Hilbert–Schmidt inner product `tr(a b†) = Σ_ij a_ij conj(b_ij)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum())
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, aligned with `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
    /// Eigenvalues closer than this are treated as one degenerate level.
    pub cluster_tolerance: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |acc, l| acc.max(l.abs()))
    }

    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l);
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// Largest entry of `V†V - I`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        max_abs_diff(&gram, &identity(self.dim()))
    }
}

/// Default clustering window for a spectrum: `1e-8 · max(1, spectral radius)`.
pub fn default_cluster_tolerance(eigenvalues: &[f64]) -> f64 {
    let radius = eigenvalues.iter().fold(0.0_f64, |acc, l| acc.max(l.abs()));
    CLUSTER_REL_TOL * radius.max(1.0)
}

/// Spectral decomposition of a matrix that is Hermitian to within `tol`
/// (max entrywise deviation). The input is symmetrized before decomposition.
pub fn hermitian_eig(m: &ComplexMatrix, tol: f64) -> Result<SpectralDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if !is_finite(m) {
        return Err(Error::Format("matrix has non-finite entries".into()));
    }
    let dev = hermitian_deviation(m);
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    let n = m.nrows();
    let eig = symmetrize(m)
        .try_symmetric_eigen(f64::EPSILON, 1000 * n.max(1))
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    let cluster_tolerance = default_cluster_tolerance(&eigenvalues);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        cluster_tolerance,
    })
}

/// Which factor of `A ⊗ B` survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

/// Partial trace of an operator on `A ⊗ B` (index `a·d_B + b`), keeping one factor.
pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), keep: Keep) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if !m.is_square() || m.nrows() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: m.nrows(),
        });
    }
    let out = match keep {
        Keep::First => ComplexMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Keep::Second => ComplexMatrix::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()),
    };
    Ok(out)
}

/// Standard complex Gaussian sample with `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    // Fill row-major so the draw order does not depend on storage layout.
    let mut g = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            g[(i, j)] = complex_gaussian(rng);
        }
    }
    g
}

/// Random unit vector, uniformly distributed on the complex sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexVector {
    loop {
        let v = ComplexVector::from_fn(dim, |_, _| complex_gaussian(rng));
        let norm = v.norm();
        if norm > 1e-8 {
            return v.unscale(norm);
        }
    }
}

/// Random density operator `G G† / tr(G G†)` with `G` a `dim × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!(
            "random_density needs 1 <= rank <= dim, got dim={dim} rank={rank}"
        )));
    }
    let g = ginibre(dim, rank, rng);
    let w = &g * g.adjoint();
    let t = trace(&w).re;
    Ok(symmetrize(&w.unscale(t)))
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `diag(R)` absorbed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let z = ginibre(dim, dim, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Matrix file format: `{"dims": [r, c], "entries": [[re, im], ...]}` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dims: [usize; 2],
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        MatrixJson {
            dims: [m.nrows(), m.ncols()],
            entries,
        }
    }

    pub fn from_vector(v: &ComplexVector) -> Self {
        MatrixJson {
            dims: [v.len(), 1],
            entries: v.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let [r, c] = self.dims;
        if r == 0 || c == 0 {
            return Err(Error::Format(format!("dims must be positive, got {r}x{c}")));
        }
        if self.entries.len() != r * c {
            return Err(Error::Format(format!(
                "expected {} entries for {r}x{c}, found {}",
                r * c,
                self.entries.len()
            )));
        }
        if self.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Format("non-finite entry".into()));
        }
        Ok(ComplexMatrix::from_row_iterator(
            r,
            c,
            self.entries.iter().map(|[re, im]| Complex64::new(*re, *im)),
        ))
    }

    pub fn to_vector(&self) -> Result<ComplexVector> {
        let m = self.to_matrix()?;
        if m.ncols() != 1 {
            return Err(Error::Format(format!(
                "expected a column vector, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(m.column(0).into_owned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_diag(d: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(d.len(), d.iter().map(|&x| c(x, 0.0))))
    }

    #[test]
    fn eig_of_diagonal_is_sorted_permutation() {
        let d = hermitian_eig(&real_diag(&[2.0, 1.0]), HERMITIAN_TOL).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0, 2.0]);
        let v = &d.eigenvectors;
        assert!(v[(0, 0)].norm() < 1e-15 && (v[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(v[(1, 1)].norm() < 1e-15 && (v[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eig_of_identity() {
        let d = hermitian_eig(&identity(3), HERMITIAN_TOL).unwrap();
        assert_eq!(d.eigenvalues, vec![1.0; 3]);
        assert!(d.orthonormality_defect() < 1e-10);
        assert!(max_abs_diff(&d.reconstruct(), &identity(3)) < 1e-10);
    }

    #[test]
    fn eig_round_trip_with_degeneracy() {
        let mut rng = rng_from_seed(7);
        for _ in 0..20 {
            let u = random_unitary(3, &mut rng);
            let h = conjugate(&u, &real_diag(&[0.0, 1.0, 1.0]));
            let d = hermitian_eig(&h, 1e-9).unwrap();
            for (got, want) in d.eigenvalues.iter().zip([0.0, 1.0, 1.0]) {
                assert!((got - want).abs() < 1e-10, "{got} vs {want}");
            }
            assert!(d.orthonormality_defect() < 1e-10);
            assert!(max_abs_diff(&d.reconstruct(), &h) < 1e-10);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = identity(2);
        m[(0, 1)] = c(0.5, 0.0);
        match hermitian_eig(&m, HERMITIAN_TOL) {
            Err(Error::NotHermitian(dev)) => assert!((dev - 0.5).abs() < 1e-15),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
        assert!(matches!(
            hermitian_eig(&ComplexMatrix::zeros(2, 3), HERMITIAN_TOL),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = rng_from_seed(11);
        let a = random_density(2, 2, &mut rng).unwrap();
        let b = random_density(3, 2, &mut rng).unwrap();
        let ab = kron(&a, &b);
        assert!(max_abs_diff(&partial_trace(&ab, (2, 3), Keep::First).unwrap(), &a) < 1e-12);
        assert!(max_abs_diff(&partial_trace(&ab, (2, 3), Keep::Second).unwrap(), &b) < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = ComplexVector::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]);
        let reduced = partial_trace(&outer(&psi), (2, 2), Keep::First).unwrap();
        // Oracle: explicit index sum ρ_A[i][j] = Σ_k ψ[i,k] conj(ψ[j,k]).
        let mut oracle = ComplexMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    oracle[(i, j)] += psi[2 * i + k] * psi[2 * j + k].conj();
                }
            }
        }
        assert!(max_abs_diff(&reduced, &oracle) < 1e-15);
        assert!(max_abs_diff(&reduced, &identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_maximally_mixed() {
        let m = identity(6).unscale(6.0);
        let kept = partial_trace(&m, (2, 3), Keep::Second).unwrap();
        assert!(max_abs_diff(&kept, &identity(3).unscale(3.0)) < 1e-15);
        assert!(matches!(
            partial_trace(&m, (2, 2), Keep::First),
            Err(Error::DimensionMismatch { expected: 4, found: 6 })
        ));
    }

    #[test]
    fn hs_inner_examples() {
        assert_eq!(hs_inner(&identity(4), &identity(4)).unwrap(), c(4.0, 0.0));
        let sx = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let sz = real_diag(&[1.0, -1.0]);
        // tr(σx σz) = σx[0][0]σz[0][0] + σx[1][1]σz[1][1] = 0
        assert_eq!(hs_inner(&sx, &sz).unwrap(), ZERO);
        assert!(hs_inner(&sx, &identity(3)).is_err());
    }

    #[test]
    fn random_density_shapes() {
        let mut rng = rng_from_seed(3);
        let pure = random_density(2, 1, &mut rng).unwrap();
        assert!(max_abs_diff(&(&pure * &pure), &pure) < 1e-10);
        let full = random_density(4, 4, &mut rng).unwrap();
        let d = hermitian_eig(&full, HERMITIAN_TOL).unwrap();
        assert!(d.eigenvalues.iter().all(|&l| l > 1e-10));
        assert!((trace(&full).re - 1.0).abs() < 1e-12);
        assert!(random_density(3, 4, &mut rng).is_err());
        assert!(random_density(3, 0, &mut rng).is_err());
    }

    #[test]
    fn random_generators_are_deterministic() {
        let a = random_density(5, 3, &mut rng_from_seed(99)).unwrap();
        let b = random_density(5, 3, &mut rng_from_seed(99)).unwrap();
        assert_eq!(a, b);
        let u = random_unitary(4, &mut rng_from_seed(5));
        let v = random_unitary(4, &mut rng_from_seed(5));
        assert_eq!(u, v);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = rng_from_seed(21);
        let u1 = random_unitary(1, &mut rng);
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-14);
        let u3 = random_unitary(3, &mut rng);
        let gram = u3.adjoint() * &u3;
        assert!(max_abs_diff(&gram, &identity(3)) < 1e-10);

        let rho = random_density(3, 3, &mut rng).unwrap();
        let before = hermitian_eig(&rho, HERMITIAN_TOL).unwrap().eigenvalues;
        let after = hermitian_eig(&conjugate(&u3, &rho), 1e-9).unwrap().eigenvalues;
        for (x, y) in before.iter().zip(&after) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_json_round_trip_is_exact() {
        let mut rng = rng_from_seed(8);
        let m = ginibre(3, 2, &mut rng);
        let text = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
        assert_eq!(back.dims, [3, 2]);
    }

    #[test]
    fn matrix_json_rejects_bad_shapes() {
        let bad = MatrixJson {
            dims: [2, 2],
            entries: vec![[1.0, 0.0]; 3],
        };
        assert!(matches!(bad.to_matrix(), Err(Error::Format(_))));
        let empty = MatrixJson {
            dims: [0, 1],
            entries: vec![],
        };
        assert!(empty.to_matrix().is_err());
    }
}
