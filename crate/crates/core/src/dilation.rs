//! Measurement as unitary evolution of system ⊗ pointer.
//!
//! [`build_dilation`] realizes the isometry `ψ ⊗ r ↦ Σ_α P_α ψ ⊗ a_α`, with
//! `r` the pointer's ready state and `{a_α}` the standard pointer basis, and
//! completes it to a unitary on the whole product space. Tracing out the
//! pointer after the interaction reproduces the non-selective projection
//! rule, and the pointer's own reduced state carries the Born statistics,
//! while the global state stays as pure as it started.
//!
//! Product-space indices are `system · pointer_dim + pointer`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    conjugate, hs_inner, identity, kron, max_abs_diff, outer, partial_trace, random_unitary, ComplexMatrix,
    ComplexVector, Keep, MatrixJson,
};
use crate::states::{
    basis_vector, check_dims, purity_rank, DensityOperator, OutcomeDistribution, ProjectorFamily, PureState,
    QuantumState,
};

#[derive(Debug, Clone)]
pub struct MeasurementDilation {
    system_dim: usize,
    pointer_dim: usize,
    ready_index: usize,
    outcomes: Vec<f64>,
    unitary: ComplexMatrix,
    /// Product-space columns carrying the ready sector, in system-basis order.
    ready_columns: Vec<usize>,
}

/// Builds the entangling unitary for a projector family with `m` outcomes.
///
/// The pointer has `max(m, 2)` levels; outcome `α` drives it to basis state
/// `α` and the ready state is the last pointer basis vector.
pub fn build_dilation(fam: &ProjectorFamily) -> MeasurementDilation {
    let n = fam.dim();
    let m = fam.len();
    let pointer_dim = m.max(2);
    let ready_index = pointer_dim - 1;
    let total = n * pointer_dim;

    let mut u = ComplexMatrix::zeros(total, total);
    let ready_columns: Vec<usize> = (0..n).map(|k| k * pointer_dim + ready_index).collect();
    for (k, &col) in ready_columns.iter().enumerate() {
        for (alpha, p) in fam.projectors().iter().enumerate() {
            for s in 0..n {
                u[(s * pointer_dim + alpha, col)] = p[(s, k)];
            }
        }
    }

    let complement = orthonormal_complement(&u, &ready_columns, total);
    let mut free = (0..total).filter(|c| !ready_columns.contains(c));
    for v in complement {
        let col = free.next().expect("complement has the right size");
        u.set_column(col, &v);
    }

    MeasurementDilation {
        system_dim: n,
        pointer_dim,
        ready_index,
        outcomes: fam.eigenvalues().to_vec(),
        unitary: u,
        ready_columns,
    }
}

/// Gram–Schmidt of the standard basis against the given columns, with one
/// reorthogonalization pass per candidate.
fn orthonormal_complement(u: &ComplexMatrix, cols: &[usize], total: usize) -> Vec<ComplexVector> {
    let mut span: Vec<ComplexVector> = cols.iter().map(|&c| u.column(c).into_owned()).collect();
    let mut out = Vec::with_capacity(total - cols.len());
    for j in 0..total {
        if span.len() == total {
            break;
        }
        let mut v = basis_vector(total, j);
        for _ in 0..2 {
            for q in &span {
                let overlap = q.dotc(&v);
                v -= q * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            let q = v.unscale(norm);
            span.push(q.clone());
            out.push(q);
        }
    }
    out
}

impl MeasurementDilation {
    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn pointer_dim(&self) -> usize {
        self.pointer_dim
    }

    pub fn ready_index(&self) -> usize {
        self.ready_index
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn ready_state(&self) -> ComplexVector {
        basis_vector(self.pointer_dim, self.ready_index)
    }

    /// `‖U†U - I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.unitary.nrows();
        max_abs_diff(&(self.unitary.adjoint() * &self.unitary), &identity(n))
    }

    /// Largest entry of `U(ψ⊗r) - Σ_α P_αψ ⊗ a_α` over the system basis states.
    pub fn isometry_defect(&self, fam: &ProjectorFamily) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.system_dim {
            let psi = basis_vector(self.system_dim, k);
            let got = &self.unitary * psi.kronecker(&self.ready_state());
            let mut want = ComplexVector::zeros(got.len());
            for (alpha, p) in fam.projectors().iter().enumerate() {
                want += (p * &psi).kronecker(&basis_vector(self.pointer_dim, alpha));
            }
            worst = worst.max((got - want).camax());
        }
        worst
    }

    /// Same action on the ready sector, with the complement columns rotated by a random unitary.
    pub fn recompleted<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let total = self.unitary.nrows();
        let free: Vec<usize> = (0..total).filter(|c| !self.ready_columns.contains(c)).collect();
        let w = random_unitary(free.len(), rng);
        let mut u = self.unitary.clone();
        for (j, &cj) in free.iter().enumerate() {
            let mut col = ComplexVector::zeros(total);
            for (i, &ci) in free.iter().enumerate() {
                col += self.unitary.column(ci) * w[(i, j)];
            }
            u.set_column(cj, &col);
        }
        MeasurementDilation {
            unitary: u,
            ..self.clone()
        }
    }

    /// `ρ ⊗ |r⟩⟨r|` and `U (ρ ⊗ |r⟩⟨r|) U†`.
    pub fn global_states<S: QuantumState + ?Sized>(&self, state: &S) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let rho = state.as_density();
        check_dims(rho.dim(), self.system_dim)?;
        let before = kron(rho.matrix(), &outer(&self.ready_state()));
        let after = conjugate(&self.unitary, &before);
        Ok((before, after))
    }

    pub fn to_json(&self) -> DilationJson {
        DilationJson {
            system_dim: self.system_dim,
            pointer_dim: self.pointer_dim,
            ready_index: self.ready_index,
            outcomes: self.outcomes.clone(),
            unitary: MatrixJson::from_matrix(&self.unitary),
        }
    }

    pub fn from_json(json: &DilationJson) -> Result<Self> {
        let unitary = json.unitary.to_matrix()?;
        let total = json.system_dim * json.pointer_dim;
        if unitary.shape() != (total, total) {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: unitary.nrows(),
            });
        }
        if json.ready_index >= json.pointer_dim || json.outcomes.len() > json.pointer_dim {
            return Err(Error::Format(
                "ready index or outcome count exceeds pointer dimension".into(),
            ));
        }
        let dil = MeasurementDilation {
            system_dim: json.system_dim,
            pointer_dim: json.pointer_dim,
            ready_index: json.ready_index,
            outcomes: json.outcomes.clone(),
            ready_columns: (0..json.system_dim)
                .map(|k| k * json.pointer_dim + json.ready_index)
                .collect(),
            unitary,
        };
        if dil.unitarity_defect() > 1e-9 {
            return Err(Error::Format("dilation matrix is not unitary".into()));
        }
        Ok(dil)
    }
}

/// `{"system_dim", "pointer_dim", "ready_index", "outcomes", "unitary": <matrix json>}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationJson {
    pub system_dim: usize,
    pub pointer_dim: usize,
    pub ready_index: usize,
    pub outcomes: Vec<f64>,
    pub unitary: MatrixJson,
}

/// `tr_pointer[U (ρ ⊗ |r⟩⟨r|) U†]`.
pub fn dilated_measurement<S: QuantumState + ?Sized>(state: &S, dil: &MeasurementDilation) -> Result<DensityOperator> {
    let (_, after) = dil.global_states(state)?;
    let reduced = partial_trace(&after, (dil.system_dim, dil.pointer_dim), Keep::First)?;
    Ok(DensityOperator::from_matrix_unchecked(reduced))
}

/// Diagonal of the pointer's reduced state over the outcome pointer states.
pub fn pointer_distribution<S: QuantumState + ?Sized>(
    state: &S,
    dil: &MeasurementDilation,
) -> Result<OutcomeDistribution> {
    let (_, after) = dil.global_states(state)?;
    let pointer = partial_trace(&after, (dil.system_dim, dil.pointer_dim), Keep::Second)?;
    Ok(OutcomeDistribution {
        outcomes: dil
            .outcomes
            .iter()
            .enumerate()
            .map(|(alpha, &a)| (a, pointer[(alpha, alpha)].re.clamp(0.0, 1.0)))
            .collect(),
    })
}

/// `tr(Ψ²)` before and after the interaction.
pub fn global_purity<S: QuantumState + ?Sized>(state: &S, dil: &MeasurementDilation) -> Result<(f64, f64)> {
    let (before, after) = dil.global_states(state)?;
    Ok((hs_inner(&before, &before)?.re, hs_inner(&after, &after)?.re))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankInvarianceReport {
    pub trials: usize,
    pub input_rank: usize,
    /// Whether every conjugated state kept the input rank.
    pub ranks_preserved: bool,
    /// Largest deviation between sorted spectra of `ρ` and `UρU†`.
    pub max_spectrum_dev: f64,
    /// Rank of the pure witness state before and after a dilated measurement.
    pub witness_ranks: Option<(usize, usize)>,
}

impl RankInvarianceReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.ranks_preserved && self.max_spectrum_dev <= tol && matches!(self.witness_ranks, Some((1, out)) if out >= 2)
    }
}

/// Unitary conjugation cannot change the spectrum (hence the rank) of a state,
/// while a dilated measurement followed by a partial trace can raise it.
/// The witness is `(|0⟩+|1⟩)/√2` measured by `{|0⟩⟨0|, I - |0⟩⟨0|}`.
pub fn rank_invariance_demo<R: Rng + ?Sized>(
    rho: &DensityOperator,
    trials: usize,
    rng: &mut R,
) -> Result<RankInvarianceReport> {
    let n = rho.dim();
    let spectrum = rho.spectrum();
    let (_, input_rank) = purity_rank(rho);
    let mut ranks_preserved = true;
    let mut max_spectrum_dev: f64 = 0.0;
    for _ in 0..trials {
        let u = random_unitary(n, rng);
        let moved = rho.conjugated(&u);
        let s = moved.spectrum();
        for (a, b) in spectrum.iter().zip(&s) {
            max_spectrum_dev = max_spectrum_dev.max((a - b).abs());
        }
        ranks_preserved &= purity_rank(&moved).1 == input_rank;
    }

    let witness_ranks = if n >= 2 {
        let p0 = outer(&basis_vector(n, 0));
        let fam = ProjectorFamily::from_projectors(vec![0.0, 1.0], vec![p0.clone(), identity(n) - p0])?;
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        amps[0] = Complex64::new(1.0, 0.0);
        amps[1] = Complex64::new(1.0, 0.0);
        let psi = PureState::normalized(ComplexVector::from_vec(amps))?;
        let out = dilated_measurement(&psi, &build_dilation(&fam))?;
        Some((purity_rank(&psi).1, purity_rank(&out).1))
    } else {
        None
    };

    Ok(RankInvarianceReport {
        trials,
        input_rank,
        ranks_preserved,
        max_spectrum_dev,
        witness_ranks,
    })
}
