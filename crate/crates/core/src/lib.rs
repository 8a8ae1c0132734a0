//! Numerical laboratory for quantum measurement-update rules on
//! finite-dimensional Hilbert spaces.
//!
//! The crate is layered bottom-up:
//!
//! - [`operator`]: dense complex matrices, Hermitian eigendecomposition,
//!   partial trace, Hilbert–Schmidt geometry, seeded random generators.
//! - [`states`]: validated density operators, pure states, observables,
//!   projector families and the Born rule.
//! - [`rules`]: the projection (Lüders) rule, von Neumann's degenerate rule and
//!   its basis-dependent form, weighted and binned updates, sampling, and the
//!   repeatability and minimal-disturbance checks.
//! - [`commutant`]: Hilbert–Schmidt projection onto the commutant of an
//!   observable, with an independent null-space oracle.
//! - [`dilation`]: measurement as an entangling unitary on system ⊗ pointer.
//! - [`campaign`]: seeded multi-trial property campaigns built on the above.

pub mod campaign;
pub mod commutant;
pub mod dilation;
pub mod error;
pub mod operator;
pub mod rules;
pub mod seed;
pub mod states;

pub use error::{Error, Result};
pub use operator::{ComplexMatrix, ComplexVector};
pub use states::{DensityOperator, Observable, OutcomeDistribution, ProjectorFamily, PureState, QuantumState};
