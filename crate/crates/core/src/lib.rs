//! Exact diagonalization and quench dynamics for the PXP ladder with a
//! staggered detuning, plus the periodic PXP chain.
//!
//! The numerical core is generic over the scalar type: operators assemble over
//! any [`Scalar`] (including exact rationals, used for symmetry identities),
//! while spectra and dynamics need a floating [`Real`]. The aliases below fix
//! the common choices.

pub mod dynamics;
pub mod ensemble;
pub mod entanglement;
pub mod error;
pub mod format;
pub mod hilbert;
pub mod linalg;
pub mod operators;
pub mod plaquette;
pub mod scalar;
pub mod spectra;

pub use error::{PxpError, Result};
pub use scalar::{Real, Scalar};

/// Exact rational scalar for sign/commutator identities.
pub type Rational = num_rational::Ratio<i64>;
/// Double-precision operator, the default working type.
pub type Operator = operators::SparseOperator<f64>;
/// Operator with exact rational entries.
pub type ExactOperator = operators::SparseOperator<Rational>;
/// Double-precision eigensystem.
pub type Eigen = spectra::EigenSystem<f64>;
/// Double-precision complex state vector.
pub type State = dynamics::StateVector<f64>;
pub type Plaquette = plaquette::PlaquetteModel<f64>;
