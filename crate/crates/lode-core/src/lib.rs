//! Local analysis of second-order linear meromorphic ODEs at a singular
//! point.
//!
//! The crate works with truncated Laurent series ("jets") over exact
//! Gaussian-rational or floating complex scalars, and builds on them:
//! singularity classification, formal invariants and normal forms, decision
//! procedures for formal and meromorphic equivalence, Frobenius analysis and
//! normal forms at regular singular points, reducibility of the associated
//! Riccati equation, Stokes data (closed forms at small rank and a numeric
//! monodromy integrator), and point-symmetry algebras.

pub mod classify;
pub mod error;
pub mod fixtures;
pub mod gamma;
pub mod jet;
pub mod lde;
pub mod monodromy;
pub mod newton;
pub mod reduce;
pub mod regular;
pub mod scalar;
pub mod stokes;
pub mod symmetry;

pub use error::{Error, Result};
pub use jet::Jet;
pub use scalar::{Mode, Scalar};

/// Default tolerance for float-mode equality and residual checks on jets.
pub const DEFAULT_JET_TOL: f64 = 1e-10;

/// Default tolerance for the numeric monodromy integrator and everything
/// derived from it.
pub const MONODROMY_TOL: f64 = 1e-8;

/// Tolerance for the final residual verification of float-mode witnesses.
/// Jet composition and inversion accumulate roundoff well above the
/// per-coefficient working tolerance, so verification is looser.
pub(crate) const VERIFY_TOL: f64 = 1e-8;

/// The per-coefficient working tolerance for a computation whose inputs are
/// exact (`0.0`: zero tests are decided exactly) or float.
pub(crate) fn working_tol(exact: bool) -> f64 {
    if exact {
        0.0
    } else {
        DEFAULT_JET_TOL
    }
}
