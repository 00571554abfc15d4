use thiserror::Error;

/// Errors shared by all modules of the crate.
///
/// Numeric routines never panic on bad mathematical input; they return one of
/// these variants so callers (and the CLI) can map failures to exit codes.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// Division by a series that is zero to its whole known order.
    #[error("division by a series that vanishes to order {order}")]
    DivisionByZeroSeries { order: i64 },

    /// Division by an exact zero scalar.
    #[error("scalar division by zero")]
    DivisionByZero,

    /// sqrt/log of a floating constant sitting on the principal branch cut.
    /// We report instead of silently picking a side.
    #[error("constant term {re}+{im}i lies on the branch cut; choose a branch explicitly")]
    BranchAmbiguity { re: f64, im: f64 },

    /// Jet square root of a series of odd valuation, or with a constant term
    /// that has no representable square root in the requested mode.
    #[error("series of valuation {val} has no square root with integer exponents")]
    OddValuationSqrt { val: i64 },

    /// Newton/IFT solver: the derivative with respect to the unknown vanishes
    /// at the base point.
    #[error("implicit equation is singular: dF/dy(0, y0) = 0")]
    SingularJacobian,

    /// Newton/IFT solver: F(0, y0) != 0, so there is nothing to continue from.
    #[error("implicit equation has no root at the origin: F(0, y0) != 0")]
    NoRootAtOrigin,

    /// A coefficient function has unbounded pole order and cannot be handled
    /// as a Laurent jet.  Unreachable for finite coefficient lists; kept for
    /// completeness of the input contract.
    #[error("coefficient has an essential singularity at the origin")]
    EssentialSingularity,

    /// An operation needs more known coefficients than the inputs carry.
    #[error("truncation orders justify output only to order {have}, but order {need} was requested")]
    OrderExhausted { need: i64, have: i64 },

    /// The Poincare rank passed to `Lde::new` is not minimal for (p, q).
    #[error("rank {nu} is not minimal for the given (p, q); use Lde::from_raw")]
    NonMinimalRank { nu: u32 },

    /// Schwarzian of a ratio whose delta-derivative vanishes identically.
    #[error("ratio has vanishing delta-derivative; Schwarzian undefined")]
    DegenerateRatio,

    /// Operation is not defined for DEGENERATE singularities.
    #[error("operation not defined for a DEGENERATE singularity")]
    DegenerateInput,

    /// An exact yes/no decision (resonance, class membership) was requested on
    /// floating-point data without an explicit tolerance.
    #[error("exact decision requested on FLOAT data; pass an explicit tolerance")]
    ExactnessRequired,

    /// A degree-by-degree solve hit a resonant degree with a nonzero
    /// obstruction, so no formal solution exists.
    #[error("resonant obstruction at degree {degree}: no formal solution")]
    ResonantObstruction { degree: i64 },

    /// A verification residual exceeded the allowed tolerance.
    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    /// The question needs analytic Stokes data that was neither derivable nor
    /// supplied.
    #[error("undecidable from jets alone without Stokes data")]
    UndecidableWithoutStokes,

    /// The monodromy integration circle passes through (or encloses) a pole of
    /// the coefficients other than the origin.
    #[error("coefficient pole at {re}+{im}i obstructs the integration circle of radius {radius}")]
    PoleOnPath { re: f64, im: f64, radius: f64 },

    /// The adaptive integrator could not reach the requested tolerance.
    #[error("integrator did not reach tolerance {tol:e} (best error {best:e})")]
    ToleranceNotMet { tol: f64, best: f64 },

    /// A term-wise Laplace integral hit a Gamma pole with no cancelling zero.
    #[error("divergent term: Gamma pole at 1-mu-{j} with no cancelling factor")]
    DivergentTerm { j: usize },

    /// Catch-all for invalid arguments (bad ranks, empty data, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
