//! Crate-wide error type.
//!
//! Every fallible operation in the crate returns [`Result`]. Variants carry
//! enough context to distinguish "the input is mathematically outside the
//! operation's domain" (e.g. [`Error::NoRootInM`], [`Error::NotDivisible`])
//! from "the artifact is misconfigured" (e.g. [`Error::PrecisionTooHigh`]).

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All error conditions surfaced by the laboratory.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The value is divisible by p (or Π) and has no inverse.
    #[error("value is not a unit")]
    NotAUnit,

    /// Exact division was requested but the valuation is too small.
    #[error("exact division impossible: valuation {available} is below the required {required}")]
    NotDivisible { required: i64, available: i64 },

    /// Mixed-prime arithmetic.
    #[error("operands belong to different prime moduli ({left} vs {right})")]
    PrimeMismatch { left: u64, right: u64 },

    /// Mixed-tower arithmetic.
    #[error("operands belong to different tower configurations")]
    ParamsMismatch,

    /// An operation needs more guaranteed digits than the value carries.
    #[error("precision {actual} is below the minimum {required} required here")]
    PrecisionTooLow { required: u32, actual: u32 },

    /// The requested precision does not fit the 63-bit coefficient budget.
    #[error("precision {precision} for prime {prime} exceeds the coefficient budget")]
    PrecisionTooHigh { prime: u64, precision: u32 },

    /// Prime outside the supported set.
    #[error("prime {0} is not supported (expected 3, 5 or 7)")]
    UnsupportedPrime(u64),

    /// A formal-module operation was fed an element of valuation zero.
    #[error("element lies outside the maximal ideal")]
    NotInMaximalIdeal,

    /// The exponential series does not converge at this valuation.
    #[error("exponential diverges: Π-valuation {pi_valuation} is below 2")]
    ExpDiverges { pi_valuation: i64 },

    /// A base-field operation was fed an element with unramified part.
    #[error("element has a nonzero unramified component and is not in the base field")]
    NotInBaseField,

    /// A residue or linear equation has no solution.
    #[error("equation has no solution at working precision")]
    NoSolution,

    /// Division by the isogeny [p] has no root in the unramified tower;
    /// the first obstructed Π-digit is reported.
    #[error("no division root exists in the unramified tower: obstruction at Π-level {pi_level}")]
    NoRootInM { pi_level: i64 },

    /// A quotient expected to be a torsion point matches none.
    #[error("quotient is not a torsion point at working precision")]
    NotTorsion,

    /// The trace denominator of the quotient route has the wrong valuation.
    #[error("trace denominator has p-valuation {valuation}, expected exactly 1")]
    DenominatorDegenerate { valuation: u32 },

    /// The cocycle-splitting search exhausted its candidate budget.
    #[error("no unit candidate found within the documented search budget")]
    NoUnitCandidate,

    /// A construction-time invariant failed.
    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    /// A digit-refinement loop stopped making progress.
    #[error("digit refinement stalled: {0}")]
    ConvergenceStall(String),

    /// Per-conjugate expansion coefficients vary where they must agree.
    #[error("per-conjugate coefficients vary beyond tolerance")]
    SigmaVarianceDetected,

    /// A series truncation degree is too small for the requested construction.
    #[error("series truncation degree {actual} is below the required {required}")]
    TruncationTooSmall { required: usize, actual: usize },

    /// Text or JSON element input could not be parsed.
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    /// Anything else that is a caller error.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Convenience constructor for parse errors.
    pub fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}
