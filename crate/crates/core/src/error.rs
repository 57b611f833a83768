//! Error type shared across the library.
//!
//! `NoRoot` and `NotRelated`-style outcomes that are mathematically meaningful
//! answers are modelled as dedicated result enums by their operations; the
//! variants here are genuine failures (bad input, unusable precision).

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum PadicError {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("digit token {digit} out of range for p={p}")]
    DigitRange { digit: String, p: u64 },

    #[error("prime mismatch: p={0} vs p={1}")]
    PrimeMismatch(u64, u64),

    #[error("division by a value indistinguishable from zero (O({p}^{bound}))")]
    DivisionByZero { p: u64, bound: i64 },

    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("no square root: {0}")]
    NoRoot(String),

    #[error("outside the convergence domain: {0}")]
    Domain(String),

    #[error("not on the circle: a^2+b^2 deviates from 1 with certainty (first difference at valuation {diff})")]
    NotOnCircle { diff: i64 },

    #[error("not in the compact subgroup: {0}")]
    NotInSubgroup(String),

    #[error("matrix is singular or has non-unit determinant: {0}")]
    SingularMatrix(String),

    #[error("rank mismatch: expected {expected} components, got {got}")]
    RankMismatch { expected: usize, got: usize },

    #[error("unknown action: {0}")]
    UnknownAction(String),

    #[error("invalid subdivision plan: {0}")]
    Plan(String),

    #[error("membership test indeterminate at this precision: {0}")]
    IndeterminateCase(String),

    #[error("group element does not match the action's group: {0}")]
    GroupMismatch(String),

    #[error("point does not match the action's phase space: {0}")]
    SpaceMismatch(String),

    #[error("rank could not be certified at this precision: {0}")]
    RankDeficiency(String),

    #[error("operation unsupported for this action: {0}")]
    UnsupportedAction(String),

    #[error("form kind unsupported here: {0}")]
    UnsupportedForm(String),

    #[error("1-form is not closed: {0}")]
    NotClosed(String),

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
}
