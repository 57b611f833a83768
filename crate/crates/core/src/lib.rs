//! p-adic arithmetic with honest precision tracking, circle and torus groups
//! over Qp, a catalog of symplectic group actions, and a sampling verifier for
//! momentum-map identities.
//!
//! Everything is deterministic: sampling is seeded, reports are ordered by
//! sample index, and verdicts do not depend on the parallel scheduler.

pub mod actions;
pub mod error;
pub mod exec;
pub mod groups;
pub mod padic;
pub mod verifier;

pub use error::PadicError;
pub use padic::{AnalyticKind, Comparison, FracPart, Padic, PrecisionPolicy, Prime, Valuation};
