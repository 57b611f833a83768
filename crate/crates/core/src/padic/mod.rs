//! Capped-relative-precision arithmetic in Qp and the digit utilities built on
//! top of it: window/reverse operations, floor/fractional splits, Hensel square
//! roots, and the analytic functions exp/log/cos/sin on their convergence
//! domains.

mod digits;
mod parse;
mod prime;
mod series;
mod sqrt;
mod value;

pub use digits::{digit_reverse, floor_frac, residue_window, FracPart};
pub use parse::{parse_padic, parse_padic_with_exact, parse_point, rational_to_padic, to_literal};
pub use prime::Prime;
pub use series::{analytic_fn, AnalyticKind};
pub use sqrt::hensel_sqrt;
pub use value::{Comparison, FieldOp, Padic, PrecisionPolicy, Valuation};
