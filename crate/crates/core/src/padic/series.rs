//! exp, log, cos, sin on their p-adic convergence domains.
//!
//! The series domain for exp/cos/sin is p^d Zp with d = 2 for p = 2 and d = 1
//! otherwise; log takes arguments congruent to 1 mod p^d. Term k of the
//! exponential family has valuation k*v(t) - ord_p(k!) >= k*v(t) - (k-1)/(p-1),
//! which increases in k because v(t) >= d > 1/(p-1); summation stops once the
//! bound clears the accumulator's absolute precision. Output precision is not
//! guessed from a guard: it falls out of the additions, with constants
//! materializing at the policy's default precision.

use super::value::{Padic, PrecisionPolicy, Valuation};
use crate::error::PadicError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnalyticKind {
    Exp,
    Log,
    Cos,
    Sin,
}

impl AnalyticKind {
    pub fn name(self) -> &'static str {
        match self {
            AnalyticKind::Exp => "exp",
            AnalyticKind::Log => "log",
            AnalyticKind::Cos => "cos",
            AnalyticKind::Sin => "sin",
        }
    }
}

/// ord_p(k!) lower-bounds the denominator loss; all terms past the cutoff
/// have valuation >= target. Integer form of k*v - (k-1)/(p-1) >= target.
fn exp_tail_cleared(k: i64, v: i64, p: u64, target: i64) -> bool {
    let pm1 = (p - 1) as i64;
    k * v * pm1 - (k - 1) >= target * pm1
}

/// floor(log_p(k)) bounds ord_p(k) for the logarithm series.
fn ilog_p(mut k: i64, p: u64) -> i64 {
    let mut e = 0;
    while k >= p as i64 {
        k /= p as i64;
        e += 1;
    }
    e
}

fn series_exp_family(kind: AnalyticKind, t: &Padic, policy: &PrecisionPolicy) -> Padic {
    let p = t.prime();
    let prec = policy.default_digits;
    let one = Padic::one(p, prec);
    let vt = match t.valuation() {
        Valuation::Finite(v) => v,
        Valuation::Unbounded { .. } => unreachable!("zero handled by caller"),
    };
    let mut acc = match kind {
        AnalyticKind::Exp | AnalyticKind::Cos => one.clone(),
        AnalyticKind::Sin => t.clone(),
        AnalyticKind::Log => unreachable!("log has its own series"),
    };
    let mut term = match kind {
        AnalyticKind::Exp | AnalyticKind::Cos => one,
        AnalyticKind::Sin => t.clone(),
        AnalyticKind::Log => unreachable!(),
    };
    // k tracks the exponent of t in `term`.
    let mut k: i64 = match kind {
        AnalyticKind::Exp => 0,
        AnalyticKind::Cos => 0,
        AnalyticKind::Sin => 1,
        AnalyticKind::Log => unreachable!(),
    };
    loop {
        let target = acc.abs_prec();
        if exp_tail_cleared(k + 1, vt, p.get(), target) {
            break;
        }
        match kind {
            AnalyticKind::Exp => {
                k += 1;
                let divisor = Padic::from_i64(p, k, prec);
                term = term.mul(t).div(&divisor).expect("k is nonzero");
                acc = acc.add(&term);
            }
            // cos: next term is -(t^2 / ((k+1)(k+2))) * term; sin likewise.
            AnalyticKind::Cos | AnalyticKind::Sin => {
                let divisor = Padic::from_i64(p, (k + 1) * (k + 2), prec);
                term = term
                    .mul(t)
                    .mul(t)
                    .div(&divisor)
                    .expect("factorial step nonzero")
                    .neg();
                k += 2;
                acc = acc.add(&term);
            }
            AnalyticKind::Log => unreachable!(),
        }
        if term.is_imprecise_zero() {
            break;
        }
    }
    acc
}

fn series_log(w: &Padic, policy: &PrecisionPolicy) -> Padic {
    // log(1 + w) = w - w^2/2 + w^3/3 - ...
    let p = w.prime();
    let prec = policy.default_digits;
    let vw = match w.valuation() {
        Valuation::Finite(v) => v,
        Valuation::Unbounded { .. } => unreachable!("zero handled by caller"),
    };
    let mut acc = w.clone();
    let mut power = w.clone();
    let mut k: i64 = 1;
    loop {
        let target = acc.abs_prec();
        if (k + 1) * vw - ilog_p(k + 1, p.get()) >= target {
            break;
        }
        k += 1;
        power = power.mul(w);
        let divisor = Padic::from_i64(p, k, prec);
        let mut term = power.div(&divisor).expect("k is nonzero");
        if k % 2 == 0 {
            term = term.neg();
        }
        acc = acc.add(&term);
        if power.is_imprecise_zero() {
            break;
        }
    }
    acc
}

pub fn analytic_fn(
    kind: AnalyticKind,
    t: &Padic,
    policy: &PrecisionPolicy,
) -> Result<Padic, PadicError> {
    let p = t.prime();
    let d = i64::from(p.series_domain());
    match kind {
        AnalyticKind::Exp | AnalyticKind::Cos | AnalyticKind::Sin => match t.valuation() {
            Valuation::Finite(v) if v >= d => Ok(series_exp_family(kind, t, policy)),
            Valuation::Finite(v) => Err(PadicError::Domain(format!(
                "{} needs |t|_p <= p^-{d} (argument has valuation {v})",
                kind.name()
            ))),
            Valuation::Unbounded { bound } => {
                if bound < d {
                    return Err(PadicError::InsufficientPrecision(format!(
                        "{}: O(p^{bound}) cannot be certified to lie in p^{d}Zp",
                        kind.name()
                    )));
                }
                // |f(t) - f(0)| <= |t| <= p^-bound on the domain.
                Ok(match kind {
                    AnalyticKind::Sin => Padic::zero(p, bound),
                    _ => Padic::one(p, bound.max(1) as u32),
                })
            }
        },
        AnalyticKind::Log => {
            let one = Padic::one(p, policy.default_digits);
            let w = t.sub(&one);
            match w.valuation() {
                Valuation::Finite(v) if v >= d => Ok(series_log(&w, policy)),
                Valuation::Finite(_) => Err(PadicError::Domain(format!(
                    "log needs its argument congruent to 1 mod p^{d}"
                ))),
                Valuation::Unbounded { bound } => {
                    if bound < d {
                        return Err(PadicError::InsufficientPrecision(format!(
                            "log: argument 1 + O(p^{bound}) cannot be certified to lie in 1 + p^{d}Zp"
                        )));
                    }
                    Ok(Padic::zero(p, bound))
                }
            }
        }
    }
}
