//! Digit windows, the floor/fractional split, and digit reversal.

use super::prime::Prime;
use super::value::{pow_biguint, Padic, Valuation};
use crate::error::PadicError;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use std::fmt;

/// Element a/p^n of S = Qp/Zp in lowest form: 0 <= a < p^n and p does not
/// divide a unless n = 0 (then a = 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FracPart {
    prime: Prime,
    n: u32,
    a: BigUint,
}

impl FracPart {
    pub fn new(prime: Prime, n: u32, a: BigUint) -> Result<Self, PadicError> {
        if a >= pow_biguint(prime, n) {
            return Err(PadicError::Range(format!(
                "fractional part {a} not in A_{n} for p={prime}"
            )));
        }
        if n > 0 && (&a % prime.get()).is_zero() && !a.is_zero() {
            return Err(PadicError::Range(format!(
                "fractional part {a}/p^{n} not in lowest form"
            )));
        }
        if n > 0 && a.is_zero() {
            return Err(PadicError::Range("zero written as 0/p^n with n > 0".into()));
        }
        Ok(FracPart { prime, n, a })
    }

    pub fn zero(prime: Prime) -> Self {
        FracPart {
            prime,
            n: 0,
            a: BigUint::zero(),
        }
    }

    /// Lowest-form constructor: strips common powers of p from a.
    pub fn reduced(prime: Prime, mut n: u32, mut a: BigUint) -> Result<Self, PadicError> {
        let pb = BigUint::from(prime.get());
        while n > 0 && !a.is_zero() && (&a % &pb).is_zero() {
            a /= &pb;
            n -= 1;
        }
        if a.is_zero() {
            n = 0;
        }
        FracPart::new(prime, n, a)
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn numerator(&self) -> &BigUint {
        &self.a
    }

    pub fn is_zero(&self) -> bool {
        self.n == 0
    }

    pub fn as_rational(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.a.clone()),
            BigInt::from(pow_biguint(self.prime, self.n)),
        )
    }
}

impl fmt::Display for FracPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.a, pow_biguint(self.prime, self.n))
    }
}

/// Splits x = floor + frac with floor in Zp and frac in S. Exact on the known
/// digits; requires every negative-position digit to be determined.
pub fn floor_frac(x: &Padic) -> Result<(Padic, FracPart), PadicError> {
    let p = x.prime();
    if x.abs_prec() < 0 {
        return Err(PadicError::InsufficientPrecision(format!(
            "floor_frac needs digits up to position -1, but x is only known mod p^{}",
            x.abs_prec()
        )));
    }
    let v = match x.valuation() {
        Valuation::Unbounded { bound } => return Ok((Padic::zero(p, bound), FracPart::zero(p))),
        Valuation::Finite(v) => v,
    };
    if v >= 0 {
        return Ok((x.clone(), FracPart::zero(p)));
    }
    let n = (-v) as u32;
    let unit = x.unit_value().expect("finite valuation");
    let a = unit % pow_biguint(p, n);
    let frac = FracPart::new(p, n, a)?;
    let floor = x.sub(&super::parse::rational_to_padic(
        p,
        &frac.as_rational(),
        Some(x.abs_prec()),
        &super::value::PrecisionPolicy::default(),
    )?);
    Ok((floor, frac))
}

/// The window f_n(x): the rightmost n digits of x in Zp as an ordinary
/// integer.
pub fn residue_window(x: &Padic, n: u32) -> Result<BigUint, PadicError> {
    let p = x.prime();
    let v = match x.valuation() {
        Valuation::Finite(v) => v,
        Valuation::Unbounded { bound } => {
            if bound < i64::from(n) {
                return Err(PadicError::InsufficientPrecision(format!(
                    "window of width {n} on a value known only mod p^{bound}"
                )));
            }
            return Ok(BigUint::zero());
        }
    };
    if v < 0 {
        return Err(PadicError::Range(format!(
            "residue_window requires x in Zp (valuation {v} is negative)"
        )));
    }
    if x.abs_prec() < i64::from(n) {
        return Err(PadicError::InsufficientPrecision(format!(
            "window of width {n} exceeds known precision p^{}",
            x.abs_prec()
        )));
    }
    if n == 0 {
        return Ok(BigUint::zero());
    }
    let shifted = x.unit_value().expect("finite valuation") * pow_biguint(p, v as u32);
    Ok(shifted % pow_biguint(p, n))
}

/// r_n: reverses the base-p digits of a number in A_n.
pub fn digit_reverse(a: &BigUint, n: u32, p: Prime) -> Result<BigUint, PadicError> {
    let modulus = pow_biguint(p, n);
    if *a >= modulus {
        return Err(PadicError::Range(format!(
            "digit_reverse argument {a} not in A_{n} for p={p}"
        )));
    }
    let pb = BigUint::from(p.get());
    let mut digits = Vec::with_capacity(n as usize);
    let mut rest = a.clone();
    for _ in 0..n {
        let (q, r) = rest.div_rem(&pb);
        digits.push(r);
        rest = q;
    }
    let mut out = BigUint::zero();
    for d in digits {
        out = out * &pb + d;
    }
    Ok(out)
}
