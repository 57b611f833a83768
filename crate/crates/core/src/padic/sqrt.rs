//! Square roots in Qp by Hensel lifting.
//!
//! x = p^v * u is a square iff v is even and u is a square unit: for odd p a
//! quadratic residue mod p, for p = 2 congruent to 1 mod 8. The canonical
//! root is the one with the lexicographically smallest digit sequence (odd p:
//! the smaller leading digit; p = 2: the root congruent to 1 mod 4, since
//! both share leading digit 1).

use super::prime::Prime;
use super::value::{mod_inverse, pow_biguint, Padic, PrecisionPolicy, Valuation};
use crate::error::PadicError;
use num_bigint::BigUint;
use num_traits::{One, Zero};

fn modpow_u64(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mm = m as u128;
    let mut b = (base % m) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % mm;
        }
        b = b * b % mm;
        exp >>= 1;
    }
    acc as u64
}

/// Newton iteration r <- (r + u/r) / 2 mod p^prec; each step doubles the
/// number of correct digits, starting from a correct digit mod p.
fn lift_odd(p: Prime, u: &BigUint, prec: u32, seed: u64) -> BigUint {
    let modulus = pow_biguint(p, prec);
    let inv2 = mod_inverse(&BigUint::from(2u64), &modulus).expect("p odd");
    let mut r = BigUint::from(seed);
    let mut correct: u32 = 1;
    while correct < prec {
        let rinv = mod_inverse(&r, &modulus).expect("r is a unit");
        r = (&r + u * rinv) % &modulus * &inv2 % &modulus;
        correct *= 2;
    }
    r
}

/// Bit-by-bit lift for p = 2: given y odd with y^2 ≡ u (mod 2^(m+2)), adding
/// 2^(m+1) when the next congruence fails extends it to mod 2^(m+3).
fn lift_two(u: &BigUint, prec: u32) -> BigUint {
    debug_assert!(prec >= 3);
    let mut y = BigUint::one();
    for m in 1..=(prec - 3) {
        let wide = BigUint::one() << (m + 3);
        if (&y * &y) % &wide != u % &wide {
            y += BigUint::one() << (m + 1);
        }
        debug_assert!((&y * &y) % &wide == u % &wide);
    }
    y % (BigUint::one() << (prec - 1))
}

pub fn hensel_sqrt(x: &Padic, policy: &PrecisionPolicy) -> Result<Padic, PadicError> {
    let p = x.prime();
    let v = match x.valuation() {
        Valuation::Finite(v) => v,
        Valuation::Unbounded { bound } => {
            return Err(PadicError::InsufficientPrecision(format!(
                "square root of O(p^{bound}): no leading digit to lift from"
            )))
        }
    };
    let prec = x.rel_prec().expect("finite valuation");
    if prec < policy.guard_digits {
        return Err(PadicError::InsufficientPrecision(format!(
            "square root needs at least the policy guard of {} digits (have {prec})",
            policy.guard_digits
        )));
    }
    if v % 2 != 0 {
        return Err(PadicError::NoRoot(format!(
            "odd valuation {v}: p-adic order of a square is even"
        )));
    }
    let u = x.unit_value().expect("finite valuation");
    if p.get() == 2 {
        if prec < 3 {
            return Err(PadicError::InsufficientPrecision(
                "p=2 squares are decided by the unit mod 8; need 3 digits".into(),
            ));
        }
        let u8 = u64::try_from(u % BigUint::from(8u64)).unwrap();
        if u8 != 1 {
            return Err(PadicError::NoRoot(format!(
                "unit part is {u8} mod 8; 2-adic square units are 1 mod 8"
            )));
        }
        let y = lift_two(u, prec);
        // Canonical: the root that is 1 mod 4 (its twin is 3 mod 4).
        let out_prec = prec - 1;
        let modulus = BigUint::one() << out_prec;
        let y = if (&y % BigUint::from(4u64)) == BigUint::one() {
            y
        } else {
            (&modulus - y % &modulus) % &modulus
        };
        let root = Padic::from_bigint(p, &num_bigint::BigInt::from(y), out_prec);
        return Ok(root.shift(v / 2));
    }
    // Odd p: Euler's criterion on the leading digit.
    let d0 = u64::try_from(u % p.get()).unwrap();
    let euler = modpow_u64(d0, (p.get() - 1) / 2, p.get());
    if euler != 1 {
        return Err(PadicError::NoRoot(format!(
            "leading digit {d0} is not a quadratic residue mod {p}"
        )));
    }
    let seed = (1..p.get())
        .find(|r| r * r % p.get() == d0)
        .expect("residue has a root");
    let r = lift_odd(p, u, prec, seed);
    // Canonical: smaller leading digit among r and -r.
    let modulus = pow_biguint(p, prec);
    let neg = (&modulus - &r) % &modulus;
    let lead = |y: &BigUint| u64::try_from(y % p.get()).unwrap();
    let y = if lead(&r) <= lead(&neg) { r } else { neg };
    debug_assert!(!(&y % p.get()).is_zero());
    Ok(Padic::from_bigint(p, &num_bigint::BigInt::from(y), prec).shift(v / 2))
}
