use super::prime::Prime;
use crate::error::PadicError;
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Session-wide precision knobs. `default_digits` is the relative-precision
/// cap at which literals and exact constants materialize; `guard_digits` is
/// slack consumed by difference-quotient thresholds and square-root guards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub default_digits: u32,
    pub guard_digits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            default_digits: 32,
            guard_digits: 4,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(default_digits: u32, guard_digits: u32) -> Result<Self, PadicError> {
        if default_digits <= guard_digits {
            return Err(PadicError::Range(format!(
                "precision policy requires digits > guard (got {default_digits} <= {guard_digits})"
            )));
        }
        Ok(PrecisionPolicy {
            default_digits,
            guard_digits,
        })
    }
}

/// p-adic order of a value. An imprecise zero has unbounded order; the caller
/// still sees the known bound M from its O(p^M) representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    /// Order exceeds every exponent we can certify; `bound` is the O(p^bound)
    /// knowledge about the value.
    Unbounded { bound: i64 },
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Unbounded { bound } => write!(f, "inf (>= {bound})"),
        }
    }
}

/// Three-valued equality at joint precision. `Indeterminate` means an
/// imprecise zero covers the other operand, so the values may or may not be
/// equal; callers must not collapse it into `Equal`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Equal { abs_prec: i64 },
    Distinct { first_diff: i64 },
    Indeterminate { bound: i64 },
}

impl Comparison {
    /// True unless the values certainly differ on a jointly known digit.
    pub fn indistinguishable(self) -> bool {
        !matches!(self, Comparison::Distinct { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
}

#[derive(Clone, PartialEq, Eq)]
enum Repr {
    /// p^v * unit with p not dividing unit, 1 <= unit < p^prec; the value is
    /// known modulo p^(v+prec).
    Unit { v: i64, unit: BigUint, prec: u32 },
    /// An imprecise zero O(p^bound): congruent to 0 modulo p^bound, nothing
    /// known beyond that.
    Zero { bound: i64 },
}

/// Element of Qp under the capped-relative model: either p^v times a unit
/// known to `prec` significant digits, or an imprecise zero O(p^M). Values are
/// immutable; every operation returns a fresh value with honestly propagated
/// precision.
#[derive(Clone, PartialEq, Eq)]
pub struct Padic {
    p: Prime,
    repr: Repr,
}

pub(crate) fn pow_biguint(p: Prime, k: u32) -> BigUint {
    BigUint::from(p.get()).pow(k)
}

impl Padic {
    fn from_parts(p: Prime, v: i64, unit: BigUint, prec: u32) -> Self {
        debug_assert!(prec >= 1);
        debug_assert!(!(&unit % p.get()).is_zero());
        Padic {
            p,
            repr: Repr::Unit { v, unit, prec },
        }
    }

    /// The imprecise zero O(p^bound).
    pub fn zero(p: Prime, bound: i64) -> Self {
        Padic {
            p,
            repr: Repr::Zero { bound },
        }
    }

    pub fn one(p: Prime, prec: u32) -> Self {
        Padic::from_parts(p, 0, BigUint::one(), prec.max(1))
    }

    /// Normalizes `p^scale * scaled`, known modulo p^abs, into canonical form.
    fn normalized(p: Prime, scaled: &BigUint, scale: i64, abs: i64) -> Self {
        if abs <= scale {
            // No digit of the value is determined.
            return Padic::zero(p, abs);
        }
        let width = (abs - scale) as u32;
        let modulus = pow_biguint(p, width);
        let mut rest = scaled % &modulus;
        if rest.is_zero() {
            return Padic::zero(p, abs);
        }
        let pb = BigUint::from(p.get());
        let mut ord = 0u32;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            ord += 1;
        }
        let v = scale + i64::from(ord);
        let prec = (abs - v) as u32;
        let unit = rest % pow_biguint(p, prec);
        debug_assert!(!unit.is_zero());
        Padic::from_parts(p, v, unit, prec)
    }

    /// Exact integer, capped at `prec` significant digits.
    pub fn from_bigint(p: Prime, n: &BigInt, prec: u32) -> Self {
        let prec = prec.max(1);
        if n.is_zero() {
            return Padic::zero(p, i64::from(prec));
        }
        let mag = n.magnitude().clone();
        let pb = BigUint::from(p.get());
        let mut rest = mag;
        let mut v = 0i64;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            v += 1;
        }
        let modulus = pow_biguint(p, prec);
        let mut unit = rest % &modulus;
        if n.is_negative() {
            unit = &modulus - unit;
        }
        Padic::from_parts(p, v, unit, prec)
    }

    pub fn from_i64(p: Prime, n: i64, prec: u32) -> Self {
        Padic::from_bigint(p, &BigInt::from(n), prec)
    }

    pub fn from_u64(p: Prime, n: u64, prec: u32) -> Self {
        Padic::from_bigint(p, &BigInt::from(n), prec)
    }

    /// Exact rational num/den converted at `prec` significant digits.
    pub fn from_rational(p: Prime, num: &BigInt, den: &BigInt, prec: u32) -> Result<Self, PadicError> {
        if den.is_zero() {
            return Err(PadicError::DivisionByZero {
                p: p.get(),
                bound: 0,
            });
        }
        let prec = prec.max(1);
        if num.is_zero() {
            return Ok(Padic::zero(p, i64::from(prec)));
        }
        let pb = BigUint::from(p.get());
        let mut nm = num.magnitude().clone();
        let mut vn = 0i64;
        while (&nm % &pb).is_zero() {
            nm /= &pb;
            vn += 1;
        }
        let mut dm = den.magnitude().clone();
        let mut vd = 0i64;
        while (&dm % &pb).is_zero() {
            dm /= &pb;
            vd += 1;
        }
        let modulus = pow_biguint(p, prec);
        let inv = mod_inverse(&dm, &modulus).expect("denominator unit mod p^prec");
        let mut unit = (nm % &modulus) * inv % &modulus;
        if (num.is_negative()) != (den.is_negative()) {
            unit = &modulus - unit;
        }
        Ok(Padic::from_parts(p, vn - vd, unit, prec))
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Unit { v, .. } => Valuation::Finite(*v),
            Repr::Zero { bound } => Valuation::Unbounded { bound: *bound },
        }
    }

    pub fn is_imprecise_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    /// Relative precision (number of significant digits); None for zeros.
    pub fn rel_prec(&self) -> Option<u32> {
        match &self.repr {
            Repr::Unit { prec, .. } => Some(*prec),
            Repr::Zero { .. } => None,
        }
    }

    /// Exponent A such that the value is known modulo p^A.
    pub fn abs_prec(&self) -> i64 {
        match &self.repr {
            Repr::Unit { v, prec, .. } => v + i64::from(*prec),
            Repr::Zero { bound } => *bound,
        }
    }

    /// Base-p digits of the unit part, least significant first; empty for
    /// imprecise zeros.
    pub fn unit_digits(&self) -> Vec<u64> {
        match &self.repr {
            Repr::Zero { .. } => Vec::new(),
            Repr::Unit { unit, prec, .. } => {
                let mut out = Vec::with_capacity(*prec as usize);
                let pb = BigUint::from(self.p.get());
                let mut rest = unit.clone();
                for _ in 0..*prec {
                    let (q, r) = rest.div_rem(&pb);
                    out.push(u64::try_from(&r).expect("digit fits u64"));
                    rest = q;
                }
                out
            }
        }
    }

    /// Digit at absolute position `pos`; None when the position is beyond the
    /// known precision.
    pub fn digit_at(&self, pos: i64) -> Option<u64> {
        if pos >= self.abs_prec() {
            return None;
        }
        match &self.repr {
            Repr::Zero { .. } => Some(0),
            Repr::Unit { v, .. } => {
                if pos < *v {
                    Some(0)
                } else {
                    let digits = self.unit_digits();
                    Some(digits[(pos - v) as usize])
                }
            }
        }
    }

    /// The unit part as an integer (for window arithmetic). None for zeros.
    pub(crate) fn unit_value(&self) -> Option<&BigUint> {
        match &self.repr {
            Repr::Unit { unit, .. } => Some(unit),
            Repr::Zero { .. } => None,
        }
    }

    /// Multiplication by p^k; exact, no precision loss.
    pub fn shift(&self, k: i64) -> Self {
        let mut out = self.clone();
        match &mut out.repr {
            Repr::Unit { v, .. } => *v += k,
            Repr::Zero { bound } => *bound += k,
        }
        out
    }

    /// Truncates absolute precision to at most `abs`.
    pub fn truncate_abs(&self, abs: i64) -> Self {
        match &self.repr {
            Repr::Zero { bound } => Padic::zero(self.p, (*bound).min(abs)),
            Repr::Unit { v, unit, prec } => {
                let cur = v + i64::from(*prec);
                if abs >= cur {
                    self.clone()
                } else {
                    Padic::normalized(self.p, unit, *v, abs)
                }
            }
        }
    }

    fn require_same_prime(&self, rhs: &Padic) {
        assert!(
            self.p == rhs.p,
            "prime mismatch: p={} vs p={}; mixed-prime arithmetic is undefined",
            self.p,
            rhs.p
        );
    }

    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Unit { v, unit, prec } => {
                let modulus = pow_biguint(self.p, *prec);
                Padic::from_parts(self.p, *v, &modulus - unit, *prec)
            }
        }
    }

    pub fn add(&self, rhs: &Padic) -> Self {
        self.require_same_prime(rhs);
        let p = self.p;
        match (&self.repr, &rhs.repr) {
            (Repr::Zero { bound: a }, Repr::Zero { bound: b }) => Padic::zero(p, (*a).min(*b)),
            (Repr::Zero { bound }, Repr::Unit { .. }) => rhs.truncate_abs(*bound),
            (Repr::Unit { .. }, Repr::Zero { bound }) => self.truncate_abs(*bound),
            (
                Repr::Unit {
                    v: vx,
                    unit: ux,
                    prec: nx,
                },
                Repr::Unit {
                    v: vy,
                    unit: uy,
                    prec: ny,
                },
            ) => {
                let abs = (vx + i64::from(*nx)).min(vy + i64::from(*ny));
                let m = (*vx).min(*vy);
                if abs <= m {
                    return Padic::zero(p, abs);
                }
                let width = (abs - m) as u32;
                let modulus = pow_biguint(p, width);
                let sx = ux * pow_biguint(p, (vx - m) as u32) % &modulus;
                let sy = uy * pow_biguint(p, (vy - m) as u32) % &modulus;
                let sum = (sx + sy) % &modulus;
                Padic::normalized(p, &sum, m, abs)
            }
        }
    }

    pub fn sub(&self, rhs: &Padic) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Padic) -> Self {
        self.require_same_prime(rhs);
        let p = self.p;
        match (&self.repr, &rhs.repr) {
            (Repr::Zero { bound: a }, Repr::Zero { bound: b }) => Padic::zero(p, a + b),
            (Repr::Zero { bound }, Repr::Unit { v, .. })
            | (Repr::Unit { v, .. }, Repr::Zero { bound }) => Padic::zero(p, bound + v),
            (
                Repr::Unit {
                    v: vx,
                    unit: ux,
                    prec: nx,
                },
                Repr::Unit {
                    v: vy,
                    unit: uy,
                    prec: ny,
                },
            ) => {
                let prec = (*nx).min(*ny);
                let modulus = pow_biguint(p, prec);
                let unit = ux * uy % &modulus;
                Padic::from_parts(p, vx + vy, unit, prec)
            }
        }
    }

    pub fn inv(&self) -> Result<Self, PadicError> {
        match &self.repr {
            Repr::Zero { bound } => Err(PadicError::DivisionByZero {
                p: self.p.get(),
                bound: *bound,
            }),
            Repr::Unit { v, unit, prec } => {
                let modulus = pow_biguint(self.p, *prec);
                let inv = mod_inverse(unit, &modulus).expect("unit is invertible mod p^prec");
                Ok(Padic::from_parts(self.p, -v, inv, *prec))
            }
        }
    }

    pub fn div(&self, rhs: &Padic) -> Result<Self, PadicError> {
        self.require_same_prime(rhs);
        Ok(self.mul(&rhs.inv()?))
    }

    /// Integer power; negative exponents invert first.
    pub fn pow_int(&self, e: i64) -> Result<Self, PadicError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let prec = self.rel_prec().unwrap_or(1);
        let mut acc = Padic::one(self.p, prec);
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&sq);
            }
            sq = sq.mul(&sq);
            k >>= 1;
        }
        Ok(acc)
    }

    /// The spec-level checked entry point: validates prime agreement and
    /// routes to the individual operations.
    pub fn field_op(kind: FieldOp, x: &Padic, y: &Padic) -> Result<Padic, PadicError> {
        if x.p != y.p && kind != FieldOp::Neg {
            return Err(PadicError::PrimeMismatch(x.p.get(), y.p.get()));
        }
        match kind {
            FieldOp::Add => Ok(x.add(y)),
            FieldOp::Sub => Ok(x.sub(y)),
            FieldOp::Mul => Ok(x.mul(y)),
            FieldOp::Div => x.div(y),
            FieldOp::Neg => Ok(x.neg()),
        }
    }

    /// Three-valued comparison at joint precision.
    pub fn compare(&self, rhs: &Padic) -> Comparison {
        self.require_same_prime(rhs);
        match (&self.repr, &rhs.repr) {
            (Repr::Zero { bound: a }, Repr::Zero { bound: b }) => Comparison::Indeterminate {
                bound: (*a).min(*b),
            },
            (Repr::Zero { bound }, Repr::Unit { v, .. })
            | (Repr::Unit { v, .. }, Repr::Zero { bound }) => {
                if v < bound {
                    Comparison::Distinct { first_diff: *v }
                } else {
                    Comparison::Indeterminate { bound: *bound }
                }
            }
            (Repr::Unit { .. }, Repr::Unit { .. }) => match self.sub(rhs).repr {
                Repr::Zero { bound } => Comparison::Equal { abs_prec: bound },
                Repr::Unit { v, .. } => Comparison::Distinct { first_diff: v },
            },
        }
    }

    pub fn indistinguishable(&self, rhs: &Padic) -> bool {
        self.compare(rhs).indistinguishable()
    }
}

/// Modular inverse via extended Euclid; None when gcd != 1.
pub(crate) fn mod_inverse(a: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    let a = BigInt::from_biguint(Sign::Plus, a % modulus);
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    let mut x = e.x % &m;
    if x.is_negative() {
        x += &m;
    }
    Some(x.magnitude().clone())
}

impl fmt::Display for Padic {
    /// Canonical literal form; the same string `parse_padic` accepts.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::parse::to_literal(self))
    }
}

impl fmt::Debug for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Padic[p={}]({})", self.p, self)
    }
}

#[derive(Serialize, Deserialize)]
struct PadicJson {
    p: u64,
    v: ValOrInf,
    digits: Vec<u64>,
    prec: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValOrInf {
    Int(i64),
    Tag(String),
}

impl Serialize for Padic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let json = match &self.repr {
            Repr::Unit { v, prec, .. } => PadicJson {
                p: self.p.get(),
                v: ValOrInf::Int(*v),
                digits: self.unit_digits(),
                prec: i64::from(*prec),
            },
            Repr::Zero { bound } => PadicJson {
                p: self.p.get(),
                v: ValOrInf::Tag("inf".into()),
                digits: Vec::new(),
                prec: *bound,
            },
        };
        json.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Padic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let json = PadicJson::deserialize(d)?;
        let p = Prime::new(json.p).map_err(D::Error::custom)?;
        match json.v {
            ValOrInf::Tag(t) if t == "inf" => Ok(Padic::zero(p, json.prec)),
            ValOrInf::Tag(t) => Err(D::Error::custom(format!("bad valuation tag {t:?}"))),
            ValOrInf::Int(v) => {
                if json.prec < 1 || json.digits.len() as i64 != json.prec {
                    return Err(D::Error::custom("digits length must equal prec"));
                }
                let mut unit = BigUint::zero();
                for (i, d) in json.digits.iter().enumerate() {
                    if *d >= json.p {
                        return Err(D::Error::custom(format!("digit {d} out of range")));
                    }
                    unit += d * pow_biguint(p, i as u32);
                }
                if (&unit % p.get()).is_zero() {
                    return Err(D::Error::custom("leading digit must be nonzero"));
                }
                Ok(Padic::from_parts(p, v, unit, json.prec as u32))
            }
        }
    }
}
