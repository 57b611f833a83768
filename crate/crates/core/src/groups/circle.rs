//! The p-adic circle S¹_p = {(a,b) : a² + b² = 1} and its structure
//! decomposition.
//!
//! The shape of the group splits on p mod 4:
//!   - p ≡ 1 mod 4: z = a + bi identifies S¹_p with Qp^*, so an element
//!     carries a free exponent (hat = ord z), a Teichmüller index (bar, mod
//!     p−1), and a principal part exp(it) with t ∈ pZp.
//!   - p ≡ 3 mod 4: the circle is compact, Z/(p+1) × pZp; the torsion part
//!     reduces bijectively onto the F_p circle.
//!   - p = 2: Z/4 × 4Z₂ with torsion {(1,0),(0,1),(−1,0),(0,−1)}.
//!
//! `CircleTables` precomputes the session constants (i, Teichmüller lifts,
//! discrete-log tables, the canonical torsion generator); everything is
//! read-only after construction and shared freely.

use crate::error::PadicError;
use crate::padic::{analytic_fn, hensel_sqrt, AnalyticKind, Comparison, Padic, PrecisionPolicy, Prime, Valuation};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CirclePoint {
    pub a: Padic,
    pub b: Padic,
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

impl fmt::Debug for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CirclePoint{self}")
    }
}

impl CirclePoint {
    pub fn new(a: Padic, b: Padic) -> Self {
        assert!(a.prime() == b.prime(), "circle coordinates share a prime");
        CirclePoint { a, b }
    }

    pub fn prime(&self) -> Prime {
        self.a.prime()
    }

    pub fn identity(p: Prime, prec: u32) -> Self {
        CirclePoint {
            a: Padic::one(p, prec),
            b: Padic::zero(p, i64::from(prec)),
        }
    }

    /// Three-valued circle membership: a² + b² vs 1.
    pub fn on_circle(&self) -> Comparison {
        let lhs = self.a.mul(&self.a).add(&self.b.mul(&self.b));
        let prec = self
            .a
            .rel_prec()
            .or(self.b.rel_prec())
            .unwrap_or(1);
        lhs.compare(&Padic::one(self.prime(), prec))
    }

    fn require_on_circle(&self) -> Result<(), PadicError> {
        match self.on_circle() {
            Comparison::Distinct { first_diff } => Err(PadicError::NotOnCircle { diff: first_diff }),
            _ => Ok(()),
        }
    }
}

pub fn circle_mul(g: &CirclePoint, h: &CirclePoint) -> Result<CirclePoint, PadicError> {
    if g.prime() != h.prime() {
        return Err(PadicError::PrimeMismatch(g.prime().get(), h.prime().get()));
    }
    let a = g.a.mul(&h.a).sub(&g.b.mul(&h.b));
    let b = g.a.mul(&h.b).add(&g.b.mul(&h.a));
    Ok(CirclePoint { a, b })
}

pub fn circle_inv(g: &CirclePoint) -> CirclePoint {
    CirclePoint {
        a: g.a.clone(),
        b: g.b.neg(),
    }
}

/// g^e by square and multiply; e may be a full-width integer (torsion
/// projection uses e ≈ p^W).
pub fn circle_pow(g: &CirclePoint, e: &BigUint, prec: u32) -> Result<CirclePoint, PadicError> {
    let mut acc = CirclePoint::identity(g.prime(), prec);
    let mut sq = g.clone();
    let bits = e.bits();
    for i in 0..bits {
        if e.bit(i) {
            acc = circle_mul(&acc, &sq)?;
        }
        if i + 1 < bits {
            sq = circle_mul(&sq, &sq)?;
        }
    }
    Ok(acc)
}

/// t ↦ (cos t, sin t) on p^d Zp.
pub fn circle_embed(t: &Padic, policy: &PrecisionPolicy) -> Result<CirclePoint, PadicError> {
    Ok(CirclePoint {
        a: analytic_fn(AnalyticKind::Cos, t, policy)?,
        b: analytic_fn(AnalyticKind::Sin, t, policy)?,
    })
}

/// Structure coordinates of a circle element: g = torsion^bar · p^hat ·
/// embed(t), with hat always 0 unless p ≡ 1 mod 4.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleDecomposition {
    pub bar: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hat: Option<i64>,
    pub t: Padic,
}

/// Session constants for one prime at one policy. Read-only after `new`.
pub struct CircleTables {
    p: Prime,
    policy: PrecisionPolicy,
    /// Order of the torsion part: p−1, p+1, or 4.
    torsion_order: u64,
    /// p ≡ 1 mod 4: the canonical square root of −1.
    i_unit: Option<Padic>,
    /// p ≡ 1 mod 4: smallest primitive root mod p and its Teichmüller lift.
    g0: u64,
    zeta: Option<Padic>,
    /// p ≡ 1 mod 4: residue → exponent base g0.
    mult_dlog: BTreeMap<u64, u64>,
    /// p ≢ 1 mod 4: canonical torsion generator and the residue dlog table
    /// (residue pair of τ^k → k). For p = 2 residues are taken mod 8 and 4.
    torsion_gen: Option<CirclePoint>,
    fp_dlog: BTreeMap<(u64, u64), u64>,
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(m)) as u64
}

fn mult_order(a: u64, p: u64) -> u64 {
    let mut x = a % p;
    let mut k = 1;
    while x != 1 {
        x = mul_mod(x, a, p);
        k += 1;
    }
    k
}

/// Teichmüller lift: the (p−1)-th root of unity congruent to r mod p,
/// reached by iterating x ← x^p (one more correct digit per step).
fn teichmuller(p: Prime, r: u64, prec: u32) -> Padic {
    let mut x = Padic::from_u64(p, r, prec);
    for _ in 0..=prec {
        x = x.pow_int(p.get() as i64).expect("positive power");
    }
    debug_assert!(x
        .pow_int(p.get() as i64)
        .unwrap()
        .indistinguishable(&x));
    x
}

impl CircleTables {
    pub fn new(p: Prime, policy: PrecisionPolicy) -> Result<Self, PadicError> {
        let q = p.get();
        let prec = policy.default_digits;
        if q % 4 == 1 {
            let minus_one = Padic::from_i64(p, -1, prec);
            let i_unit = hensel_sqrt(&minus_one, &policy)?;
            let g0 = (2..q)
                .find(|g| mult_order(*g, q) == q - 1)
                .expect("primitive root exists");
            let zeta = teichmuller(p, g0, prec);
            let mut mult_dlog = BTreeMap::new();
            let mut pw = 1u64;
            for j in 0..(q - 1) {
                mult_dlog.insert(pw, j);
                pw = mul_mod(pw, g0, q);
            }
            return Ok(CircleTables {
                p,
                policy,
                torsion_order: q - 1,
                i_unit: Some(i_unit),
                g0,
                zeta: Some(zeta),
                mult_dlog,
                torsion_gen: None,
                fp_dlog: BTreeMap::new(),
            });
        }
        // p ≡ 3 mod 4 or p = 2: enumerate the residue circle and lift the
        // canonical generator.
        let order = if q == 2 { 4 } else { q + 1 };
        let tables = CircleTables {
            p,
            policy,
            torsion_order: order,
            i_unit: None,
            g0: 0,
            zeta: None,
            mult_dlog: BTreeMap::new(),
            torsion_gen: None,
            fp_dlog: BTreeMap::new(),
        };
        let gen = tables.canonical_torsion_generator()?;
        let mut fp_dlog = BTreeMap::new();
        let mut acc = CirclePoint::identity(p, prec);
        for k in 0..order {
            fp_dlog.insert(tables.torsion_residue(&acc)?, k);
            acc = circle_mul(&acc, &gen)?;
        }
        // Closing the cycle certifies the generator's order.
        if tables.torsion_residue(&acc)? != tables.torsion_residue(&CirclePoint::identity(p, prec))? {
            return Err(PadicError::Range(format!(
                "torsion generator does not have order {order}"
            )));
        }
        Ok(CircleTables {
            torsion_gen: Some(gen),
            fp_dlog,
            ..tables
        })
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn policy(&self) -> &PrecisionPolicy {
        &self.policy
    }

    pub fn torsion_order(&self) -> u64 {
        self.torsion_order
    }

    /// p ≡ 1 mod 4 only: the primitive root whose Teichmüller lift indexes
    /// the torsion part.
    pub fn primitive_root(&self) -> Option<u64> {
        (self.p.get() % 4 == 1).then_some(self.g0)
    }

    pub fn torsion_generator(&self) -> Option<&CirclePoint> {
        self.torsion_gen.as_ref()
    }

    /// The identifying residue of a torsion coset: coordinates mod p for odd
    /// p, mod 4 for p = 2. Multiplying by a principal part (cos t, sin t)
    /// fixes this key, so it reads off the torsion index of any element.
    fn torsion_residue(&self, g: &CirclePoint) -> Result<(u64, u64), PadicError> {
        let digits = if self.p.get() == 2 { 2 } else { 1 };
        let ra = residue_digit(&g.a, digits)?;
        let rb = residue_digit(&g.b, digits)?;
        Ok((ra, rb))
    }

    /// Enumerates residue points of maximal order and lifts the one whose
    /// digit key is lexicographically smallest at working precision.
    fn canonical_torsion_generator(&self) -> Result<CirclePoint, PadicError> {
        let q = self.p.get();
        let prec = self.policy.default_digits;
        if q == 2 {
            // Torsion is exactly {(1,0),(0,1),(−1,0),(0,−1)}; the generators
            // are (0,±1) and (0,1) has the smaller digit key.
            return Ok(CirclePoint {
                a: Padic::zero(self.p, i64::from(prec)),
                b: Padic::one(self.p, prec),
            });
        }
        // Residue circle mod p, group law as in S¹.
        let pts: Vec<(u64, u64)> = (0..q)
            .flat_map(|x| (0..q).map(move |y| (x, y)))
            .filter(|(x, y)| (x * x + y * y) % q == 1)
            .collect();
        let order = q + 1;
        assert_eq!(pts.len() as u64, order, "F_p circle has p+1 points");
        let res_mul = |u: (u64, u64), v: (u64, u64)| -> (u64, u64) {
            (
                (mul_mod(u.0, v.0, q) + q - mul_mod(u.1, v.1, q)) % q,
                (mul_mod(u.0, v.1, q) + mul_mod(u.1, v.0, q)) % q,
            )
        };
        let res_order = |u: (u64, u64)| -> u64 {
            let mut acc = u;
            let mut k = 1;
            while acc != (1, 0) {
                acc = res_mul(acc, u);
                k += 1;
            }
            k
        };
        let mut best: Option<(Vec<u64>, CirclePoint)> = None;
        for &r in &pts {
            if res_order(r) != order {
                continue;
            }
            let lift = self.torsion_lift(r)?;
            let mut key = digit_key(&lift.a, prec);
            key.extend(digit_key(&lift.b, prec));
            match &best {
                Some((k, _)) if *k <= key => {}
                _ => best = Some((key, lift)),
            }
        }
        let (_, gen) = best.expect("cyclic group of order p+1 has a generator");
        Ok(gen)
    }

    /// The torsion point with a given residue: lift the residue to any circle
    /// point, then project out the principal part with g^e, where e ≡ 1 mod
    /// (p+1) and e ≡ 0 mod p^W.
    fn torsion_lift(&self, r: (u64, u64)) -> Result<CirclePoint, PadicError> {
        let q = self.p.get();
        let prec = self.policy.default_digits;
        let point = if r.1 == 0 {
            // a = ±1 exactly.
            let a = if r.0 == 1 {
                Padic::one(self.p, prec)
            } else {
                Padic::from_i64(self.p, -1, prec)
            };
            CirclePoint {
                a,
                b: Padic::zero(self.p, i64::from(prec)),
            }
        } else {
            let a = Padic::from_u64(self.p, r.0, prec);
            let b2 = Padic::one(self.p, prec).sub(&a.mul(&a));
            let b = hensel_sqrt(&b2, &self.policy)?;
            let b = if residue_digit(&b, 1)? == r.1 { b } else { b.neg() };
            CirclePoint { a, b }
        };
        let order = self.torsion_order;
        let pw = BigUint::from(q).pow(prec);
        // e = p^W * ((p^W)^-1 mod (p+1)): kills principal, fixes torsion.
        let inv = invert_mod_small(&pw, order);
        let e = pw * inv;
        circle_pow(&point, &e, prec)
    }

    /// (hat, bar, t) coordinates of g. NotOnCircle when the invariant
    /// certainly fails; InsufficientPrecision below the guard.
    pub fn decompose(&self, g: &CirclePoint) -> Result<CircleDecomposition, PadicError> {
        if g.prime() != self.p {
            return Err(PadicError::PrimeMismatch(g.prime().get(), self.p.get()));
        }
        for coord in [&g.a, &g.b] {
            if let Some(n) = coord.rel_prec() {
                if n < self.policy.guard_digits {
                    return Err(PadicError::InsufficientPrecision(format!(
                        "decompose needs at least {} digits per coordinate (have {n})",
                        self.policy.guard_digits
                    )));
                }
            }
        }
        g.require_on_circle()?;
        if self.p.get() % 4 == 1 {
            self.decompose_split(g)
        } else {
            self.decompose_compact(g)
        }
    }

    /// p ≡ 1 mod 4: through z = a + bi ∈ Qp^*.
    fn decompose_split(&self, g: &CirclePoint) -> Result<CircleDecomposition, PadicError> {
        let i = self.i_unit.as_ref().expect("split tables");
        let zeta = self.zeta.as_ref().expect("split tables");
        let z = g.a.add(&g.b.mul(i));
        let hat = match z.valuation() {
            Valuation::Finite(v) => v,
            Valuation::Unbounded { bound } => {
                return Err(PadicError::InsufficientPrecision(format!(
                    "a + bi cancels to O(p^{bound}); more digits needed to see the valuation"
                )))
            }
        };
        let u0 = z.shift(-hat);
        let r = residue_digit(&u0, 1)?;
        let bar = *self
            .mult_dlog
            .get(&r)
            .expect("unit residue is a power of the primitive root");
        let down = (self.torsion_order - bar) % self.torsion_order;
        let u = u0.mul(&zeta.pow_int(down as i64)?);
        let lg = analytic_fn(AnalyticKind::Log, &u, &self.policy)?;
        let t = lg.mul(&i.neg()); // t = -i log(u), so that u = exp(it)
        Ok(CircleDecomposition {
            bar,
            hat: Some(hat),
            t,
        })
    }

    /// p ≡ 3 mod 4 and p = 2: torsion index from the residue table, then
    /// arcsin on the principal part.
    fn decompose_compact(&self, g: &CirclePoint) -> Result<CircleDecomposition, PadicError> {
        let bar = *self
            .fp_dlog
            .get(&self.torsion_residue(g)?)
            .ok_or(PadicError::NotOnCircle { diff: 0 })?;
        let gen = self.torsion_gen.as_ref().expect("compact tables");
        let down = (self.torsion_order - bar) % self.torsion_order;
        let principal = circle_mul(g, &circle_pow(gen, &BigUint::from(down), self.policy.default_digits)?)?;
        let t = self.arcsin(&principal)?;
        Ok(CircleDecomposition { bar, hat: None, t })
    }

    /// Newton solve of sin t = B on a principal point (A, B); validates
    /// cos t ≍ A afterwards.
    fn arcsin(&self, principal: &CirclePoint) -> Result<Padic, PadicError> {
        let b = &principal.b;
        if b.is_imprecise_zero() {
            let t = b.clone();
            return Ok(t);
        }
        let mut t = b.clone();
        for _ in 0..64 {
            let s = analytic_fn(AnalyticKind::Sin, &t, &self.policy)?;
            let c = analytic_fn(AnalyticKind::Cos, &t, &self.policy)?;
            let diff = s.sub(b);
            if diff.is_imprecise_zero() {
                let cos_check = c.compare(&principal.a);
                return match cos_check {
                    Comparison::Distinct { first_diff } => {
                        Err(PadicError::NotOnCircle { diff: first_diff })
                    }
                    _ => Ok(t),
                };
            }
            t = t.sub(&diff.div(&c)?);
        }
        Err(PadicError::InsufficientPrecision(
            "arcsin iteration failed to stabilize".into(),
        ))
    }

    /// Rebuilds the circle point torsion^bar · p^hat · embed(t).
    pub fn recompose(&self, dec: &CircleDecomposition) -> Result<CirclePoint, PadicError> {
        let prec = self.policy.default_digits;
        if self.p.get() % 4 == 1 {
            let i = self.i_unit.as_ref().expect("split tables");
            let zeta = self.zeta.as_ref().expect("split tables");
            let hat = dec.hat.unwrap_or(0);
            let u = analytic_fn(AnalyticKind::Exp, &dec.t.mul(i), &self.policy)?;
            let z = zeta.pow_int(dec.bar as i64)?.mul(&u).shift(hat);
            let zinv = z.inv()?;
            let two_inv = Padic::from_u64(self.p, 2, prec).inv()?;
            let a = z.add(&zinv).mul(&two_inv);
            let b = z.sub(&zinv).mul(&i.mul(&Padic::from_u64(self.p, 2, prec)).inv()?);
            return Ok(CirclePoint { a, b });
        }
        let gen = self.torsion_gen.as_ref().expect("compact tables");
        let torsion = circle_pow(gen, &BigUint::from(dec.bar % self.torsion_order), prec)?;
        let principal = circle_embed(&dec.t, &self.policy)?;
        circle_mul(&torsion, &principal)
    }
}

/// Leading `digits` digits of x as an integer, requiring x ∈ Zp known that
/// far (imprecise zeros with enough bound count as 0).
fn residue_digit(x: &Padic, digits: u32) -> Result<u64, PadicError> {
    let w = crate::padic::residue_window(x, digits)?;
    Ok(u64::try_from(&w).expect("small window"))
}

/// First `width` absolute digits of x in Zp, for lexicographic comparison.
fn digit_key(x: &Padic, width: u32) -> Vec<u64> {
    (0..i64::from(width)).map(|k| x.digit_at(k).unwrap_or(0)).collect()
}

/// Inverse of a mod m for small m.
fn invert_mod_small(a: &BigUint, m: u64) -> u64 {
    let r = u64::try_from(a % m).unwrap();
    (1..m).find(|x| r * x % m == 1).expect("unit mod m")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn pol() -> PrecisionPolicy {
        PrecisionPolicy::default()
    }

    fn rational_point(q: u64, an: i64, ad: i64, bn: i64, bd: i64) -> CirclePoint {
        let a = Padic::from_rational(p(q), &BigInt::from(an), &BigInt::from(ad), 32).unwrap();
        let b = Padic::from_rational(p(q), &BigInt::from(bn), &BigInt::from(bd), 32).unwrap();
        CirclePoint::new(a, b)
    }

    #[test]
    fn identity_and_inverse() {
        let g = rational_point(7, 3, 5, 4, 5);
        let id = CirclePoint::identity(p(7), 32);
        assert_eq!(circle_mul(&id, &g).unwrap(), g);
        let gi = circle_inv(&g);
        let prod = circle_mul(&g, &gi).unwrap();
        assert!(prod.a.indistinguishable(&id.a));
        assert!(prod.b.indistinguishable(&id.b));
    }

    #[test]
    fn squaring_three_four_five_matches_rational_oracle() {
        // Oracle in Q: (3/5 + 4/5 i)^2 = -7/25 + 24/25 i.
        let g = rational_point(7, 3, 5, 4, 5);
        let sq = circle_mul(&g, &g).unwrap();
        let want = rational_point(7, -7, 25, 24, 25);
        assert!(sq.a.indistinguishable(&want.a));
        assert!(sq.b.indistinguishable(&want.b));
    }

    #[test]
    fn i_squared_is_minus_one() {
        let g = CirclePoint::new(Padic::zero(p(3), 32), Padic::one(p(3), 32));
        let sq = circle_mul(&g, &g).unwrap();
        assert!(sq.a.indistinguishable(&Padic::from_i64(p(3), -1, 32)));
        assert!(sq.b.is_imprecise_zero());
    }

    #[test]
    fn embed_is_a_homomorphism() {
        let policy = pol();
        for q in [2u64, 3, 5, 7, 13] {
            let d = i64::from(p(q).series_domain());
            let s = Padic::from_u64(p(q), 2 * q + 1, 24).shift(d);
            let t = Padic::from_u64(p(q), q + 3, 24).shift(d);
            let lhs = circle_embed(&s.add(&t), &policy).unwrap();
            let rhs = circle_mul(
                &circle_embed(&s, &policy).unwrap(),
                &circle_embed(&t, &policy).unwrap(),
            )
            .unwrap();
            assert!(lhs.a.indistinguishable(&rhs.a), "p={q}");
            assert!(lhs.b.indistinguishable(&rhs.b), "p={q}");
        }
    }

    #[test]
    fn embed_five_at_p_five_matches_series_digits() {
        // cos 5 = 1 + 2*5^2 + ..., sin 5 = 5 + 4*5^3 + ... (the 5^3 digit is
        // -1/6 mod 5 = 4).
        let t = Padic::from_u64(p(5), 5, 32);
        let g = circle_embed(&t, &pol()).unwrap();
        assert_eq!(g.a.digit_at(0), Some(1));
        assert_eq!(g.a.digit_at(1), Some(0));
        assert_eq!(g.a.digit_at(2), Some(2));
        assert_eq!(g.b.digit_at(1), Some(1));
        assert_eq!(g.b.digit_at(2), Some(0));
        assert_eq!(g.b.digit_at(3), Some(4));
        assert!(matches!(g.on_circle(), Comparison::Equal { .. }));
    }

    #[test]
    fn embed_rejects_units() {
        let t = Padic::one(p(5), 8);
        assert!(matches!(
            circle_embed(&t, &pol()),
            Err(PadicError::Domain(_))
        ));
    }

    #[test]
    fn torsion_order_matches_prime_class() {
        assert_eq!(CircleTables::new(p(2), pol()).unwrap().torsion_order(), 4);
        assert_eq!(CircleTables::new(p(3), pol()).unwrap().torsion_order(), 4);
        assert_eq!(CircleTables::new(p(5), pol()).unwrap().torsion_order(), 4);
        assert_eq!(CircleTables::new(p(7), pol()).unwrap().torsion_order(), 8);
        assert_eq!(CircleTables::new(p(13), pol()).unwrap().torsion_order(), 12);
    }

    #[test]
    fn p3_canonical_generator_is_zero_one() {
        let tables = CircleTables::new(p(3), pol()).unwrap();
        let gen = tables.torsion_generator().unwrap();
        assert!(gen.a.is_imprecise_zero());
        assert!(gen.b.indistinguishable(&Padic::one(p(3), 32)));
    }

    #[test]
    fn p3_minus_one_decomposes_as_bar_two() {
        let tables = CircleTables::new(p(3), pol()).unwrap();
        let g = CirclePoint::new(Padic::from_i64(p(3), -1, 32), Padic::zero(p(3), 32));
        let dec = tables.decompose(&g).unwrap();
        assert_eq!(dec.bar, 2);
        assert_eq!(dec.hat, None);
        assert!(dec.t.is_imprecise_zero());
    }

    #[test]
    fn identity_decomposes_trivially() {
        for q in [2u64, 3, 5, 7, 13] {
            let tables = CircleTables::new(p(q), pol()).unwrap();
            let id = CirclePoint::identity(p(q), 32);
            let dec = tables.decompose(&id).unwrap();
            assert_eq!(dec.bar, 0, "p={q}");
            assert!(dec.t.is_imprecise_zero(), "p={q}");
            if q % 4 == 1 {
                assert_eq!(dec.hat, Some(0));
            }
        }
    }

    #[test]
    fn p5_zero_one_is_pure_torsion() {
        let tables = CircleTables::new(p(5), pol()).unwrap();
        let g = CirclePoint::new(Padic::zero(p(5), 32), Padic::one(p(5), 32));
        let dec = tables.decompose(&g).unwrap();
        assert_eq!(dec.hat, Some(0));
        assert!(dec.t.is_imprecise_zero());
        // z = i is the Teichmüller lift of its residue; with g0 = 2 and
        // i ≡ 2 mod 5, bar = 1.
        assert_eq!(dec.bar, 1);
        let back = tables.recompose(&dec).unwrap();
        assert!(back.a.indistinguishable(&g.a));
        assert!(back.b.indistinguishable(&g.b));
    }

    #[test]
    fn decompose_recompose_round_trips() {
        for q in [2u64, 3, 5, 7, 13] {
            let tables = CircleTables::new(p(q), pol()).unwrap();
            let d = i64::from(p(q).series_domain());
            // Torsion * embed(t) for a few torsion indices and t values.
            for bar in 0..tables.torsion_order().min(4) {
                for m in 1u64..3 {
                    let t = Padic::from_u64(p(q), 3 * m + 1, 24).shift(d);
                    let dec = CircleDecomposition {
                        bar,
                        hat: if q % 4 == 1 { Some(0) } else { None },
                        t: t.clone(),
                    };
                    let g = tables.recompose(&dec).unwrap();
                    match g.on_circle() {
                        Comparison::Distinct { .. } => panic!("recompose left the circle"),
                        _ => {}
                    }
                    let back = tables.decompose(&g).unwrap();
                    assert_eq!(back.bar, bar, "p={q} bar={bar} m={m}");
                    assert!(back.t.indistinguishable(&t), "p={q} bar={bar} m={m}: {} vs {t}", back.t);
                }
            }
        }
    }

    #[test]
    fn p5_hat_tracks_valuation() {
        let tables = CircleTables::new(p(5), pol()).unwrap();
        // z = 5: a = (5 + 1/5)/2 = 13/5, b = (5 - 1/5)/(2i).
        let dec = CircleDecomposition {
            bar: 0,
            hat: Some(1),
            t: Padic::zero(p(5), 28),
        };
        let g = tables.recompose(&dec).unwrap();
        assert!(matches!(g.on_circle(), Comparison::Equal { .. } | Comparison::Indeterminate { .. }));
        let back = tables.decompose(&g).unwrap();
        assert_eq!(back.hat, Some(1));
        assert_eq!(back.bar, 0);
    }

    #[test]
    fn off_circle_points_are_rejected() {
        let tables = CircleTables::new(p(5), pol()).unwrap();
        let g = CirclePoint::new(Padic::from_u64(p(5), 2, 8), Padic::from_u64(p(5), 1, 8));
        assert!(matches!(
            tables.decompose(&g),
            Err(PadicError::NotOnCircle { .. })
        ));
    }

    #[test]
    fn group_axioms_on_random_triples() {
        use rand::Rng;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
        for q in [3u64, 5, 7] {
            let tables = CircleTables::new(p(q), pol()).unwrap();
            for _ in 0..50 {
                let sample = |rng: &mut rand_chacha::ChaCha8Rng| {
                    let bar = rng.random_range(0..tables.torsion_order());
                    let digits = rng.random_range(1..1_000_000u64);
                    let t = Padic::from_u64(p(q), digits, 24).shift(1);
                    let hat = if q % 4 == 1 { Some(0) } else { None };
                    tables.recompose(&CircleDecomposition { bar, hat, t }).unwrap()
                };
                let x = sample(&mut rng);
                let y = sample(&mut rng);
                let z = sample(&mut rng);
                let lhs = circle_mul(&circle_mul(&x, &y).unwrap(), &z).unwrap();
                let rhs = circle_mul(&x, &circle_mul(&y, &z).unwrap()).unwrap();
                assert!(lhs.a.indistinguishable(&rhs.a));
                assert!(lhs.b.indistinguishable(&rhs.b));
            }
        }
    }
}
