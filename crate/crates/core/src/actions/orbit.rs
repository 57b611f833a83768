//! Orbit witness for the planar rotation action.
//!
//! With the printed convention act((a,b),(x,y)) = (ax+by, ay-bx), two points
//! off the null cone are related iff the linear solve lands on the circle.
//! On the null cone (possible only when p = 1 mod 4) orbits are the origin
//! and the two punctured rays y = +-ix, so momentum alone cannot separate
//! them; the witness surfaces that strictness failure as NotRelated.

use crate::error::PadicError;
use crate::groups::CirclePoint;
use crate::padic::{hensel_sqrt, Comparison, Padic, PrecisionPolicy, Valuation};

/// Outcome of the rotation orbit criterion.
#[derive(Clone, Debug)]
pub enum RotationWitness {
    /// Verified circle element sending m1 to m2.
    Point(CirclePoint),
    /// The points lie on provably different orbits (at the working
    /// resolution) despite indistinguishable momenta.
    NotRelated,
}

#[derive(PartialEq)]
enum ZeroClass {
    Zero,
    NonZero,
    Unresolved,
}

/// Classifies a point against 0 at resolution `guard`: an imprecise zero
/// with bound >= guard counts as zero, a bound below it stays unresolved.
fn point_class(coords: &[Padic], guard: i64) -> ZeroClass {
    let mut class = ZeroClass::Zero;
    for c in coords {
        match c.valuation() {
            Valuation::Finite(_) => return ZeroClass::NonZero,
            Valuation::Unbounded { bound } if bound >= guard => {}
            Valuation::Unbounded { .. } => class = ZeroClass::Unresolved,
        }
    }
    class
}

fn norm(m: &[Padic]) -> Padic {
    m[0].mul(&m[0]).add(&m[1].mul(&m[1]))
}

/// Solves act(g, m1) = m2 for a rotation g, or certifies the points
/// unrelated. Distinct momenta short-circuit to NotRelated; an unresolvable
/// null-cone configuration raises IndeterminateCase.
pub fn rotation_orbit_witness(
    m1: &[Padic],
    m2: &[Padic],
    policy: &PrecisionPolicy,
) -> Result<RotationWitness, PadicError> {
    if m1.len() != 2 || m2.len() != 2 {
        return Err(PadicError::RankMismatch {
            expected: 2,
            got: m1.len().max(m2.len()),
        });
    }
    let p = m1[0].prime();
    let q1 = norm(m1);
    let q2 = norm(m2);
    if let Comparison::Distinct { .. } = q1.compare(&q2) {
        return Ok(RotationWitness::NotRelated);
    }
    let guard = i64::from(policy.guard_digits);

    match q1.valuation() {
        Valuation::Finite(_) => {
            let (x, y) = (&m1[0], &m1[1]);
            let (xp, yp) = (&m2[0], &m2[1]);
            let a = x.mul(xp).add(&y.mul(yp)).div(&q1)?;
            let b = xp.mul(y).sub(&x.mul(yp)).div(&q1)?;
            Ok(RotationWitness::Point(CirclePoint::new(a, b)))
        }
        Valuation::Unbounded { bound } if bound < guard => {
            Err(PadicError::IndeterminateCase(format!(
                "x^2+y^2 is an imprecise zero (bound {bound} below resolution {guard})"
            )))
        }
        Valuation::Unbounded { .. } => {
            null_cone_witness(p, m1, m2, guard, policy)
        }
    }
}

fn null_cone_witness(
    p: crate::padic::Prime,
    m1: &[Padic],
    m2: &[Padic],
    guard: i64,
    policy: &PrecisionPolicy,
) -> Result<RotationWitness, PadicError> {
    let c1 = point_class(m1, guard);
    let c2 = point_class(m2, guard);
    if c1 == ZeroClass::Unresolved || c2 == ZeroClass::Unresolved {
        return Err(PadicError::IndeterminateCase(
            "point indistinguishable from 0 below the working resolution".into(),
        ));
    }
    match (c1 == ZeroClass::Zero, c2 == ZeroClass::Zero) {
        (true, true) => {
            let prec = policy.default_digits;
            return Ok(RotationWitness::Point(CirclePoint::identity(p, prec)));
        }
        (true, false) | (false, true) => {
            // The origin is a fixed point; a nonzero null point's orbit is a
            // punctured ray. At this resolution they are different orbits.
            return Ok(RotationWitness::NotRelated);
        }
        (false, false) => {}
    }
    if p.get() % 4 != 1 {
        return Err(PadicError::IndeterminateCase(
            "nonzero null-cone points require p = 1 mod 4".into(),
        ));
    }
    let prec = policy.default_digits;
    let i = hensel_sqrt(&Padic::from_i64(p, -1, prec), policy)?;

    // Which ray is m1 on? Both tests cannot pass at once (2i x is nonzero).
    let ix = i.mul(&m1[0]);
    let plus_ray = m1[1].indistinguishable(&ix);
    let minus_ray = m1[1].indistinguishable(&ix.neg());
    if !plus_ray && !minus_ray {
        return Err(PadicError::IndeterminateCase(
            "x^2+y^2 vanishes at resolution but the point is off both rays".into(),
        ));
    }
    for m in [m1, m2] {
        if !matches!(m[0].valuation(), Valuation::Finite(_)) {
            return Err(PadicError::IndeterminateCase(
                "null-cone x coordinate unresolved".into(),
            ));
        }
    }
    // On the ray y = +-ix the rotation scales by s = a +- ib.
    let s = m2[0].div(&m1[0])?;
    if let Comparison::Distinct { .. } = m2[1].compare(&s.mul(&m1[1])) {
        return Ok(RotationWitness::NotRelated);
    }
    let s_inv = s.inv()?;
    let two = Padic::from_i64(p, 2, prec);
    let a = s.add(&s_inv).div(&two)?;
    let b = s.sub(&s_inv).div(&two.mul(&i))?;
    let b = if plus_ray { b } else { b.neg() };
    Ok(RotationWitness::Point(CirclePoint::new(a, b)))
}
