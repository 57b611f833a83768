//! Deterministic sample streams for the numeric checks.
//!
//! Every sampler derives its randomness from (seed, label) so repeated runs
//! of the same check see the same points and group elements, check by check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::actions::{
    ActionDescriptor, ActionKind, AdditiveDomain, GroupElement, GroupSpec, PhasePoint,
    SpaceFactor,
};
use crate::error::PadicError;
use crate::groups::{circle_embed, circle_mul, CirclePoint, CircleTables, SO3, TorusElement};
use crate::padic::{hensel_sqrt, Padic, Prime};

/// A reproducible generator whose stream depends on the seed and a label.
pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    let mut s = [0u8; 32];
    s[..8].copy_from_slice(&seed.to_le_bytes());
    for (i, b) in label.bytes().enumerate() {
        s[8 + (i % 24)] ^= b.wrapping_mul(31).wrapping_add(i as u8);
    }
    ChaCha8Rng::from_seed(s)
}

fn unit(p: Prime, prec: u32, rng: &mut impl Rng) -> Padic {
    Padic::from_u64(p, rng.random::<u64>() | 1, prec)
}

/// A sphere point: small (x, y), z lifted by Hensel from 1 - x^2 - y^2 with
/// a random sign.
fn sphere_coords(p: Prime, prec: u32, rng: &mut impl Rng) -> Result<Vec<Padic>, PadicError> {
    let e = if p.get() == 2 { 2 } else { 1 };
    let x = Padic::from_u64(p, rng.random::<u64>(), prec).shift(e);
    let y = Padic::from_u64(p, rng.random::<u64>(), prec).shift(e);
    let one = Padic::from_i64(p, 1, prec + 4);
    let z2 = one.sub(&x.mul(&x)).sub(&y.mul(&y));
    let policy = crate::padic::PrecisionPolicy { default_digits: prec, guard_digits: 4 };
    let z = hensel_sqrt(&z2, &policy)?;
    let z = if rng.random::<bool>() { z } else { z.neg() };
    Ok(vec![x, y, z])
}

/// Draws `count` phase points from the action's space, stratified so that
/// region boundaries and ball structure get exercised: for the piecewise
/// action half the points land inside the deep region, half outside.
pub fn sample_points(
    d: &ActionDescriptor,
    count: usize,
    seed: u64,
) -> Result<Vec<PhasePoint>, PadicError> {
    sample_points_shifted(d, count, seed, -2, "points")
}

/// Like [`sample_points`] but restricted to the unit polydisc (coordinate
/// valuations at least 0).  Checks that divide identity-style comparisons by
/// p^k need the extra headroom to stay above the certification threshold.
pub fn sample_points_integral(
    d: &ActionDescriptor,
    count: usize,
    seed: u64,
) -> Result<Vec<PhasePoint>, PadicError> {
    sample_points_shifted(d, count, seed, 0, "integral-points")
}

fn sample_points_shifted(
    d: &ActionDescriptor,
    count: usize,
    seed: u64,
    min_shift: i64,
    label: &str,
) -> Result<Vec<PhasePoint>, PadicError> {
    let mut rng = rng_for(seed, &format!("{}:{}", label, d.name));
    let p = d.p;
    let prec = d.policy.default_digits;
    let piecewise = matches!(d.kind, ActionKind::Piecewise { .. });
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let mut coords = Vec::with_capacity(d.dim());
        for factor in &d.space.factors {
            match factor {
                SpaceFactor::Sphere => coords.extend(sphere_coords(p, prec, &mut rng)?),
                SpaceFactor::Affine { dim } => {
                    for j in 0..*dim {
                        if piecewise && j < 2 {
                            // Alternate between the deep region (first two
                            // coordinates divisible by p) and its complement
                            // (first coordinate a unit).
                            if idx % 2 == 0 {
                                coords.push(unit(p, prec, &mut rng).shift(1));
                            } else if j == 0 {
                                coords.push(unit(p, prec, &mut rng));
                            } else {
                                let shift = rng.random_range(0..2);
                                coords.push(unit(p, prec, &mut rng).shift(shift));
                            }
                        } else {
                            let shift = rng.random_range(min_shift..3);
                            coords.push(unit(p, prec, &mut rng).shift(shift));
                        }
                    }
                }
                SpaceFactor::Ball { dim } => {
                    for _ in 0..*dim {
                        coords.push(Padic::from_u64(p, rng.random::<u64>(), prec));
                    }
                }
            }
        }
        out.push(d.phase_point(coords)?);
    }
    Ok(out)
}

fn circle_element(
    tables: &CircleTables,
    policy: &crate::padic::PrecisionPolicy,
    rng: &mut impl Rng,
) -> Result<CirclePoint, PadicError> {
    let p = tables.prime();
    let prec = policy.default_digits;
    let t = Padic::from_u64(p, rng.random::<u64>(), prec)
        .shift(p.series_domain() + rng.random_range(0..3));
    let mut g = circle_embed(&t, policy)?;
    if let Some(tor) = tables.torsion_generator() {
        for _ in 0..rng.random_range(0..4u32) {
            g = circle_mul(&g, tor)?;
        }
    }
    Ok(g)
}

/// Draws `count` group elements.  `floor` bounds the valuation of additive
/// components from below (used by difference-quotient checks, which need the
/// group element's digit window to stay inside the step size); `None` allows
/// the full stratified range including the deep negative ladder for the
/// digit action.
pub fn sample_groups(
    d: &ActionDescriptor,
    count: usize,
    seed: u64,
    floor: Option<i64>,
) -> Result<Vec<GroupElement>, PadicError> {
    let mut rng = rng_for(seed, &format!("groups:{}", d.name));
    let p = d.p;
    let prec = d.policy.default_digits;
    let digit_action = matches!(d.kind, ActionKind::DigitCounterexample);
    let tables = match &d.group {
        GroupSpec::CompactTorus { .. } => Some(CircleTables::new(p, d.policy)?),
        _ => None,
    };
    let mut out = Vec::with_capacity(count);
    for idx in 0..count {
        let g = match &d.group {
            GroupSpec::Additive { k, domain } => {
                let comps = (0..*k)
                    .map(|_| {
                        if digit_action && idx < 8 && *domain == AdditiveDomain::Qp {
                            // Deterministic ladder p^-1, p^-2, ... so the
                            // non-equivariance of the digit action shows up
                            // at small sample counts.
                            let n = (idx as i64 % 8) + 1;
                            let n = floor.map_or(n, |f| n.min(-f).max(1));
                            return Padic::one(p, prec).shift(-n);
                        }
                        let base = Padic::from_u64(p, rng.random::<u64>(), prec);
                        let shift = match domain {
                            AdditiveDomain::Qp => {
                                let lo = if digit_action { -6 } else { -2 };
                                let lo = floor.map_or(lo, |f| lo.max(f));
                                rng.random_range(lo..3)
                            }
                            AdditiveDomain::Zp => rng.random_range(0..3),
                            AdditiveDomain::PZp => rng.random_range(1..4),
                        };
                        base.shift(shift)
                    })
                    .collect();
                GroupElement::Additive(comps)
            }
            GroupSpec::CompactTorus { k } => {
                let tables = tables.as_ref().expect("tables built for torus groups");
                let comps = (0..*k)
                    .map(|_| circle_element(tables, &d.policy, &mut rng))
                    .collect::<Result<Vec<_>, _>>()?;
                GroupElement::Torus(TorusElement::new(comps))
            }
            GroupSpec::SpecialOrthogonal3 => {
                let d0 = p.series_domain();
                let mut embed = || -> Result<CirclePoint, PadicError> {
                    let t = Padic::from_u64(p, rng.random::<u64>(), prec).shift(d0);
                    circle_embed(&t, &d.policy)
                };
                let r = SO3::rotation_x(&embed()?)
                    .mul(&SO3::rotation_y(&embed()?))?
                    .mul(&SO3::rotation_z(&embed()?))?;
                GroupElement::Rotation(r)
            }
        };
        out.push(g);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::ActionDescriptor;
    use crate::padic::{PrecisionPolicy, Valuation};

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn policy() -> PrecisionPolicy {
        PrecisionPolicy::default()
    }

    #[test]
    fn points_are_deterministic_in_the_seed() {
        let d = ActionDescriptor::rotation_plane(p(5), policy());
        let a = sample_points(&d, 6, 9).unwrap();
        let b = sample_points(&d, 6, 9).unwrap();
        for (ma, mb) in a.iter().zip(&b) {
            assert!(ma.indistinguishable(mb));
        }
        let c = sample_points(&d, 6, 10).unwrap();
        let all_same = a
            .iter()
            .zip(&c)
            .all(|(ma, mc)| ma.indistinguishable(mc));
        assert!(!all_same);
    }

    #[test]
    fn integral_points_have_nonnegative_valuations() {
        let d = ActionDescriptor::translation(p(5), policy(), 2).unwrap();
        for m in sample_points_integral(&d, 8, 3).unwrap() {
            for c in &m.coords {
                match c.valuation() {
                    Valuation::Finite(v) => assert!(v >= 0),
                    Valuation::Unbounded { .. } => {}
                }
            }
        }
    }

    #[test]
    fn sphere_samples_lie_on_the_sphere() {
        let d = ActionDescriptor::rotation_sphere(p(7), policy());
        for m in sample_points(&d, 8, 1).unwrap() {
            m.check_membership().unwrap();
        }
    }

    #[test]
    fn group_samples_satisfy_the_group_laws() {
        for name in ["translation", "rotation_plane", "so3_angular_momentum", "digit_counterexample"] {
            let d = ActionDescriptor::by_name(name, p(5), policy()).unwrap();
            for g in sample_groups(&d, 10, 4, None).unwrap() {
                d.check_group(&g).unwrap();
            }
        }
    }

    #[test]
    fn digit_sampler_includes_deep_shifts() {
        let d = ActionDescriptor::digit_counterexample(p(3), policy());
        let gs = sample_groups(&d, 8, 0, None).unwrap();
        let deep = gs.iter().any(|g| match g {
            crate::actions::GroupElement::Additive(v) => {
                matches!(v[0].valuation(), Valuation::Finite(w) if w <= -3)
            }
            _ => false,
        });
        assert!(deep);
        // A pullback-style floor keeps every shift above the step window.
        let floored = sample_groups(&d, 8, 0, Some(-2)).unwrap();
        for g in floored {
            if let crate::actions::GroupElement::Additive(v) = g {
                if let Valuation::Finite(w) = v[0].valuation() {
                    assert!(w >= -2);
                }
            }
        }
    }
}
