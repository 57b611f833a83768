//! Action-law property tests across the whole catalog: identity and
//! compatibility, momentum invariance and equivariance, generator tangency,
//! the digit action's conjugation identity, and ball-tree bookkeeping.

use num_bigint::BigInt;
use num_rational::BigRational;
use padic_actions::actions::{
    digit_act, digit_act_window, digit_orbit_equiv, digit_phi, rotation_orbit_witness,
    ActionDescriptor, ActionKind, BallTree, GroupElement, GroupSpec, OrbitOutcome, OrbitPoint,
    PhasePoint, RotationWitness, SpaceFactor,
};
use padic_actions::groups::{circle_embed, circle_mul, CircleTables, LieAlgebraVector, SO3};
use padic_actions::padic::hensel_sqrt;
use padic_actions::{Padic, PrecisionPolicy, Prime};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const PRIMES: [u64; 3] = [2, 3, 5];

fn prime(q: u64) -> Prime {
    Prime::new(q).unwrap()
}

fn policy() -> PrecisionPolicy {
    PrecisionPolicy::default()
}

fn rng_for(label: &str) -> StdRng {
    let mut seed = [0u8; 32];
    for (i, b) in label.bytes().enumerate() {
        seed[i % 32] ^= b;
    }
    StdRng::from_seed(seed)
}

/// A random circle element of the compact group: torsion power times a
/// principal embed.
fn sample_circle(tables: &CircleTables, rng: &mut impl Rng) -> padic_actions::groups::CirclePoint {
    let p = tables.prime();
    let d = p.series_domain();
    let t = Padic::from_u64(p, rng.random::<u64>(), 24).shift(d + rng.random_range(0..3));
    let mut g = circle_embed(&t, &policy()).unwrap();
    if let Some(tor) = tables.torsion_generator() {
        let reps = rng.random_range(0..4u32);
        for _ in 0..reps {
            g = circle_mul(&g, tor).unwrap();
        }
    }
    g
}

fn sample_group(d: &ActionDescriptor, tables: &CircleTables, rng: &mut impl Rng) -> GroupElement {
    let p = d.p;
    match &d.group {
        GroupSpec::Additive { k, domain } => {
            let digit_action = matches!(d.kind, ActionKind::DigitCounterexample);
            let comps = (0..*k)
                .map(|_| {
                    let base = Padic::from_u64(p, rng.random::<u64>(), 24);
                    let shift = match domain {
                        padic_actions::actions::AdditiveDomain::Qp => {
                            if digit_action {
                                rng.random_range(-6..1)
                            } else {
                                rng.random_range(-2..3)
                            }
                        }
                        padic_actions::actions::AdditiveDomain::Zp => 0,
                        padic_actions::actions::AdditiveDomain::PZp => 1,
                    };
                    base.shift(shift)
                })
                .collect();
            GroupElement::Additive(comps)
        }
        GroupSpec::CompactTorus { k } => GroupElement::Torus(
            padic_actions::groups::TorusElement::new(
                (0..*k).map(|_| sample_circle(tables, rng)).collect(),
            ),
        ),
        GroupSpec::SpecialOrthogonal3 => {
            let d0 = p.series_domain();
            let mut embed = || {
                let t = Padic::from_u64(p, rng.random::<u64>(), 24).shift(d0);
                circle_embed(&t, &policy()).unwrap()
            };
            let r = SO3::rotation_x(&embed())
                .mul(&SO3::rotation_y(&embed()))
                .unwrap()
                .mul(&SO3::rotation_z(&embed()))
                .unwrap();
            GroupElement::Rotation(r)
        }
    }
}

/// A sphere point: small (x, y), z lifted by Hensel from 1 - x^2 - y^2.
fn sample_sphere(p: Prime, rng: &mut impl Rng) -> Vec<Padic> {
    let e = if p.get() == 2 { 2 } else { 1 };
    let x = Padic::from_u64(p, rng.random::<u64>(), 24).shift(e);
    let y = Padic::from_u64(p, rng.random::<u64>(), 24).shift(e);
    let one = Padic::from_i64(p, 1, 28);
    let z2 = one.sub(&x.mul(&x)).sub(&y.mul(&y));
    let z = hensel_sqrt(&z2, &policy()).unwrap();
    let z = if rng.random::<bool>() { z } else { z.neg() };
    vec![x, y, z]
}

fn sample_point(d: &ActionDescriptor, rng: &mut impl Rng) -> PhasePoint {
    let p = d.p;
    let mut coords = Vec::with_capacity(d.dim());
    for factor in &d.space.factors {
        match factor {
            SpaceFactor::Sphere => coords.extend(sample_sphere(p, rng)),
            SpaceFactor::Affine { dim } => {
                for _ in 0..*dim {
                    let shift = rng.random_range(-2..3);
                    coords.push(Padic::from_u64(p, rng.random::<u64>() | 1, 24).shift(shift));
                }
            }
            SpaceFactor::Ball { dim } => {
                for _ in 0..*dim {
                    coords.push(Padic::from_u64(p, rng.random::<u64>() | 1, 24));
                }
            }
        }
    }
    d.phase_point(coords).unwrap()
}

fn points_agree(a: &PhasePoint, b: &PhasePoint) -> bool {
    a.coords
        .iter()
        .zip(&b.coords)
        .all(|(x, y)| x.indistinguishable(y))
}

#[test]
fn identity_and_compatibility_laws() {
    for q in PRIMES {
        let p = prime(q);
        let tables = CircleTables::new(p, policy()).unwrap();
        for name in ActionDescriptor::registry_names() {
            let d = ActionDescriptor::by_name(name, p, policy()).unwrap();
            let mut rng = rng_for(&format!("laws-{q}-{name}"));
            for _ in 0..40 {
                let m = sample_point(&d, &mut rng);
                let id = d.group_identity();
                let fixed = d.act(&id, &m).unwrap();
                assert!(points_agree(&fixed, &m), "{name}@{q}: identity law");

                let g = sample_group(&d, &tables, &mut rng);
                let h = sample_group(&d, &tables, &mut rng);
                let gh = d.group_mul(&g, &h).unwrap();
                let seq = d.act(&g, &d.act(&h, &m).unwrap()).unwrap();
                let joint = d.act(&gh, &m).unwrap();
                assert!(
                    points_agree(&seq, &joint),
                    "{name}@{q}: compatibility law"
                );

                let ginv = d.group_inv(&g).unwrap();
                let back = d.act(&ginv, &d.act(&g, &m).unwrap()).unwrap();
                assert!(points_agree(&back, &m), "{name}@{q}: inverse law");
            }
        }
    }
}

#[test]
fn momentum_is_invariant_for_hamiltonian_actions() {
    for q in PRIMES {
        let p = prime(q);
        let tables = CircleTables::new(p, policy()).unwrap();
        for name in ActionDescriptor::registry_names() {
            let d = ActionDescriptor::by_name(name, p, policy()).unwrap();
            if !d.flags.hamiltonian {
                continue;
            }
            let mut rng = rng_for(&format!("mominv-{q}-{name}"));
            for _ in 0..40 {
                let m = sample_point(&d, &mut rng);
                let g = sample_group(&d, &tables, &mut rng);
                let mu = d.momentum(&m).unwrap();
                let moved = d.act(&g, &m).unwrap();
                let mu2 = d.momentum(&moved).unwrap();
                let expect = d.coadjoint(&g, &mu).unwrap();
                for (a, b) in mu2.components.iter().zip(&expect.components) {
                    assert!(
                        a.indistinguishable(b),
                        "{name}@{q}: momentum equivariance, {a} vs {b}"
                    );
                }
            }
        }
    }
}

#[test]
fn generators_are_tangent() {
    for q in PRIMES {
        let p = prime(q);
        for name in ActionDescriptor::registry_names() {
            let d = ActionDescriptor::by_name(name, p, policy()).unwrap();
            let mut rng = rng_for(&format!("tangent-{q}-{name}"));
            for _ in 0..20 {
                let m = sample_point(&d, &mut rng);
                let xi = LieAlgebraVector::new(
                    (0..d.lie_rank())
                        .map(|_| Padic::from_u64(d.p, rng.random::<u64>(), 24))
                        .collect(),
                );
                let v = d.generator(&xi, &m).unwrap();
                v.check_tangency().unwrap();
            }
        }
    }
}

#[test]
fn digit_action_is_free_on_exact_group_elements() {
    let p = prime(3);
    let d = ActionDescriptor::digit_counterexample(p, policy());
    let mut rng = rng_for("free-digit");
    for _ in 0..100 {
        let m = sample_point(&d, &mut rng);
        // Exact nonzero g: an integer plus a p-power tail.
        let num = rng.random_range(1..6561i64);
        let shift = rng.random_range(-6..3);
        let g = Padic::from_i64(p, num, 26).shift(shift);
        let moved = d
            .act(&GroupElement::Additive(vec![g]), &m)
            .unwrap();
        assert!(
            !points_agree(&moved, &m),
            "digit action must be free: g = {num}*3^{shift}"
        );
    }
}

#[test]
fn digit_phi_conjugates_the_action_to_translation() {
    // phi_n(g . m) = phi_n(m) + p^n g for every window n >= the minimal one.
    for q in PRIMES {
        let p = prime(q);
        let mut rng = rng_for(&format!("phi-conj-{q}"));
        for _ in 0..120 {
            let x = Padic::from_u64(p, rng.random::<u64>(), 24);
            let y = Padic::from_u64(p, rng.random::<u64>(), 24);
            let g = Padic::from_u64(p, rng.random::<u64>(), 24)
                .shift(rng.random_range(-6..1));
            let n_min = match g.valuation() {
                padic_actions::Valuation::Finite(v) if v < 0 => (-v) as u32,
                _ => 0,
            };
            for n in n_min..n_min + 3 {
                let (x2, y2) = digit_act_window(&g, &x, &y, n).unwrap();
                let lhs = digit_phi(n, &x2, &y2).unwrap();
                let rhs = digit_phi(n, &x, &y).unwrap().add(&g.shift(i64::from(n)));
                assert!(
                    lhs.indistinguishable(&rhs),
                    "phi conjugation at p={q}, n={n}: {lhs} vs {rhs}"
                );
            }
        }
    }
}

#[test]
fn digit_window_choice_does_not_change_the_action() {
    for q in PRIMES {
        let p = prime(q);
        let mut rng = rng_for(&format!("window-{q}"));
        for _ in 0..120 {
            let x = Padic::from_u64(p, rng.random::<u64>(), 24);
            let y = Padic::from_u64(p, rng.random::<u64>(), 24);
            let g = Padic::from_u64(p, rng.random::<u64>(), 24)
                .shift(rng.random_range(-6..1));
            let (bx, by) = digit_act(&g, &x, &y).unwrap();
            let n_min = match g.valuation() {
                padic_actions::Valuation::Finite(v) if v < 0 => (-v) as u32,
                _ => 0,
            };
            for extra in 1..=4u32 {
                let (wx, wy) = digit_act_window(&g, &x, &y, n_min + extra).unwrap();
                assert!(
                    bx.indistinguishable(&wx) && by.indistinguishable(&wy),
                    "window independence at p={q}, extra={extra}"
                );
            }
        }
    }
}

#[test]
fn digit_orbit_equiv_matches_constructed_orbits() {
    let p = prime(3);
    let mut rng = rng_for("digit-orbit");
    for _ in 0..60 {
        // Exact integer starting point and exact group element.
        let x0 = rng.random_range(0..81i64);
        let y0 = rng.random_range(0..6561i64);
        let num = rng.random_range(0..6561i64);
        let shift = rng.random_range(-5..1);
        let g = Padic::from_i64(p, num, 30).shift(shift);
        let x = Padic::from_i64(p, x0, 30);
        let y = Padic::from_i64(p, y0, 30);
        let (x2, y2) = digit_act(&g, &x, &y).unwrap();

        // Recover the moved y exactly: its digits below the window are y0's,
        // at the window they come from the reversed sum; read them off the
        // padic result, which has full precision for exact inputs.
        let mut acc = BigInt::from(0);
        let mut pw = BigInt::from(1);
        for pos in 0..24 {
            let d = y2.digit_at(pos).unwrap_or(0);
            acc += BigInt::from(d) * &pw;
            pw *= 3;
        }
        let m1 = OrbitPoint::with_exact_y(
            x.clone(),
            y.clone(),
            BigRational::from_integer(BigInt::from(y0)),
        )
        .unwrap();
        let m2 = OrbitPoint::with_exact_y(x2.clone(), y2.clone(), BigRational::from_integer(acc))
            .unwrap();
        match digit_orbit_equiv(&m1, &m2).unwrap() {
            OrbitOutcome::Witness(w) => {
                let (wx, wy) = digit_act(&w, &x, &y).unwrap();
                assert!(wx.indistinguishable(&x2) && wy.indistinguishable(&y2));
            }
            other => panic!("constructed orbit pair must verify, got {other:?}"),
        }
    }
}

#[test]
fn rotation_orbit_witness_round_trips() {
    for q in [3u64, 7, 13] {
        let p = prime(q);
        let d = ActionDescriptor::rotation_plane(p, policy());
        let tables = CircleTables::new(p, policy()).unwrap();
        let mut rng = rng_for(&format!("rot-orbit-{q}"));
        for _ in 0..40 {
            let m = sample_point(&d, &mut rng);
            let g = sample_circle(&tables, &mut rng);
            let moved = d
                .act(
                    &GroupElement::Torus(padic_actions::groups::TorusElement::new(vec![g])),
                    &m,
                )
                .unwrap();
            match rotation_orbit_witness(&m.coords, &moved.coords, &policy()).unwrap() {
                RotationWitness::Point(w) => {
                    let back = d
                        .act(
                            &GroupElement::Torus(padic_actions::groups::TorusElement::new(vec![
                                w,
                            ])),
                            &m,
                        )
                        .unwrap();
                    assert!(points_agree(&back, &moved), "witness must reproduce orbit");
                }
                RotationWitness::NotRelated => panic!("orbit pair reported unrelated"),
            }
        }
    }
}

#[test]
fn rotation_orbit_distinct_momenta_never_verify() {
    let p = prime(7);
    let mut rng = rng_for("rot-orbit-neg");
    for _ in 0..60 {
        let x1 = Padic::from_u64(p, rng.random::<u64>() | 1, 24);
        let y1 = Padic::from_u64(p, rng.random::<u64>(), 24);
        // Scale by a non-unit to move the momentum off the first orbit.
        let x2 = x1.shift(1);
        let y2 = y1.shift(1);
        let out = rotation_orbit_witness(
            &[x1.clone(), y1.clone()],
            &[x2, y2],
            &policy(),
        )
        .unwrap();
        assert!(
            matches!(out, RotationWitness::NotRelated),
            "p-scaled point quadruples the norm, so orbits differ"
        );
    }
}

#[test]
fn ball_tree_census_matches_leaf_count() {
    let mut rng = rng_for("census");
    for q in [2u64, 3] {
        let p = prime(q);
        for n in 1..=2usize {
            for _ in 0..20 {
                let steps = rng.random_range(0..4usize);
                let mut plan = Vec::new();
                let mut tree = BallTree::build(p, n, &[]).unwrap();
                for _ in 0..steps {
                    plan.push(rng.random_range(0..tree.census()));
                    tree = BallTree::build(p, n, &plan).unwrap();
                }
                let area = (q.pow(2 * n as u32) as usize - 1) * plan.len();
                assert_eq!(tree.census(), 1 + area);
                assert_eq!(tree.leaves().len(), tree.census());

                // Locate any sampled point; its leaf center matches the
                // point's digits to the leaf depth.
                let coords: Vec<Padic> = (0..2 * n)
                    .map(|_| Padic::from_u64(p, rng.random::<u64>(), 24))
                    .collect();
                let leaf = tree.locate(&coords).unwrap();
                for (j, c) in coords.iter().enumerate() {
                    let center =
                        Padic::from_bigint(p, &leaf.center[j], 24 + leaf.depth);
                    let diff = c.sub(&center);
                    let ok = match diff.valuation() {
                        padic_actions::Valuation::Finite(v) => v >= i64::from(leaf.depth),
                        padic_actions::Valuation::Unbounded { bound } => {
                            bound >= i64::from(leaf.depth)
                        }
                    };
                    assert!(ok, "leaf center must match point digits");
                }
            }
        }
    }
}

#[test]
fn non_properness_escapes_every_ball() {
    // The witness sequence g_n = p^-n sends (0,0) to (0, p^(n-1)): group
    // elements blow up while source and image stay in the unit ball.
    for q in PRIMES {
        let p = prime(q);
        for n in 1..=12u32 {
            let g = Padic::from_i64(p, 1, 30).shift(-i64::from(n));
            let x = Padic::zero(p, 30);
            let y = Padic::zero(p, 30);
            let (x2, y2) = digit_act(&g, &x, &y).unwrap();
            let expect = Padic::from_i64(p, 1, 30).shift(i64::from(n) - 1);
            assert!(x2.indistinguishable(&x));
            assert!(y2.indistinguishable(&expect));
        }
    }
}
