//! Property tests for the arithmetic layer: ring axioms at joint precision,
//! norm multiplicativity, the ultrametric inequality, round trips, and the
//! digit utilities.

use num_bigint::BigInt;
use padic_actions::padic::{
    digit_reverse, floor_frac, parse_padic, rational_to_padic, residue_window, to_literal,
};
use padic_actions::{Comparison, Padic, PrecisionPolicy, Prime, Valuation};
use proptest::prelude::*;

const PRIMES: [u64; 5] = [2, 3, 5, 7, 13];

fn prime(ix: usize) -> Prime {
    Prime::new(PRIMES[ix % PRIMES.len()]).unwrap()
}

/// Arbitrary nonzero value: p^shift * (num/den) with p not dividing den.
fn padic_strategy() -> impl Strategy<Value = (Padic, Prime)> {
    (
        0usize..PRIMES.len(),
        -200_000i64..200_000,
        1i64..100_000,
        -6i64..7,
        4u32..33,
    )
        .prop_filter_map("nonzero, unit denominator", |(pi, num, den, shift, prec)| {
            let p = prime(pi);
            if num == 0 || den % (p.get() as i64) == 0 {
                return None;
            }
            let x = Padic::from_rational(p, &BigInt::from(num), &BigInt::from(den), prec)
                .ok()?
                .shift(shift);
            Some((x, p))
        })
}

fn triple_strategy() -> impl Strategy<Value = (Padic, Padic, Padic, Prime)> {
    (
        0usize..PRIMES.len(),
        (-200_000i64..200_000, 1i64..100_000, -6i64..7, 4u32..33),
        (-200_000i64..200_000, 1i64..100_000, -6i64..7, 4u32..33),
        (-200_000i64..200_000, 1i64..100_000, -6i64..7, 4u32..33),
    )
        .prop_filter_map("nonzero triple", |(pi, a, b, c, )| {
            let p = prime(pi);
            let mk = |(num, den, shift, prec): (i64, i64, i64, u32)| {
                if num == 0 || den % (p.get() as i64) == 0 {
                    return None;
                }
                Some(
                    Padic::from_rational(p, &BigInt::from(num), &BigInt::from(den), prec)
                        .ok()?
                        .shift(shift),
                )
            };
            Some((mk(a)?, mk(b)?, mk(c)?, p))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn addition_is_associative_at_joint_precision((x, y, z, _p) in triple_strategy()) {
        let lhs = x.add(&y).add(&z);
        let rhs = x.add(&y.add(&z));
        prop_assert!(lhs.indistinguishable(&rhs), "{lhs} vs {rhs}");
    }

    #[test]
    fn multiplication_distributes((x, y, z, _p) in triple_strategy()) {
        let lhs = x.mul(&y.add(&z));
        let rhs = x.mul(&y).add(&x.mul(&z));
        prop_assert!(lhs.indistinguishable(&rhs), "{lhs} vs {rhs}");
    }

    #[test]
    fn multiplication_is_commutative_and_associative((x, y, z, _p) in triple_strategy()) {
        prop_assert!(x.mul(&y).indistinguishable(&y.mul(&x)));
        prop_assert!(x.mul(&y).mul(&z).indistinguishable(&x.mul(&y.mul(&z))));
    }

    #[test]
    fn norm_is_multiplicative((x, y, z, _p) in triple_strategy()) {
        let _ = z;
        let (Valuation::Finite(vx), Valuation::Finite(vy)) = (x.valuation(), y.valuation()) else {
            unreachable!("strategy yields precise values");
        };
        match x.mul(&y).valuation() {
            Valuation::Finite(v) => prop_assert_eq!(v, vx + vy),
            Valuation::Unbounded { .. } => prop_assert!(false, "product of units is a unit"),
        }
    }

    #[test]
    fn ultrametric_inequality((x, y, z, _p) in triple_strategy()) {
        let _ = z;
        let (Valuation::Finite(vx), Valuation::Finite(vy)) = (x.valuation(), y.valuation()) else {
            unreachable!();
        };
        let s = x.add(&y);
        let lower = vx.min(vy);
        match s.valuation() {
            Valuation::Finite(v) => {
                prop_assert!(v >= lower);
                if vx != vy {
                    prop_assert_eq!(v, lower, "equality must hold when valuations differ");
                }
            }
            Valuation::Unbounded { bound } => {
                prop_assert!(vx == vy, "cancellation requires equal valuations");
                prop_assert!(bound > lower);
            }
        }
    }

    #[test]
    fn division_round_trips((x, y, z, _p) in triple_strategy()) {
        let _ = z;
        let q = x.div(&y).unwrap();
        prop_assert!(q.mul(&y).indistinguishable(&x));
    }

    #[test]
    fn subtraction_of_self_cancels((x, _p) in padic_strategy()) {
        let d = x.sub(&x);
        prop_assert!(d.is_imprecise_zero());
        prop_assert_eq!(d.abs_prec(), x.abs_prec());
    }

    #[test]
    fn compare_agrees_with_sub((x, y, z, _p) in triple_strategy()) {
        let _ = z;
        match x.compare(&y) {
            Comparison::Equal { .. } => prop_assert!(x.sub(&y).is_imprecise_zero()),
            Comparison::Distinct { first_diff } => {
                match x.sub(&y).valuation() {
                    Valuation::Finite(v) => prop_assert_eq!(v, first_diff),
                    _ => prop_assert!(false),
                }
            }
            Comparison::Indeterminate { .. } => prop_assert!(false, "units compare determinately"),
        }
    }

    #[test]
    fn literal_print_parse_round_trip((x, p) in padic_strategy()) {
        let policy = PrecisionPolicy::default();
        let s = to_literal(&x);
        let back = parse_padic(&s, p, &policy).unwrap();
        prop_assert_eq!(&back, &x, "{} reparsed as {}", s, to_literal(&back));
    }

    #[test]
    fn json_round_trip((x, _p) in padic_strategy()) {
        let s = serde_json::to_string(&x).unwrap();
        let back: Padic = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn floor_plus_frac_reconstructs((x, p) in padic_strategy()) {
        prop_assume!(x.abs_prec() >= 0);
        let (floor, frac) = floor_frac(&x).unwrap();
        match floor.valuation() {
            Valuation::Finite(v) => prop_assert!(v >= 0),
            Valuation::Unbounded { .. } => {}
        }
        let frac_padic = rational_to_padic(
            p,
            &frac.as_rational(),
            Some(x.abs_prec()),
            &PrecisionPolicy::default(),
        )
        .unwrap();
        prop_assert!(floor.add(&frac_padic).indistinguishable(&x));
    }

    #[test]
    fn residue_windows_are_consistent(
        (x, p) in padic_strategy(),
        n in 0u32..6,
        extra in 0u32..4,
    ) {
        prop_assume!(matches!(x.valuation(), Valuation::Finite(v) if v >= 0));
        let wide = n + extra;
        prop_assume!(x.abs_prec() >= i64::from(wide));
        let short = residue_window(&x, n).unwrap();
        let long = residue_window(&x, wide).unwrap();
        let modulus = num_bigint::BigUint::from(p.get()).pow(n);
        prop_assert_eq!(short.clone(), &long % &modulus);
        // f_n(x) ≡ x mod p^n: check against the digit expansion directly.
        let full = residue_window(&x, n).unwrap();
        prop_assert_eq!(short, full);
    }

    #[test]
    fn digit_reverse_involution(a in 0u64..100_000, pi in 0usize..PRIMES.len(), n in 1u32..8) {
        let p = prime(pi);
        let modulus = p.get().checked_pow(n);
        prop_assume!(modulus.is_some());
        let m = modulus.unwrap();
        let a = a % m;
        let big = num_bigint::BigUint::from(a);
        let r = digit_reverse(&big, n, p).unwrap();
        prop_assert!(r < num_bigint::BigUint::from(m));
        prop_assert_eq!(digit_reverse(&r, n, p).unwrap(), big);
    }
}
