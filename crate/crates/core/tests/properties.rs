//! Property tests for the exact-arithmetic invariants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use replab_core::{
    abs_v, pair_height, pluecker_of_pair, proj_distance, weil_height, Place, ProjPoint,
};

fn coords_strategy() -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-1000i64..=1000, 2..=5)
        .prop_filter("not all zero", |v| v.iter().any(|&c| c != 0))
}

fn coords4_strategy() -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-200i64..=200, 4)
        .prop_filter("not all zero", |v| v.iter().any(|&c| c != 0))
}

proptest! {
    #[test]
    fn normalize_idempotent(raw in coords_strategy()) {
        let p = ProjPoint::from_i64(&raw).unwrap();
        let again = ProjPoint::normalize(p.coords()).unwrap();
        prop_assert_eq!(p, again);
    }

    #[test]
    fn normalize_scaling_invariant(raw in coords_strategy(), num in -40i64..=40, den in 1i64..=40) {
        prop_assume!(num != 0);
        let lam = BigRational::new(BigInt::from(num), BigInt::from(den));
        let scaled: Vec<BigRational> = raw
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)) * &lam)
            .collect();
        let a = ProjPoint::from_i64(&raw).unwrap();
        let b = ProjPoint::from_rationals(&scaled).unwrap();
        prop_assert_eq!(&a, &b);
        // heights agree, so the Weil height is scaling-invariant
        prop_assert_eq!(weil_height(&a).multiplicative, weil_height(&b).multiplicative);
    }

    #[test]
    fn height_is_positive_integer(raw in coords_strategy()) {
        let p = ProjPoint::from_i64(&raw).unwrap();
        let h = weil_height(&p);
        prop_assert!(h.multiplicative.is_integer());
        prop_assert!(h.multiplicative >= BigRational::one());
        prop_assert!((h.logarithmic - rational_ln(&h.multiplicative)).abs() <= 1e-12);
    }

    #[test]
    fn pair_height_symmetric(a in coords_strategy(), b in coords_strategy()) {
        prop_assume!(a.len() == b.len());
        let p = ProjPoint::from_i64(&a).unwrap();
        let q = ProjPoint::from_i64(&b).unwrap();
        let h1 = pair_height(&p, &q);
        let h2 = pair_height(&q, &p);
        prop_assert_eq!(h1.multiplicative, h2.multiplicative);
        prop_assert_eq!(h1.logarithmic, h2.logarithmic);
    }

    #[test]
    fn distance_symmetry_and_identity(
        a in coords4_strategy(),
        b in coords4_strategy(),
        prime_idx in 0usize..4,
    ) {
        let p = ProjPoint::from_i64(&a).unwrap();
        let q = ProjPoint::from_i64(&b).unwrap();
        let place = match prime_idx {
            0 => Place::Archimedean,
            1 => Place::finite(2).unwrap(),
            2 => Place::finite(3).unwrap(),
            _ => Place::finite(7).unwrap(),
        };
        let d1 = proj_distance(&p, &q, place).unwrap();
        let d2 = proj_distance(&q, &p, place).unwrap();
        prop_assert_eq!(&d1.exact, &d2.exact);
        prop_assert_eq!(d1.exact.is_zero(), p == q);
        let two = BigRational::from_integer(BigInt::from(2));
        match place {
            Place::Archimedean => prop_assert!(d1.exact <= two),
            _ => prop_assert!(d1.exact <= BigRational::one()),
        }
        // Liouville: dist >= 1/(H H) at the archimedean place,
        // >= 1/(2 H H) at finite places.
        if p != q {
            let hh = weil_height(&p).multiplicative * weil_height(&q).multiplicative;
            match place {
                Place::Archimedean => prop_assert!(d1.exact >= hh.recip()),
                _ => prop_assert!(d1.exact >= (hh * &two).recip()),
            }
        }
    }

    #[test]
    fn product_formula_random(num in 1i64..=100_000, den in 1i64..=100_000, neg in any::<bool>()) {
        let mut n = BigInt::from(num);
        if neg { n = -n; }
        let r = BigRational::new(n, BigInt::from(den));
        // places: archimedean plus every prime dividing numerator or
        // denominator (found by trial division; an independent route)
        let mut primes = std::collections::BTreeSet::new();
        for part in [r.numer().abs(), r.denom().clone()] {
            let mut m = part.magnitude().clone();
            let mut p = 2u64;
            while BigInt::from(m.clone()) > BigInt::one() && p <= 100_000 {
                while (&m % p).is_zero() {
                    primes.insert(p);
                    m /= p;
                }
                p += 1;
            }
        }
        let mut sum = rational_ln(&abs_v(&r, Place::Archimedean).unwrap());
        for p in primes {
            sum += rational_ln(&abs_v(&r, Place::finite(p).unwrap()).unwrap());
        }
        prop_assert!(sum.abs() <= 1e-12, "residual {}", sum);
    }

    #[test]
    fn pluecker_pair_choice_invariant(
        a in coords4_strategy(),
        b in coords4_strategy(),
        s in 1i64..=5,
        t in 1i64..=5,
    ) {
        let p = ProjPoint::from_i64(&a).unwrap();
        let q = ProjPoint::from_i64(&b).unwrap();
        prop_assume!(p != q);
        let v1 = pluecker_of_pair(&p, &q).unwrap();
        // a third point on the same line
        let mix: Vec<BigInt> = p
            .coords()
            .iter()
            .zip(q.coords())
            .map(|(x, y)| x * BigInt::from(s) + y * BigInt::from(t))
            .collect();
        let r = ProjPoint::normalize(&mix).unwrap();
        prop_assume!(r != p && r != q);
        prop_assert_eq!(&pluecker_of_pair(&p, &r).unwrap(), &v1);
        prop_assert_eq!(&pluecker_of_pair(&r, &q).unwrap(), &v1);
        // and the Plücker relation holds
        let rel = &v1[0] * &v1[5] - &v1[1] * &v1[4] + &v1[2] * &v1[3];
        prop_assert!(rel.is_zero());
    }

    #[test]
    fn point_serde_round_trips(raw in coords_strategy()) {
        let p = ProjPoint::from_i64(&raw).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let back: ProjPoint = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(p, back);
    }
}

fn rational_ln(r: &BigRational) -> f64 {
    fn ln_mag(x: &BigInt) -> f64 {
        let bits = x.bits();
        if bits <= 53 {
            num_traits::ToPrimitive::to_f64(x).unwrap().abs().ln()
        } else {
            let shift = bits - 53;
            let top = num_traits::ToPrimitive::to_f64(&(x.abs() >> shift)).unwrap();
            top.ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
    ln_mag(r.numer()) - ln_mag(r.denom())
}
