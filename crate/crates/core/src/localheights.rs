//! Place-local functionals: the projective chordal distance, local heights
//! of hypersurface divisors, and proximity sums over a place set.
//!
//! The distance between two canonical points at a place v is
//!
//! ```text
//! dist_v(P,Q) = max_{i<j} |x_i y_j - x_j y_i|_v / (max_i |x_i|_v * max_j |y_j|_v)
//! ```
//!
//! For canonical integer coordinates the denominator is 1 at every finite
//! place, so finite distances are pure prime powers. The exact rational is
//! kept alongside its negated log so invariants can be checked without
//! rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{ln_biguint, ord_p, Place, PlaceSet, ProjPoint};
use crate::error::{Error, Result};
use crate::forms::HypersurfaceSpec;

/// An exact projective distance together with its negated natural log.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceValue {
    /// The distance as an exact nonnegative rational; zero iff the points
    /// coincide. Archimedean values lie in [0, 2], finite ones in [0, 1].
    pub exact: BigRational,
    /// `-ln(exact)`; +infinity when the distance is zero.
    pub log_negated: f64,
}

impl DistanceValue {
    fn zero() -> DistanceValue {
        DistanceValue {
            exact: BigRational::zero(),
            log_negated: f64::INFINITY,
        }
    }
}

/// Chordal distance between two canonical points at a place.
pub fn proj_distance(p: &ProjPoint, q: &ProjPoint, v: Place) -> Result<DistanceValue> {
    if p.coords().len() != q.coords().len() {
        return Err(Error::DimensionMismatch {
            expected: p.coords().len(),
            got: q.coords().len(),
        });
    }
    match v {
        Place::Archimedean => {
            let m = max_abs_minor(p.coords(), q.coords());
            if m.is_zero() {
                return Ok(DistanceValue::zero());
            }
            let den = BigInt::from(p.max_abs_coord() * q.max_abs_coord());
            // log computed from the raw numerator/denominator so the fast
            // integer path in the scan modules produces bit-identical floats
            let log_negated = ln_biguint(den.magnitude()) - ln_biguint(m.magnitude());
            Ok(DistanceValue {
                exact: BigRational::new(m, den),
                log_negated,
            })
        }
        Place::Finite(prime) => {
            let p_u64 = prime.get();
            match min_ord_over_minors(p.coords(), q.coords(), p_u64) {
                None => Ok(DistanceValue::zero()),
                Some(v_min) => {
                    let pw = BigInt::from(p_u64).pow(v_min);
                    Ok(DistanceValue {
                        exact: BigRational::new(BigInt::one(), pw),
                        log_negated: v_min as f64 * (p_u64 as f64).ln(),
                    })
                }
            }
        }
    }
}

/// Largest |2x2 minor| of the two coordinate vectors (zero iff proportional).
fn max_abs_minor(x: &[BigInt], y: &[BigInt]) -> BigInt {
    let n = x.len();
    let mut best = BigInt::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = (&x[i] * &y[j] - &x[j] * &y[i]).abs();
            if m > best {
                best = m;
            }
        }
    }
    best
}

/// Minimum p-adic valuation over the nonzero minors; None if all vanish.
fn min_ord_over_minors(x: &[BigInt], y: &[BigInt], p: u64) -> Option<u32> {
    let n = x.len();
    let mut best: Option<u32> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let m = &x[i] * &y[j] - &x[j] * &y[i];
            if m.is_zero() {
                continue;
            }
            let v = ord_p(&m, p);
            best = Some(best.map_or(v, |b| b.min(v)));
            if best == Some(0) {
                return best;
            }
        }
    }
    best
}

/// Local height of a point off a primitive degree-d divisor at a place:
/// `d * ln(max_i |x_i|_v) - ln(|F(x)|_v)`. Finite places give
/// `ord_p(F(x)) * ln p >= 0`; the archimedean place gives
/// `d * ln(max |x_i|) - ln |F(x)|`.
pub fn local_height_hypersurface(
    spec: &HypersurfaceSpec,
    p: &ProjPoint,
    v: Place,
) -> Result<f64> {
    let value = spec.evaluate_form(p)?;
    if value.is_zero() {
        return Err(Error::OnDivisor);
    }
    match v {
        Place::Archimedean => {
            let h = p.max_abs_coord();
            Ok(spec.degree() as f64 * ln_biguint(&h) - ln_biguint(value.magnitude()))
        }
        Place::Finite(prime) => {
            // max_i |x_i|_p = 1 for primitive coordinates
            let ord = ord_p(&value, prime.get());
            Ok(ord as f64 * (prime.get() as f64).ln())
        }
    }
}

/// The divisor a proximity sum is taken against.
#[derive(Debug, Clone, Copy)]
pub enum Divisor<'a> {
    /// A hypersurface in the ambient projective space.
    Hypersurface(&'a HypersurfaceSpec),
    /// The diagonal of the product, measured through pair distances.
    Diagonal,
}

/// The argument of a proximity sum: a point, or a pair for the diagonal.
#[derive(Debug, Clone, Copy)]
pub enum ProximityInput<'a> {
    Point(&'a ProjPoint),
    Pair(&'a ProjPoint, &'a ProjPoint),
}

/// Proximity of a point to a hypersurface divisor over a place set: the sum
/// of its local heights. Empty place sets sum to zero.
pub fn proximity_to_divisor(
    spec: &HypersurfaceSpec,
    p: &ProjPoint,
    s: &PlaceSet,
) -> Result<f64> {
    let mut acc = 0.0;
    for &v in s {
        acc += local_height_hypersurface(spec, p, v)?;
    }
    Ok(acc)
}

/// Proximity of a pair to the diagonal over a place set: each local term is
/// `-ln dist_v(P,Q)`. Errors with `OnDivisor` when the points coincide.
pub fn proximity_to_diagonal(p: &ProjPoint, q: &ProjPoint, s: &PlaceSet) -> Result<f64> {
    if p == q {
        return Err(Error::OnDivisor);
    }
    let mut acc = 0.0;
    for &v in s {
        acc += proj_distance(p, q, v)?.log_negated;
    }
    Ok(acc)
}

/// Dispatching wrapper over the two proximity flavours.
pub fn proximity(divisor: Divisor, input: ProximityInput, s: &PlaceSet) -> Result<f64> {
    match (divisor, input) {
        (Divisor::Hypersurface(spec), ProximityInput::Point(p)) => {
            proximity_to_divisor(spec, p, s)
        }
        (Divisor::Diagonal, ProximityInput::Pair(p, q)) => proximity_to_diagonal(p, q, s),
        (Divisor::Hypersurface(_), ProximityInput::Pair(..)) => Err(Error::InvalidConfig(
            "hypersurface proximity takes a single point".to_string(),
        )),
        (Divisor::Diagonal, ProximityInput::Point(_)) => Err(Error::InvalidConfig(
            "diagonal proximity takes a pair of points".to_string(),
        )),
    }
}

// ---------------------------------------------------------------------------
// i64 fast paths shared by the all-pairs scan modules
// ---------------------------------------------------------------------------

/// Coordinate magnitude cap under which the i64/i128 pair kernels are exact.
pub(crate) const FAST_COORD_LIMIT: i64 = 1 << 20;

/// Largest |2x2 minor| over i64 coordinate views (exact in i128).
pub(crate) fn max_abs_minor_i64(x: &[i64], y: &[i64]) -> i128 {
    let n = x.len();
    let mut best: i128 = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let m = (x[i] as i128 * y[j] as i128 - x[j] as i128 * y[i] as i128).abs();
            if m > best {
                best = m;
            }
        }
    }
    best
}

/// Minimum p-adic valuation over nonzero i64-view minors.
pub(crate) fn min_ord_over_minors_i64(x: &[i64], y: &[i64], p: u64) -> Option<u32> {
    let n = x.len();
    let mut best: Option<u32> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let m = x[i] as i128 * y[j] as i128 - x[j] as i128 * y[i] as i128;
            if m == 0 {
                continue;
            }
            let v = crate::arith::ord_p_i128(m, p);
            best = Some(best.map_or(v, |b| b.min(v)));
            if best == Some(0) {
                return best;
            }
        }
    }
    best
}

/// `-ln dist_inf` from the raw parts; bit-identical to the slow path when
/// all quantities are below 2^53.
pub(crate) fn arch_log_negated(max_minor: i128, height_product: i128) -> f64 {
    debug_assert!(max_minor > 0 && height_product > 0);
    (height_product as f64).ln() - (max_minor as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use crate::arith::weil_height;

    fn pt(raw: &[i64]) -> ProjPoint {
        ProjPoint::from_i64(raw).unwrap()
    }

    fn quartic() -> HypersurfaceSpec {
        HypersurfaceSpec::from_term_tuples(
            3,
            4,
            &[
                (&[4, 0, 0, 0], 1),
                (&[0, 4, 0, 0], 1),
                (&[0, 0, 4, 0], -1),
                (&[0, 0, 0, 4], -1),
            ],
        )
        .unwrap()
    }

    fn hyperplane_x0(vars: usize) -> HypersurfaceSpec {
        let mut exps = vec![0u32; vars];
        exps[0] = 1;
        HypersurfaceSpec::new(vars - 1, 1, vec![crate::forms::Term::new(exps, BigInt::one())])
            .unwrap()
    }

    #[test]
    fn distance_to_self_is_zero() {
        let p = pt(&[3, 5, -7, 11]);
        for v in [Place::Archimedean, Place::finite(3).unwrap()] {
            let d = proj_distance(&p, &p, v).unwrap();
            assert!(d.exact.is_zero());
            assert!(d.log_negated.is_infinite());
        }
    }

    #[test]
    fn distance_examples() {
        let a = pt(&[1, 0, 1, 0]);
        let b = pt(&[0, 1, 0, 1]);
        let d = proj_distance(&a, &b, Place::Archimedean).unwrap();
        assert_eq!(d.exact, BigRational::one());
        assert_eq!(d.log_negated, 0.0);

        let c = pt(&[1, 5, 1, 0]);
        let d5 = proj_distance(&a, &c, Place::finite(5).unwrap()).unwrap();
        assert_eq!(
            d5.exact,
            BigRational::new(BigInt::one(), BigInt::from(5))
        );
        assert!((d5.log_negated - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn distance_symmetry_and_ranges() {
        let pts = [
            pt(&[1, 0, 1, 0]),
            pt(&[0, 1, 0, 1]),
            pt(&[1, 5, 1, 0]),
            pt(&[2, 1, 2, 1]),
            pt(&[158, 59, 134, 133]),
        ];
        let places = [
            Place::Archimedean,
            Place::finite(2).unwrap(),
            Place::finite(5).unwrap(),
        ];
        let two = BigRational::from_integer(BigInt::from(2));
        for a in &pts {
            for b in &pts {
                for &v in &places {
                    let d1 = proj_distance(a, b, v).unwrap();
                    let d2 = proj_distance(b, a, v).unwrap();
                    assert_eq!(d1.exact, d2.exact);
                    assert_eq!(d1.exact.is_zero(), a == b);
                    if v.is_archimedean() {
                        assert!(d1.exact <= two);
                    } else {
                        assert!(d1.exact <= BigRational::one());
                    }
                }
            }
        }
    }

    #[test]
    fn local_height_hyperplane_examples() {
        let h = hyperplane_x0(2);
        let p = ProjPoint::from_i64(&[1, 1]).unwrap();
        assert_eq!(
            local_height_hypersurface(&h, &p, Place::Archimedean).unwrap(),
            0.0
        );
        let q = ProjPoint::from_i64(&[2, 1]).unwrap();
        let at2 = local_height_hypersurface(&h, &q, Place::finite(2).unwrap()).unwrap();
        assert!((at2 - 2f64.ln()).abs() < 1e-15);
        let arch = local_height_hypersurface(&h, &q, Place::Archimedean).unwrap();
        assert!(arch.abs() < 1e-15);
        // On the divisor the local height is infinite -> error.
        let on = ProjPoint::from_i64(&[0, 1]).unwrap();
        assert!(matches!(
            local_height_hypersurface(&h, &on, Place::Archimedean),
            Err(Error::OnDivisor)
        ));
    }

    #[test]
    fn finite_local_heights_nonnegative() {
        let q = quartic();
        let p = pt(&[1, 1, 1, 0]);
        for prime in [2u64, 3, 5, 7, 11] {
            let lh = local_height_hypersurface(&q, &p, Place::finite(prime).unwrap()).unwrap();
            assert!(lh >= 0.0);
        }
    }

    #[test]
    fn proximity_examples() {
        let a = pt(&[1, 0, 1, 0]);
        let b = pt(&[0, 1, 0, 1]);
        let arch = PlaceSet::new(vec![Place::Archimedean]).unwrap();
        assert_eq!(proximity_to_diagonal(&a, &b, &arch).unwrap(), 0.0);

        let c = pt(&[1, 5, 1, 0]);
        let at5 = PlaceSet::new(vec![Place::finite(5).unwrap()]).unwrap();
        let m = proximity_to_diagonal(&a, &c, &at5).unwrap();
        assert!((m - 5f64.ln()).abs() < 1e-15);

        let empty = PlaceSet::empty();
        assert_eq!(proximity_to_diagonal(&a, &b, &empty).unwrap(), 0.0);
        let h = hyperplane_x0(4);
        assert_eq!(proximity_to_divisor(&h, &b, &empty).unwrap(), 0.0);

        assert!(matches!(
            proximity_to_diagonal(&a, &a, &arch),
            Err(Error::OnDivisor)
        ));
    }

    #[test]
    fn proximity_dispatch_rejects_mismatches() {
        let a = pt(&[1, 0, 1, 0]);
        let b = pt(&[0, 1, 0, 1]);
        let h = hyperplane_x0(4);
        let s = PlaceSet::new(vec![Place::Archimedean]).unwrap();
        assert!(proximity(Divisor::Hypersurface(&h), ProximityInput::Pair(&a, &b), &s).is_err());
        assert!(proximity(Divisor::Diagonal, ProximityInput::Point(&a), &s).is_err());
        assert!(proximity(Divisor::Diagonal, ProximityInput::Pair(&a, &b), &s).is_ok());
    }

    #[test]
    fn liouville_bound_small_grid() {
        // dist_inf >= 1 / (H(P) H(Q)) exactly, via the minor being a
        // nonzero integer.
        let pts: Vec<ProjPoint> = [
            [1i64, 0, 1, 0],
            [0, 1, 0, 1],
            [1, 1, 1, 1],
            [2, 1, 2, 1],
            [3, 2, 3, 2],
            [5, 1, 4, 3],
        ]
        .iter()
        .map(|r| pt(r))
        .collect();
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                let d = proj_distance(a, b, Place::Archimedean).unwrap();
                let hh = weil_height(a).multiplicative * weil_height(b).multiplicative;
                assert!(d.exact >= hh.recip());
            }
        }
    }

    #[test]
    fn fast_paths_agree_with_exact() {
        let pts = [
            pt(&[1, 0, 1, 0]),
            pt(&[1, 5, 1, 0]),
            pt(&[2, 1, 2, 1]),
            pt(&[158, 59, 134, 133]),
        ];
        for a in &pts {
            for b in &pts {
                let xa = a.coords_i64().unwrap();
                let xb = b.coords_i64().unwrap();
                let fast = max_abs_minor_i64(&xa, &xb);
                let slow = max_abs_minor(a.coords(), b.coords());
                assert_eq!(BigInt::from(fast), slow);
                for p in [2u64, 3, 5] {
                    assert_eq!(
                        min_ord_over_minors_i64(&xa, &xb, p),
                        min_ord_over_minors(a.coords(), b.coords(), p)
                    );
                }
                if a != b {
                    let hprod = (a.max_abs_coord() * b.max_abs_coord()).to_i128().unwrap();
                    let fast_log = arch_log_negated(fast, hprod);
                    let slow_log = proj_distance(a, b, Place::Archimedean).unwrap().log_negated;
                    assert_eq!(fast_log, slow_log);
                }
            }
        }
    }
}
