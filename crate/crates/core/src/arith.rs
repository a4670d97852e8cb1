//! Exact projective-point arithmetic over the rationals: canonical
//! coordinates, absolute values at every place, and Weil heights.
//!
//! A point of projective n-space is stored as n+1 integers that are
//! primitive (gcd 1) with the first nonzero coordinate positive, so every
//! rational point has exactly one representative and heights read off the
//! coordinates directly.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};
use crate::primes::is_prime_u64;

// ---------------------------------------------------------------------------
// Points
// ---------------------------------------------------------------------------

/// A rational point of projective space in canonical primitive integer
/// coordinates.
///
/// Invariants (enforced by every constructor):
/// - not all coordinates are zero,
/// - the gcd of the coordinates is 1,
/// - the first nonzero coordinate is positive.
///
/// The derived ordering is lexicographic on the coordinate vector, which is
/// the order every enumeration in this crate emits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjPoint {
    coords: Vec<BigInt>,
}

impl ProjPoint {
    /// Canonicalise a raw coordinate tuple: divide out the content and fix
    /// the sign so the first nonzero coordinate is positive. Idempotent.
    pub fn normalize(raw: &[BigInt]) -> Result<ProjPoint> {
        if raw.iter().all(Zero::is_zero) {
            return Err(Error::AllZero);
        }
        let mut content = BigUint::zero();
        for c in raw {
            content = content.gcd(c.magnitude());
        }
        let content = BigInt::from(content);
        let mut coords: Vec<BigInt> = raw.iter().map(|c| c / &content).collect();
        let flip = coords
            .iter()
            .find(|c| !c.is_zero())
            .map(|c| c.sign() == Sign::Minus)
            .unwrap_or(false);
        if flip {
            for c in &mut coords {
                *c = -std::mem::take(c);
            }
        }
        Ok(ProjPoint { coords })
    }

    /// Canonicalise a rational coordinate tuple by clearing denominators.
    pub fn from_rationals(raw: &[BigRational]) -> Result<ProjPoint> {
        let mut lcm = BigInt::one();
        for r in raw {
            lcm = lcm.lcm(r.denom());
        }
        let ints: Vec<BigInt> = raw.iter().map(|r| (r * &lcm).to_integer()).collect();
        Self::normalize(&ints)
    }

    /// Convenience constructor from machine integers.
    pub fn from_i64(raw: &[i64]) -> Result<ProjPoint> {
        let ints: Vec<BigInt> = raw.iter().map(|&c| BigInt::from(c)).collect();
        Self::normalize(&ints)
    }

    /// Wrap coordinates that are already canonical (enumeration fast path).
    pub(crate) fn from_canonical_coords(coords: Vec<BigInt>) -> ProjPoint {
        debug_assert!(
            ProjPoint::normalize(&coords)
                .map(|p| p.coords == coords)
                .unwrap_or(false),
            "coordinates are not canonical"
        );
        ProjPoint { coords }
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    /// Projective dimension of the ambient space (= #coords - 1).
    pub fn ambient_dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Largest coordinate magnitude; the multiplicative Weil height.
    pub fn max_abs_coord(&self) -> BigUint {
        self.coords
            .iter()
            .map(|c| c.magnitude().clone())
            .max()
            .expect("nonempty coordinates")
    }

    /// Coordinates as i64 when they fit (fast-path views for hot scans).
    pub(crate) fn coords_i64(&self) -> Option<Vec<i64>> {
        self.coords.iter().map(|c| c.to_i64()).collect()
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, " : ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

// Points serialise as arrays of decimal strings so arbitrary precision
// survives round-trips bit-exactly.
impl Serialize for ProjPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProjPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let mut coords = Vec::with_capacity(strings.len());
        for s in &strings {
            let c: BigInt = s
                .parse()
                .map_err(|_| serde::de::Error::custom(format!("bad integer literal {s:?}")))?;
            coords.push(c);
        }
        ProjPoint::normalize(&coords).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Places
// ---------------------------------------------------------------------------

/// A prime number, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Prime> {
        if is_prime_u64(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One absolute value of the rationals: the archimedean one or a p-adic one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Archimedean,
    Finite(Prime),
}

impl Place {
    pub fn finite(p: u64) -> Result<Place> {
        Ok(Place::Finite(Prime::new(p)?))
    }

    pub fn is_archimedean(self) -> bool {
        matches!(self, Place::Archimedean)
    }

    /// Short label used in file names and CSV columns: `inf` or the prime.
    pub fn label(self) -> String {
        match self {
            Place::Archimedean => "inf".to_string(),
            Place::Finite(p) => p.to_string(),
        }
    }

    /// Parse `"inf"` (or `"archimedean"`) or a decimal prime.
    pub fn parse(s: &str) -> Result<Place> {
        match s {
            "inf" | "archimedean" => Ok(Place::Archimedean),
            _ => {
                let p: u64 = s.parse().map_err(|_| {
                    Error::InvalidConfig(format!("place must be \"inf\" or a prime, got {s:?}"))
                })?;
                Place::finite(p)
            }
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Place::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// A finite list of distinct places.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaceSet(Vec<Place>);

impl PlaceSet {
    pub fn new(places: Vec<Place>) -> Result<PlaceSet> {
        for (i, a) in places.iter().enumerate() {
            if places[..i].contains(a) {
                return Err(Error::InvalidConfig(format!("duplicate place {a}")));
            }
        }
        Ok(PlaceSet(places))
    }

    pub fn empty() -> PlaceSet {
        PlaceSet(Vec::new())
    }

    pub fn places(&self) -> &[Place] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<'de> Deserialize<'de> for PlaceSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let places = Vec::<Place>::deserialize(deserializer)?;
        PlaceSet::new(places).map_err(serde::de::Error::custom)
    }
}

impl<'a> IntoIterator for &'a PlaceSet {
    type Item = &'a Place;
    type IntoIter = std::slice::Iter<'a, Place>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

// ---------------------------------------------------------------------------
// Heights
// ---------------------------------------------------------------------------

/// A height carried in both exact multiplicative and floating logarithmic
/// form, so invariants can be tested exactly while statistics use floats.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightValue {
    /// Exact positive rational (an integer >= 1 for a single point).
    pub multiplicative: BigRational,
    /// Natural log of the multiplicative part.
    pub logarithmic: f64,
}

impl HeightValue {
    fn from_positive_rational(r: BigRational) -> HeightValue {
        debug_assert!(r.is_positive());
        let logarithmic = ln_rational(&r);
        HeightValue {
            multiplicative: r,
            logarithmic,
        }
    }
}

/// Multiplicative/logarithmic Weil height of a canonical point: the maximum
/// coordinate magnitude.
pub fn weil_height(p: &ProjPoint) -> HeightValue {
    let h = BigInt::from(p.max_abs_coord());
    HeightValue::from_positive_rational(BigRational::from_integer(h))
}

/// Height of a pair: multiplicative parts multiply, logarithmic parts add.
pub fn pair_height(p: &ProjPoint, q: &ProjPoint) -> HeightValue {
    let prod = BigInt::from(p.max_abs_coord() * q.max_abs_coord());
    HeightValue::from_positive_rational(BigRational::from_integer(prod))
}

/// The absolute value of a nonzero rational at a place: `|r|` at the
/// archimedean place, `p^(-ord_p r)` at a finite place, both exact.
pub fn abs_v(r: &BigRational, v: Place) -> Result<BigRational> {
    if r.is_zero() {
        return Err(Error::ZeroInput);
    }
    match v {
        Place::Archimedean => Ok(r.abs()),
        Place::Finite(p) => {
            let ord = ord_p(r.numer(), p.get()) as i64 - ord_p(r.denom(), p.get()) as i64;
            let pw = BigInt::from(p.get()).pow(ord.unsigned_abs() as u32);
            Ok(if ord >= 0 {
                BigRational::new(BigInt::one(), pw)
            } else {
                BigRational::from_integer(pw)
            })
        }
    }
}

/// p-adic valuation of a nonzero integer.
pub(crate) fn ord_p(n: &BigInt, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    if let Some(small) = n.to_i128() {
        return ord_p_i128(small, p);
    }
    let big_p = BigInt::from(p);
    let mut v = 0u32;
    let mut rest = n.clone();
    loop {
        let (q, r) = rest.div_rem(&big_p);
        if r.is_zero() {
            v += 1;
            rest = q;
        } else {
            return v;
        }
    }
}

pub(crate) fn ord_p_i128(n: i128, p: u64) -> u32 {
    debug_assert!(n != 0);
    let p = p as i128;
    let mut v = 0u32;
    let mut n = n;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

// ---------------------------------------------------------------------------
// Logs of exact quantities
// ---------------------------------------------------------------------------

/// Natural log of a positive big integer, accurate to ~1 ulp: values below
/// 2^53 convert exactly to f64; larger ones use the top 53 bits plus an
/// exact power-of-two exponent.
pub(crate) fn ln_biguint(x: &BigUint) -> f64 {
    debug_assert!(!x.is_zero());
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().expect("fits f64").ln();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().expect("53-bit mantissa");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub(crate) fn ln_rational(r: &BigRational) -> f64 {
    debug_assert!(r.is_positive());
    ln_biguint(r.numer().magnitude()) - ln_biguint(r.denom().magnitude())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(raw: &[i64]) -> ProjPoint {
        ProjPoint::from_i64(raw).unwrap()
    }

    #[test]
    fn normalize_divides_gcd() {
        assert_eq!(pt(&[2, 4, 6, 8]).coords(), pt(&[1, 2, 3, 4]).coords());
        assert_eq!(
            pt(&[2, 4, 6, 8])
                .coords()
                .iter()
                .map(|c| c.to_i64().unwrap())
                .collect::<Vec<_>>(),
            vec![1, 2, 3, 4]
        );
    }

    #[test]
    fn normalize_sign_rule() {
        let p = pt(&[0, 0, -3, 0]);
        assert_eq!(
            p.coords().iter().map(|c| c.to_i64().unwrap()).collect::<Vec<_>>(),
            vec![0, 0, 1, 0]
        );
        let q = pt(&[-5, 10, 0, 0]);
        assert_eq!(
            q.coords().iter().map(|c| c.to_i64().unwrap()).collect::<Vec<_>>(),
            vec![1, -2, 0, 0]
        );
    }

    #[test]
    fn normalize_rejects_zero() {
        assert!(matches!(
            ProjPoint::from_i64(&[0, 0, 0, 0]),
            Err(Error::AllZero)
        ));
        assert!(matches!(ProjPoint::from_i64(&[]), Err(Error::AllZero)));
    }

    #[test]
    fn normalize_idempotent() {
        let p = pt(&[42, -70, 14, 0]);
        let again = ProjPoint::normalize(p.coords()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn abs_v_examples() {
        let r = BigRational::from_integer(BigInt::from(12));
        assert_eq!(
            abs_v(&r, Place::Archimedean).unwrap(),
            BigRational::from_integer(BigInt::from(12))
        );
        assert_eq!(
            abs_v(&r, Place::finite(2).unwrap()).unwrap(),
            BigRational::new(BigInt::one(), BigInt::from(4))
        );
        assert_eq!(
            abs_v(&r, Place::finite(5).unwrap()).unwrap(),
            BigRational::from_integer(BigInt::one())
        );
        let zero = BigRational::zero();
        assert!(matches!(
            abs_v(&zero, Place::Archimedean),
            Err(Error::ZeroInput)
        ));
    }

    #[test]
    fn abs_v_negative_ord() {
        // |1/20|_2 = 4
        let r = BigRational::new(BigInt::one(), BigInt::from(20));
        assert_eq!(
            abs_v(&r, Place::finite(2).unwrap()).unwrap(),
            BigRational::from_integer(BigInt::from(4))
        );
    }

    #[test]
    fn weil_height_examples() {
        let h = weil_height(&pt(&[1, 0, 1, 0]));
        assert_eq!(h.multiplicative, BigRational::from_integer(BigInt::one()));
        assert_eq!(h.logarithmic, 0.0);
        assert_eq!(
            weil_height(&pt(&[1, 2, 3, 4])).multiplicative,
            BigRational::from_integer(BigInt::from(4))
        );
        // Largest coordinate of the Euler quadruple.
        assert_eq!(
            weil_height(&pt(&[158, 59, 134, 133])).multiplicative,
            BigRational::from_integer(BigInt::from(158))
        );
    }

    #[test]
    fn pair_height_examples() {
        let a = pt(&[1, 0, 1, 0]);
        let b = pt(&[0, 1, 0, 1]);
        let h = pair_height(&a, &b);
        assert_eq!(h.multiplicative, BigRational::from_integer(BigInt::one()));
        assert_eq!(h.logarithmic, 0.0);

        let c = pt(&[1, 2, 3, 4]);
        let h = pair_height(&c, &a);
        assert_eq!(h.multiplicative, BigRational::from_integer(BigInt::from(4)));
        assert!((h.logarithmic - 4f64.ln()).abs() < 1e-15);

        // Heights 1 and 2 multiply to 2.
        let d = pt(&[1, 1, 1, 1]);
        let e = pt(&[2, 1, 2, 1]);
        let h = pair_height(&d, &e);
        assert_eq!(h.multiplicative, BigRational::from_integer(BigInt::from(2)));
        assert!((h.logarithmic - 2f64.ln()).abs() < 1e-15);
        assert_eq!(pair_height(&e, &d).multiplicative, h.multiplicative);
    }

    #[test]
    fn place_validation() {
        assert!(Place::finite(2).is_ok());
        assert!(Place::finite(9973).is_ok());
        assert!(matches!(Place::finite(1), Err(Error::NotPrime(1))));
        assert!(matches!(Place::finite(4), Err(Error::NotPrime(4))));
        assert_eq!(Place::parse("inf").unwrap(), Place::Archimedean);
        assert_eq!(Place::parse("7").unwrap(), Place::finite(7).unwrap());
        assert!(Place::parse("six").is_err());
    }

    #[test]
    fn place_set_rejects_duplicates() {
        let v = vec![Place::Archimedean, Place::finite(3).unwrap()];
        assert!(PlaceSet::new(v).is_ok());
        let v = vec![Place::finite(3).unwrap(), Place::finite(3).unwrap()];
        assert!(PlaceSet::new(v).is_err());
    }

    #[test]
    fn ln_biguint_accuracy() {
        let x = BigUint::from(635_318_657u64);
        assert!((ln_biguint(&x) - (635_318_657f64).ln()).abs() < 1e-12);
        // A value far past 2^53.
        let big = BigUint::from(10u64).pow(40);
        let expect = 40.0 * 10f64.ln();
        assert!((ln_biguint(&big) - expect).abs() / expect < 1e-14);
    }

    #[test]
    fn point_serde_round_trip() {
        let p = pt(&[158, -59, 134, 133]);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"["158","-59","134","133"]"#);
        let back: ProjPoint = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        // Huge coordinates survive bit-exactly.
        let big = ProjPoint::normalize(&[
            BigInt::parse_bytes(b"123456789012345678901234567890123457", 10).unwrap(),
            BigInt::one(),
        ])
        .unwrap();
        let back: ProjPoint = serde_json::from_str(&serde_json::to_string(&big).unwrap()).unwrap();
        assert_eq!(back, big);
    }
}
