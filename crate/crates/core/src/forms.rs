//! Integral homogeneous forms: hypersurface specification, exact evaluation,
//! pointwise singularity checks, and the adjunction coefficient.
//!
//! A form is a list of (exponent vector, coefficient) terms. Evaluation is
//! always exact integer arithmetic; no float ever touches a form value.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Deserialize;

use crate::arith::ProjPoint;
use crate::error::{Error, Result};

/// One monomial: coefficient times the product of `x_i^exponents[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    exponents: Vec<u32>,
    coefficient: BigInt,
}

impl Term {
    pub fn new(exponents: Vec<u32>, coefficient: BigInt) -> Term {
        Term {
            exponents,
            coefficient,
        }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn coefficient(&self) -> &BigInt {
        &self.coefficient
    }
}

/// An integral form of degree `d` in `n+1` variables, primitive (coefficient
/// gcd 1), cutting out a hypersurface in projective n-space.
///
/// `canonical_coefficient` is `d - n - 1`: the multiple of the hyperplane
/// class representing the canonical class of a smooth degree-d hypersurface.
/// It vanishes exactly for the anticanonical (K3-type) case, e.g. a quartic
/// surface in projective 3-space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypersurfaceSpec {
    ambient_dim: usize,
    degree: u32,
    terms: Vec<Term>,
    canonical_coefficient: i64,
}

impl HypersurfaceSpec {
    /// Validate and build a spec. Terms are sorted by exponent vector so two
    /// equal forms compare equal regardless of input order.
    pub fn new(ambient_dim: usize, degree: u32, mut terms: Vec<Term>) -> Result<HypersurfaceSpec> {
        if ambient_dim < 1 {
            return Err(Error::InvalidForm(
                "ambient_dim must be at least 1".to_string(),
            ));
        }
        if degree < 1 {
            return Err(Error::InvalidForm("degree must be at least 1".to_string()));
        }
        if terms.is_empty() {
            return Err(Error::InvalidForm("form has no terms".to_string()));
        }
        let width = ambient_dim + 1;
        for (i, t) in terms.iter().enumerate() {
            if t.exponents.len() != width {
                return Err(Error::InvalidForm(format!(
                    "terms[{i}]: exponent vector has length {}, expected {width}",
                    t.exponents.len()
                )));
            }
            let total: u64 = t.exponents.iter().map(|&e| e as u64).sum();
            if total != degree as u64 {
                return Err(Error::InvalidForm(format!(
                    "terms[{i}]: exponents sum to {total}, expected degree {degree}"
                )));
            }
            if t.coefficient.is_zero() {
                return Err(Error::InvalidForm(format!(
                    "terms[{i}]: zero coefficient"
                )));
            }
        }
        terms.sort_by(|a, b| a.exponents.cmp(&b.exponents));
        for w in terms.windows(2) {
            if w[0].exponents == w[1].exponents {
                return Err(Error::InvalidForm(format!(
                    "duplicate exponent vector {:?}",
                    w[0].exponents
                )));
            }
        }
        let mut content = BigInt::zero();
        for t in &terms {
            content = content.gcd(&t.coefficient);
        }
        if content != BigInt::from(1) {
            return Err(Error::InvalidForm(format!(
                "form is not primitive: coefficient gcd is {content}"
            )));
        }
        Ok(HypersurfaceSpec {
            ambient_dim,
            degree,
            terms,
            canonical_coefficient: degree as i64 - ambient_dim as i64 - 1,
        })
    }

    /// Terse constructor used by tests and fixtures.
    pub fn from_term_tuples(
        ambient_dim: usize,
        degree: u32,
        terms: &[(&[u32], i64)],
    ) -> Result<HypersurfaceSpec> {
        let terms = terms
            .iter()
            .map(|(e, c)| Term::new(e.to_vec(), BigInt::from(*c)))
            .collect();
        HypersurfaceSpec::new(ambient_dim, degree, terms)
    }

    /// Parse the JSON form file format:
    /// `{"ambient_dim": n, "degree": d, "terms": [{"exponents": [...],
    /// "coefficient": "decimal string"}, ...]}`.
    pub fn from_json_str(s: &str) -> Result<HypersurfaceSpec> {
        let raw: RawForm = serde_json::from_str(s)
            .map_err(|e| Error::InvalidForm(format!("json parse error: {e}")))?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for (i, t) in raw.terms.into_iter().enumerate() {
            let coeff = BigInt::parse_bytes(t.coefficient.as_bytes(), 10).ok_or_else(|| {
                Error::InvalidForm(format!(
                    "terms[{i}]: coefficient {:?} is not a decimal integer",
                    t.coefficient
                ))
            })?;
            terms.push(Term::new(t.exponents, coeff));
        }
        HypersurfaceSpec::new(raw.ambient_dim, raw.degree, terms)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `degree - ambient_dim - 1`; zero exactly in the K3-type case.
    pub fn canonical_coefficient(&self) -> i64 {
        self.canonical_coefficient
    }

    /// Exact value of the form at a canonical point.
    pub fn evaluate_form(&self, p: &ProjPoint) -> Result<BigInt> {
        self.evaluate_at(p.coords())
    }

    /// Exact value at an arbitrary integer tuple (no canonicality assumed).
    pub fn evaluate_at(&self, coords: &[BigInt]) -> Result<BigInt> {
        self.check_dim(coords.len())?;
        let mut acc = BigInt::zero();
        for t in &self.terms {
            let mut prod = t.coefficient.clone();
            for (x, &e) in coords.iter().zip(&t.exponents) {
                if e > 0 {
                    prod *= x.pow(e);
                }
            }
            acc += prod;
        }
        Ok(acc)
    }

    /// Membership: the form vanishes at the point.
    pub fn contains_point(&self, p: &ProjPoint) -> Result<bool> {
        Ok(self.evaluate_form(p)?.is_zero())
    }

    /// All n+1 formal partial derivatives vanish at a point of the
    /// hypersurface. Exact integer arithmetic throughout.
    pub fn is_singular_at(&self, p: &ProjPoint) -> Result<bool> {
        if !self.contains_point(p)? {
            return Err(Error::NotOnSurface);
        }
        for var in 0..=self.ambient_dim {
            if !self.partial_at(var, p.coords()).is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Value of the partial derivative with respect to `var`.
    fn partial_at(&self, var: usize, coords: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for t in &self.terms {
            let e_var = t.exponents[var];
            if e_var == 0 {
                continue;
            }
            let mut prod = &t.coefficient * BigInt::from(e_var);
            for (i, (x, &e)) in coords.iter().zip(&t.exponents).enumerate() {
                let e = if i == var { e - 1 } else { e };
                if e > 0 {
                    prod *= x.pow(e);
                }
            }
            acc += prod;
        }
        acc
    }

    /// Upper bound on |F(x)| over the box max|x_i| <= height_bound.
    pub fn max_abs_value_bound(&self, height_bound: u64) -> BigInt {
        let b = BigInt::from(height_bound);
        let mut acc = BigInt::zero();
        for t in &self.terms {
            acc += t.coefficient.abs() * b.pow(self.degree);
        }
        acc
    }

    /// Coefficients of the pure-power terms `x_i^d` that are present; used
    /// to pick default sieve primes.
    pub(crate) fn leading_coefficients(&self) -> Vec<BigInt> {
        self.terms
            .iter()
            .filter(|t| t.exponents.iter().any(|&e| e == self.degree))
            .map(|t| t.coefficient.clone())
            .collect()
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        let expected = self.ambient_dim + 1;
        if got != expected {
            Err(Error::DimensionMismatch { expected, got })
        } else {
            Ok(())
        }
    }
}

/// Value of the form modulo a small prime at a residue tuple; used by the
/// sieve table builder and for large-prime residue checks.
pub(crate) fn evaluate_mod_p(
    coeffs_mod: &[u64],
    terms: &[Term],
    residues: &[u64],
    p: u64,
) -> u64 {
    let mut acc: u64 = 0;
    for (t, &c) in terms.iter().zip(coeffs_mod) {
        if c == 0 {
            continue;
        }
        let mut prod = c;
        for (&r, &e) in residues.iter().zip(t.exponents()) {
            for _ in 0..e {
                prod = prod * r % p;
            }
        }
        acc = (acc + prod) % p;
    }
    acc
}

/// Reduce each term coefficient modulo p (result in [0, p)).
pub(crate) fn coefficients_mod_p(spec: &HypersurfaceSpec, p: u64) -> Vec<u64> {
    spec.terms
        .iter()
        .map(|t| {
            let r = t.coefficient.mod_floor(&BigInt::from(p));
            r.to_u64().expect("reduced coefficient fits u64")
        })
        .collect()
}

#[derive(Deserialize)]
struct RawForm {
    ambient_dim: usize,
    degree: u32,
    terms: Vec<RawTerm>,
}

#[derive(Deserialize)]
struct RawTerm {
    exponents: Vec<u32>,
    coefficient: String,
}
