//! Cross-module invariant suite: the exact identities every build of this
//! crate must satisfy, runnable against any bundled or user surface.
//!
//! Each check returns a pass/fail outcome with a deterministic detail
//! string (counts and maximal residuals, never timings), so two runs over
//! the same inputs produce byte-identical reports.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

use crate::arith::{abs_v, ln_rational, weil_height, Place, PlaceSet, ProjPoint};
use crate::curves::{detect_lines, line_on_surface, pluecker_of_pair, ExclusionPredicate};
use crate::error::Result;
use crate::forms::{HypersurfaceSpec, Term};
use crate::localheights::{local_height_hypersurface, proj_distance};
use crate::primes::factor_bigint;
use crate::repulsion::{pair_scan_with, vojta_gap_check, ScanLimits};
use crate::search::{count_function, enumerate_points, SearchConfig};

/// Bounds and tolerances of one suite run.
#[derive(Debug, Clone)]
pub struct VerifyParams {
    /// Height bound for the local-height decomposition check.
    pub decomposition_bound: u64,
    /// Height bound for the all-pairs Liouville checks.
    pub liouville_bound: u64,
    /// Height bound for the p-adic ultrametric triple check.
    pub ultrametric_bound: u64,
    /// Height bound for the cheap cross-checks (sieve equivalence,
    /// partition independence, line detection, gap bounds).
    pub small_bound: u64,
    /// Finite places exercised by the local checks.
    pub finite_places: Vec<u64>,
    /// Line-detection threshold.
    pub line_min_points: usize,
}

impl Default for VerifyParams {
    fn default() -> VerifyParams {
        VerifyParams {
            decomposition_bound: 50,
            liouville_bound: 30,
            ultrametric_bound: 5,
            small_bound: 12,
            finite_places: vec![2, 3, 5, 7],
            line_min_points: 5,
        }
    }
}

/// Result of one named check.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn pass(name: &'static str, detail: String) -> CheckOutcome {
        CheckOutcome {
            name,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> CheckOutcome {
        CheckOutcome {
            name,
            passed: false,
            detail,
        }
    }

    fn from(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
        CheckOutcome {
            name,
            passed,
            detail,
        }
    }
}

/// Run the whole suite against a surface. Outcomes arrive in a fixed order.
pub fn run_checks(spec: &HypersurfaceSpec, params: &VerifyParams) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();

    out.push(product_formula());
    out.push(normalize_scaling());

    let small_cfg = SearchConfig::for_spec(spec, params.small_bound);
    let small_points = enumerate_points(spec, &small_cfg)?;

    out.push(sieve_brute_equivalence(spec, params.small_bound, &small_points));
    out.push(partition_independence(spec, params.small_bound, &small_points));
    out.push(canonical_membership(spec, params.small_bound, &small_points));
    out.push(smoothness_spot_check(spec, &small_points));
    out.push(count_monotonicity(&small_points, params.small_bound));
    out.push(distance_symmetry_identity(&small_points, &params.finite_places));

    out.push(global_decomposition(spec, params)?);
    out.push(liouville_bounds(spec, params)?);
    out.push(ultrametric(spec, params)?);

    if spec.ambient_dim() == 3 {
        let detected = detect_lines(&small_points, params.line_min_points)?;
        out.push(line_detection_against_triples(
            &small_points,
            params.line_min_points,
            &detected,
        ));
        out.push(line_surface_symbolic(spec, &detected));
        out.push(pluecker_span_invariance(&small_points, &detected));
        out.push(gap_bounds_and_exclusion(spec, &small_points, &detected));
    } else {
        out.push(gap_bounds_and_exclusion(spec, &small_points, &[]));
    }

    Ok(out)
}

// ---------------------------------------------------------------------------
// arith checks
// ---------------------------------------------------------------------------

/// Sum of ln|r|_v over the archimedean place and every prime dividing the
/// numerator or denominator cancels to zero, to 1e-12.
fn product_formula() -> CheckOutcome {
    let samples: [(i64, i64); 8] = [
        (12, 1),
        (-12, 1),
        (158, 133),
        (635_318_657, 408),
        (-1, 1024),
        (243, 1),
        (7_776_000, 77),
        (-50_000, 2187),
    ];
    let mut max_residual = 0.0f64;
    let mut checked = 0usize;
    for (num, den) in samples {
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        let mut places = vec![Place::Archimedean];
        let mut primes = BTreeSet::new();
        for part in [r.numer(), r.denom()] {
            if part.abs() > BigInt::one() {
                for (p, _) in factor_bigint(part).expect("sample factors") {
                    primes.insert(p);
                }
            }
        }
        for p in primes {
            places.push(Place::finite(p).expect("prime"));
        }
        let mut sum = 0.0;
        for v in places {
            sum += ln_rational(&abs_v(&r, v).expect("nonzero"));
        }
        max_residual = max_residual.max(sum.abs());
        checked += 1;
    }
    CheckOutcome::from(
        "product_formula",
        max_residual <= 1e-12,
        format!("{checked} rationals, max residual {max_residual:.3e}"),
    )
}

/// normalize(lambda * x) == normalize(x) over deterministic rational
/// scalars, including sign flips; idempotence on the results.
fn normalize_scaling() -> CheckOutcome {
    let tuples: [&[i64]; 4] = [
        &[2, 4, 6, 8],
        &[0, 0, -3, 0],
        &[-5, 10, 0, 0],
        &[7, -3, 0, 11],
    ];
    let scalars: [(i64, i64); 6] = [(1, 1), (-1, 1), (3, 2), (-7, 5), (10, 3), (-1, 9)];
    let mut checked = 0usize;
    for raw in tuples {
        let base = ProjPoint::from_i64(raw).expect("nonzero");
        for (a, b) in scalars {
            let lam = BigRational::new(BigInt::from(a), BigInt::from(b));
            let scaled: Vec<BigRational> = raw
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)) * &lam)
                .collect();
            let again = ProjPoint::from_rationals(&scaled).expect("nonzero");
            if again != base {
                return CheckOutcome::fail(
                    "normalize_scaling",
                    format!("scaling {raw:?} by {a}/{b} changed the canonical point"),
                );
            }
            let idem = ProjPoint::normalize(again.coords()).expect("valid");
            if idem != again {
                return CheckOutcome::fail(
                    "normalize_scaling",
                    "normalize is not idempotent".to_string(),
                );
            }
            checked += 1;
        }
    }
    CheckOutcome::pass("normalize_scaling", format!("{checked} scalar checks"))
}

// ---------------------------------------------------------------------------
// search checks
// ---------------------------------------------------------------------------

fn sieve_brute_equivalence(
    spec: &HypersurfaceSpec,
    bound: u64,
    sieved: &[ProjPoint],
) -> CheckOutcome {
    let cfg = SearchConfig::for_spec(spec, bound).without_sieve();
    match enumerate_points(spec, &cfg) {
        Ok(brute) => CheckOutcome::from(
            "sieve_brute_equivalence",
            brute == sieved,
            format!("B={bound}: sieve {} points, brute {}", sieved.len(), brute.len()),
        ),
        Err(e) => CheckOutcome::fail("sieve_brute_equivalence", e.to_string()),
    }
}

fn partition_independence(
    spec: &HypersurfaceSpec,
    bound: u64,
    reference: &[ProjPoint],
) -> CheckOutcome {
    for parts in [2usize, 8] {
        let cfg = SearchConfig::for_spec(spec, bound).with_partitions(parts);
        match enumerate_points(spec, &cfg) {
            Ok(pts) if pts == reference => {}
            Ok(pts) => {
                return CheckOutcome::fail(
                    "partition_independence",
                    format!("{parts} partitions produced {} points, expected {}", pts.len(), reference.len()),
                )
            }
            Err(e) => return CheckOutcome::fail("partition_independence", e.to_string()),
        }
    }
    CheckOutcome::pass(
        "partition_independence",
        format!("B={bound}: identical under 1, 2, 8 partitions"),
    )
}

fn canonical_membership(
    spec: &HypersurfaceSpec,
    bound: u64,
    points: &[ProjPoint],
) -> CheckOutcome {
    let b = BigRational::from_integer(BigInt::from(bound));
    for p in points {
        if !spec.contains_point(p).unwrap_or(false) {
            return CheckOutcome::fail("canonical_membership", format!("{p} is off the surface"));
        }
        if ProjPoint::normalize(p.coords()).ok().as_ref() != Some(p) {
            return CheckOutcome::fail("canonical_membership", format!("{p} is not canonical"));
        }
        if weil_height(p).multiplicative > b {
            return CheckOutcome::fail("canonical_membership", format!("{p} exceeds the bound"));
        }
    }
    CheckOutcome::pass(
        "canonical_membership",
        format!("{} points canonical, on-surface, within bound", points.len()),
    )
}

fn smoothness_spot_check(spec: &HypersurfaceSpec, points: &[ProjPoint]) -> CheckOutcome {
    for p in points {
        match spec.is_singular_at(p) {
            Ok(false) => {}
            Ok(true) => {
                return CheckOutcome::fail(
                    "smoothness_spot_check",
                    format!("rational singular point {p}"),
                )
            }
            Err(e) => return CheckOutcome::fail("smoothness_spot_check", e.to_string()),
        }
    }
    CheckOutcome::pass(
        "smoothness_spot_check",
        format!("gradient nonzero at all {} points", points.len()),
    )
}

fn count_monotonicity(points: &[ProjPoint], bound: u64) -> CheckOutcome {
    let bounds: Vec<u64> = (1..=bound).collect();
    let all = match count_function(points, &ExclusionPredicate::none(), &bounds) {
        Ok(s) => s,
        Err(e) => return CheckOutcome::fail("count_monotonicity", e.to_string()),
    };
    for w in all.samples().windows(2) {
        if w[0].count > w[1].count {
            return CheckOutcome::fail("count_monotonicity", "counts decreased".to_string());
        }
    }
    // Excluding a denylist can only lower counts pointwise.
    let deny: Vec<ProjPoint> = points.iter().take(5).cloned().collect();
    let excl = ExclusionPredicate::new(vec![], deny);
    let off = match count_function(points, &excl, &bounds) {
        Ok(s) => s,
        Err(e) => return CheckOutcome::fail("count_monotonicity", e.to_string()),
    };
    for (a, b) in all.samples().iter().zip(off.samples()) {
        if b.count > a.count {
            return CheckOutcome::fail(
                "count_monotonicity",
                "exclusion increased a count".to_string(),
            );
        }
    }
    CheckOutcome::pass(
        "count_monotonicity",
        format!("{} bounds, exclusion pointwise dominated", bounds.len()),
    )
}

fn distance_symmetry_identity(points: &[ProjPoint], finite: &[u64]) -> CheckOutcome {
    let sample: Vec<&ProjPoint> = points.iter().take(24).collect();
    let mut places = vec![Place::Archimedean];
    for &p in finite {
        places.push(Place::finite(p).expect("prime"));
    }
    let mut checked = 0usize;
    for (i, a) in sample.iter().enumerate() {
        for b in &sample[i..] {
            for &v in &places {
                let d1 = proj_distance(a, b, v).expect("same dim");
                let d2 = proj_distance(b, a, v).expect("same dim");
                if d1.exact != d2.exact {
                    return CheckOutcome::fail(
                        "distance_symmetry_identity",
                        format!("asymmetry at {a}, {b}, {v}"),
                    );
                }
                if d1.exact.is_zero() != (a == b) {
                    return CheckOutcome::fail(
                        "distance_symmetry_identity",
                        format!("identity-of-indiscernibles failure at {a}, {b}, {v}"),
                    );
                }
                checked += 1;
            }
        }
    }
    CheckOutcome::pass(
        "distance_symmetry_identity",
        format!("{checked} ordered checks"),
    )
}

// ---------------------------------------------------------------------------
// localheights checks
// ---------------------------------------------------------------------------

/// For every enumerated surface point off an auxiliary divisor D, the local
/// heights over the archimedean place and the primes dividing F_D(x) sum to
/// deg(D) * h(P), to 1e-9.
fn global_decomposition(spec: &HypersurfaceSpec, params: &VerifyParams) -> Result<CheckOutcome> {
    let cfg = SearchConfig::for_spec(spec, params.decomposition_bound);
    let points = enumerate_points(spec, &cfg)?;
    let width = spec.ambient_dim() + 1;

    // Auxiliary divisors: a positive definite quartic (never vanishes on a
    // rational point) and the first coordinate hyperplane.
    let positive_quartic = {
        let terms: Vec<Term> = (0..width)
            .map(|i| {
                let mut e = vec![0u32; width];
                e[i] = 4;
                Term::new(e, BigInt::one())
            })
            .collect();
        HypersurfaceSpec::new(spec.ambient_dim(), 4, terms).expect("valid divisor")
    };
    let hyperplane = {
        let mut e = vec![0u32; width];
        e[0] = 1;
        HypersurfaceSpec::new(spec.ambient_dim(), 1, vec![Term::new(e, BigInt::one())])
            .expect("valid divisor")
    };

    let mut max_residual = 0.0f64;
    let mut checks = 0usize;
    for divisor in [&positive_quartic, &hyperplane] {
        for p in &points {
            let value = divisor.evaluate_form(p)?;
            if value.is_zero() {
                continue; // on the divisor; local height undefined there
            }
            let mut places = vec![Place::Archimedean];
            for (q, _) in factor_bigint(&value)? {
                places.push(Place::finite(q)?);
            }
            let mut sum = 0.0;
            for v in places {
                sum += local_height_hypersurface(divisor, p, v)?;
            }
            let expect = divisor.degree() as f64 * weil_height(p).logarithmic;
            max_residual = max_residual.max((sum - expect).abs());
            checks += 1;
        }
    }
    Ok(CheckOutcome::from(
        "global_decomposition",
        max_residual <= 1e-9,
        format!(
            "B={}: {} point/divisor checks, max residual {:.3e}",
            params.decomposition_bound, checks, max_residual
        ),
    ))
}

/// Exact integer forms of the Liouville bounds on all pairs:
/// archimedean   max|minor| >= 1, i.e. dist >= 1/(H(P)H(Q));
/// finite p      p^(min ord) <= 2 H(P) H(Q), i.e. dist_p >= 1/(2 H(P)H(Q)).
fn liouville_bounds(spec: &HypersurfaceSpec, params: &VerifyParams) -> Result<CheckOutcome> {
    let cfg = SearchConfig::for_spec(spec, params.liouville_bound);
    let points = enumerate_points(spec, &cfg)?;
    let views: Vec<(Vec<i64>, i64)> = points
        .iter()
        .map(|p| {
            let c = p.coords_i64().expect("small coordinates");
            let h = c.iter().map(|x| x.abs()).max().expect("nonempty");
            (c, h)
        })
        .collect();

    let mut pairs = 0u64;
    for i in 0..views.len() {
        for j in (i + 1)..views.len() {
            let m = crate::localheights::max_abs_minor_i64(&views[i].0, &views[j].0);
            if m < 1 {
                return Ok(CheckOutcome::fail(
                    "liouville_bounds",
                    format!("distinct pair ({i},{j}) with all minors zero"),
                ));
            }
            let two_hh = 2 * views[i].1 as i128 * views[j].1 as i128;
            for &p in &params.finite_places {
                if let Some(ord) =
                    crate::localheights::min_ord_over_minors_i64(&views[i].0, &views[j].0, p)
                {
                    let mut pw: i128 = 1;
                    for _ in 0..ord {
                        pw *= p as i128;
                    }
                    if pw > two_hh {
                        return Ok(CheckOutcome::fail(
                            "liouville_bounds",
                            format!("p={p} pair ({i},{j}): p^{ord} exceeds 2*H*H"),
                        ));
                    }
                }
            }
            pairs += 1;
        }
    }

    // Spot-check the exact rational route on a deterministic slice.
    for (i, a) in points.iter().take(40).enumerate() {
        for b in points.iter().take(40).skip(i + 1) {
            let d = proj_distance(a, b, Place::Archimedean)?;
            let hh = weil_height(a).multiplicative * weil_height(b).multiplicative;
            if d.exact < hh.recip() {
                return Ok(CheckOutcome::fail(
                    "liouville_bounds",
                    format!("exact archimedean bound violated at {a}, {b}"),
                ));
            }
        }
    }
    Ok(CheckOutcome::pass(
        "liouville_bounds",
        format!(
            "B={}: {} pairs x {} finite places, plus exact spot checks",
            params.liouville_bound,
            pairs,
            params.finite_places.len()
        ),
    ))
}

/// dist_p(P,R) <= max(dist_p(P,Q), dist_p(Q,R)) on all point triples,
/// i.e. ord(P,R) >= min(ord(P,Q), ord(Q,R)) on the minor valuations.
fn ultrametric(spec: &HypersurfaceSpec, params: &VerifyParams) -> Result<CheckOutcome> {
    let cfg = SearchConfig::for_spec(spec, params.ultrametric_bound);
    let points = enumerate_points(spec, &cfg)?;
    let views: Vec<Vec<i64>> = points
        .iter()
        .map(|p| p.coords_i64().expect("small coordinates"))
        .collect();
    let n = views.len();
    let mut triples = 0u64;
    for &p in &params.finite_places {
        // Valuation matrix; u8::MAX marks the (absent) diagonal.
        let mut ord = vec![u8::MAX; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = crate::localheights::min_ord_over_minors_i64(&views[i], &views[j], p)
                    .expect("distinct points") as u8;
                ord[i * n + j] = v;
                ord[j * n + i] = v;
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let vij = ord[i * n + j];
                for k in (j + 1)..n {
                    let vik = ord[i * n + k];
                    let vjk = ord[j * n + k];
                    // each side in turn plays the middle point
                    if vik < vij.min(vjk) || vij < vik.min(vjk) || vjk < vij.min(vik) {
                        return Ok(CheckOutcome::fail(
                            "ultrametric",
                            format!("violated at p={p}, triple ({i},{j},{k})"),
                        ));
                    }
                    triples += 1;
                }
            }
        }
    }
    Ok(CheckOutcome::pass(
        "ultrametric",
        format!(
            "B={}: {} triples per place over {:?}",
            params.ultrametric_bound, triples, params.finite_places
        ),
    ))
}

// ---------------------------------------------------------------------------
// curves checks
// ---------------------------------------------------------------------------

/// Compare detect_lines against a brute all-triples collinearity scan on a
/// deterministic subset of at most 200 points.
fn line_detection_against_triples(
    points: &[ProjPoint],
    min_points: usize,
    _detected_full: &[crate::curves::DetectedLine],
) -> CheckOutcome {
    let subset: Vec<ProjPoint> = points.iter().take(200).cloned().collect();
    let views: Vec<Vec<i64>> = subset
        .iter()
        .map(|p| p.coords_i64().expect("small coordinates"))
        .collect();
    let n = subset.len();

    let collinear = |a: &[i64], b: &[i64], c: &[i64]| -> bool {
        // rank <= 2 iff all four 3x3 minors of the stacked matrix vanish
        for drop in 0..4usize {
            let cols: Vec<usize> = (0..4).filter(|&x| x != drop).collect();
            let det = a[cols[0]] as i128
                * (b[cols[1]] as i128 * c[cols[2]] as i128
                    - b[cols[2]] as i128 * c[cols[1]] as i128)
                - a[cols[1]] as i128
                    * (b[cols[0]] as i128 * c[cols[2]] as i128
                        - b[cols[2]] as i128 * c[cols[0]] as i128)
                + a[cols[2]] as i128
                    * (b[cols[0]] as i128 * c[cols[1]] as i128
                        - b[cols[1]] as i128 * c[cols[0]] as i128);
            if det != 0 {
                return false;
            }
        }
        true
    };

    // Brute route: member sets per pair, deduplicated as sorted index sets.
    let mut oracle_lines: BTreeSet<Vec<usize>> = BTreeSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut members = vec![i, j];
            for k in 0..n {
                if k != i && k != j && collinear(&views[i], &views[j], &views[k]) {
                    members.push(k);
                }
            }
            if members.len() >= min_points {
                members.sort_unstable();
                oracle_lines.insert(members);
            }
        }
    }

    let detected = match detect_lines(&subset, min_points) {
        Ok(d) => d,
        Err(e) => return CheckOutcome::fail("line_detection_against_triples", e.to_string()),
    };
    if detected.len() != oracle_lines.len() {
        return CheckOutcome::fail(
            "line_detection_against_triples",
            format!(
                "detect_lines found {} lines, triples oracle {}",
                detected.len(),
                oracle_lines.len()
            ),
        );
    }
    for dl in &detected {
        let members: Vec<usize> = subset
            .iter()
            .enumerate()
            .filter(|(_, p)| dl.line.contains(p))
            .map(|(i, _)| i)
            .collect();
        if members.len() != dl.member_count {
            return CheckOutcome::fail(
                "line_detection_against_triples",
                "reported member count disagrees with incidence recount".to_string(),
            );
        }
        if !oracle_lines.contains(&members) {
            return CheckOutcome::fail(
                "line_detection_against_triples",
                "detected line missing from the triples oracle".to_string(),
            );
        }
    }
    CheckOutcome::pass(
        "line_detection_against_triples",
        format!(
            "{} points, {} lines agree with the all-triples oracle",
            n,
            detected.len()
        ),
    )
}

/// line_on_surface agrees with an exact symbolic restriction of the form to
/// the line (binomial expansion of F(s*P + t*Q)).
fn line_surface_symbolic(
    spec: &HypersurfaceSpec,
    detected: &[crate::curves::DetectedLine],
) -> CheckOutcome {
    // Also exercise lines that are not on the surface.
    let axis_lines: Vec<crate::curves::RationalLine> = [
        ([1i64, 0, 0, 0], [0i64, 1, 0, 0]),
        ([1, 0, 0, 0], [0, 0, 1, 0]),
        ([0, 1, 0, 0], [0, 0, 0, 1]),
    ]
    .iter()
    .map(|(a, b)| {
        crate::curves::RationalLine::through(
            &ProjPoint::from_i64(a).unwrap(),
            &ProjPoint::from_i64(b).unwrap(),
        )
        .unwrap()
    })
    .collect();

    let mut checked = 0usize;
    for line in detected
        .iter()
        .map(|d| &d.line)
        .chain(axis_lines.iter())
    {
        let sampled = line_on_surface(line, spec);
        let coeffs = restrict_to_line(spec, line.span().0, line.span().1);
        let symbolic = coeffs.iter().all(Zero::is_zero);
        if sampled != symbolic {
            return CheckOutcome::fail(
                "line_surface_symbolic",
                format!("disagreement on a line with Plücker {:?}", line.pluecker()),
            );
        }
        checked += 1;
    }
    CheckOutcome::pass("line_surface_symbolic", format!("{checked} lines compared"))
}

/// Coefficients of F(s*P + t*Q) as a binary form in (s, t), exact.
fn restrict_to_line(spec: &HypersurfaceSpec, p: &ProjPoint, q: &ProjPoint) -> Vec<BigInt> {
    let d = spec.degree() as usize;
    let mut acc = vec![BigInt::zero(); d + 1];
    for term in spec.terms() {
        // product over variables of (p_i s + q_i t)^(e_i)
        let mut poly = vec![BigInt::one()]; // constant 1 as a binary form
        for (i, &e) in term.exponents().iter().enumerate() {
            for _ in 0..e {
                // multiply poly by (p_i s + q_i t)
                let mut next = vec![BigInt::zero(); poly.len() + 1];
                for (k, c) in poly.iter().enumerate() {
                    next[k + 1] += c * &p.coords()[i]; // times s
                    next[k] += c * &q.coords()[i]; // times t
                }
                poly = next;
            }
        }
        for (k, c) in poly.iter().enumerate() {
            acc[k] += term.coefficient() * c;
        }
    }
    acc
}

fn pluecker_span_invariance(
    points: &[ProjPoint],
    detected: &[crate::curves::DetectedLine],
) -> CheckOutcome {
    let mut checked = 0usize;
    for dl in detected.iter().take(4) {
        let members: Vec<&ProjPoint> = points
            .iter()
            .filter(|p| dl.line.contains(p))
            .take(4)
            .collect();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                match pluecker_of_pair(a, b) {
                    Ok(v) if &v == dl.line.pluecker() => checked += 1,
                    _ => {
                        return CheckOutcome::fail(
                            "pluecker_span_invariance",
                            "a member pair spans a different canonical vector".to_string(),
                        )
                    }
                }
            }
        }
    }
    CheckOutcome::pass(
        "pluecker_span_invariance",
        format!("{checked} member pairs reproduce their line"),
    )
}

// ---------------------------------------------------------------------------
// repulsion checks
// ---------------------------------------------------------------------------

/// Liouville-implied exponent bounds on every scanned pair, the K3 gap
/// bound at epsilon = 1, and exclusion monotonicity of both statistics.
fn gap_bounds_and_exclusion(
    spec: &HypersurfaceSpec,
    points: &[ProjPoint],
    detected: &[crate::curves::DetectedLine],
) -> CheckOutcome {
    let limits = ScanLimits::default();
    let none = ExclusionPredicate::none();
    let arch = PlaceSet::new(vec![Place::Archimedean]).expect("distinct");

    let mut violations = 0u64;
    let mut scanned = 0u64;
    let places = [Place::Archimedean, Place::finite(2).expect("prime")];
    let mut max_with: Vec<Option<f64>> = vec![None; places.len()];
    for (k, &place) in places.iter().enumerate() {
        let summary = match pair_scan_with(points, place, &none, 0.0, limits, |r| {
            let bound = 1.0 + std::f64::consts::LN_2 / r.pair_height;
            if r.exponent > bound + 1e-12 {
                violations += 1;
            }
        }) {
            Ok(s) => s,
            Err(e) => return CheckOutcome::fail("gap_bounds_and_exclusion", e.to_string()),
        };
        scanned += summary.pairs_included;
        max_with[k] = summary.max_exponent;
    }
    if violations > 0 {
        return CheckOutcome::fail(
            "gap_bounds_and_exclusion",
            format!("{violations} exponent-bound violations"),
        );
    }

    // K3-type surfaces: the epsilon = 1 archimedean gap constant is at most
    // ln 2 (direct consequence of the integer-minor Liouville bound).
    if spec.canonical_coefficient() == 0 {
        match vojta_gap_check(points, spec, 1.0, &arch, &none, limits) {
            Ok(report) => {
                if report.constant > std::f64::consts::LN_2 + 1e-12 {
                    return CheckOutcome::fail(
                        "gap_bounds_and_exclusion",
                        format!("epsilon=1 constant {} exceeds ln 2", report.constant),
                    );
                }
            }
            Err(crate::error::Error::NoPairs) => {}
            Err(e) => return CheckOutcome::fail("gap_bounds_and_exclusion", e.to_string()),
        }
    }

    // Exclusion monotonicity: excluding half the detected lines can only
    // lower the max exponent and the gap constant.
    if !detected.is_empty() {
        let half: Vec<_> = detected
            .iter()
            .take((detected.len() + 1) / 2)
            .map(|d| d.line.clone())
            .collect();
        let excl = ExclusionPredicate::new(half, vec![]);
        for (k, &place) in places.iter().enumerate() {
            let with_excl = match pair_scan_with(points, place, &excl, 0.0, limits, |_| {}) {
                Ok(s) => s,
                Err(e) => return CheckOutcome::fail("gap_bounds_and_exclusion", e.to_string()),
            };
            if let (Some(a), Some(b)) = (with_excl.max_exponent, max_with[k]) {
                if a > b + 0.0 {
                    return CheckOutcome::fail(
                        "gap_bounds_and_exclusion",
                        "exclusion raised the max exponent".to_string(),
                    );
                }
            }
        }
        let c_all = vojta_gap_check(points, spec, 0.5, &arch, &none, limits);
        let c_off = vojta_gap_check(points, spec, 0.5, &arch, &excl, limits);
        if let (Ok(a), Ok(b)) = (c_all, c_off) {
            if b.constant > a.constant {
                return CheckOutcome::fail(
                    "gap_bounds_and_exclusion",
                    "exclusion raised the gap constant".to_string(),
                );
            }
        }
    }

    CheckOutcome::pass(
        "gap_bounds_and_exclusion",
        format!("{scanned} pairs within exponent bounds; gap and exclusion checks hold"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn whole_suite_passes_on_quartic_at_small_bounds() {
        let params = VerifyParams {
            decomposition_bound: 8,
            liouville_bound: 6,
            ultrametric_bound: 3,
            small_bound: 8,
            finite_places: vec![2, 3, 5],
            line_min_points: 4,
        };
        let outcomes = run_checks(&quartic(), &params).unwrap();
        for o in &outcomes {
            assert!(o.passed, "{} failed: {}", o.name, o.detail);
        }
        assert!(outcomes.len() >= 12);
    }

    #[test]
    fn restriction_coefficients_match_sampling() {
        let q = quartic();
        let a = ProjPoint::from_i64(&[1, 0, 1, 0]).unwrap();
        let b = ProjPoint::from_i64(&[0, 1, 0, 1]).unwrap();
        let coeffs = restrict_to_line(&q, &a, &b);
        assert!(coeffs.iter().all(Zero::is_zero));

        let c = ProjPoint::from_i64(&[1, 0, 0, 0]).unwrap();
        let d = ProjPoint::from_i64(&[0, 1, 0, 0]).unwrap();
        let coeffs = restrict_to_line(&q, &c, &d);
        // F(s,t,0,0) = s^4 + t^4
        let expect: Vec<BigInt> = vec![
            BigInt::one(),
            BigInt::zero(),
            BigInt::zero(),
            BigInt::zero(),
            BigInt::one(),
        ];
        // coefficient index k is the s-degree
        assert_eq!(coeffs[0], expect[0]); // t^4 coefficient at k = 0
        assert_eq!(coeffs[4], expect[4]);
        assert!(coeffs[1].is_zero() && coeffs[2].is_zero() && coeffs[3].is_zero());
    }
}
