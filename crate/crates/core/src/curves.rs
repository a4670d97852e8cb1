//! Rational lines in projective 3-space: Plücker coordinates, detection of
//! lines through enumerated point sets, verification that a line lies on a
//! surface, and the exclusion predicates built from detected lines.
//!
//! Lines are keyed by their canonical primitive Plücker vector, an exact
//! integer key, so grouping pairs of points by line never produces a false
//! merge.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

use crate::arith::ProjPoint;
use crate::error::{Error, Result};
use crate::forms::HypersurfaceSpec;
use crate::localheights::FAST_COORD_LIMIT;

/// Index pairs (i, j) with i < j of the six 2x2 minors, in the order
/// p01, p02, p03, p12, p13, p23.
const MINOR_INDEX: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// A line in projective 3-space: two distinct spanning points plus the
/// canonical primitive Plücker vector they determine.
///
/// Invariants: the Plücker vector is primitive with positive first nonzero
/// entry, satisfies the Plücker relation `p01*p23 - p02*p13 + p03*p12 = 0`,
/// and is reproduced by any spanning pair of the same line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalLine {
    span: (ProjPoint, ProjPoint),
    pluecker: [BigInt; 6],
}

impl RationalLine {
    /// The line through two distinct points of projective 3-space.
    pub fn through(p: &ProjPoint, q: &ProjPoint) -> Result<RationalLine> {
        let pluecker = pluecker_of_pair(p, q)?;
        Ok(RationalLine {
            span: (p.clone(), q.clone()),
            pluecker,
        })
    }

    pub fn span(&self) -> (&ProjPoint, &ProjPoint) {
        (&self.span.0, &self.span.1)
    }

    pub fn pluecker(&self) -> &[BigInt; 6] {
        &self.pluecker
    }

    /// Exact incidence test: a point lies on the line iff it equals a span
    /// point or spans the same canonical Plücker vector with one of them.
    pub fn contains(&self, x: &ProjPoint) -> bool {
        if x.coords().len() != 4 {
            return false;
        }
        if x == &self.span.0 {
            return true;
        }
        match pluecker_of_pair(x, &self.span.0) {
            Ok(v) => v == self.pluecker,
            Err(_) => false,
        }
    }
}

/// Canonical primitive Plücker vector of a pair of distinct points of
/// projective 3-space: the six 2x2 minors, divided by their content, with
/// the first nonzero entry positive. Identical for any two distinct points
/// spanning the same line.
pub fn pluecker_of_pair(p: &ProjPoint, q: &ProjPoint) -> Result<[BigInt; 6]> {
    if p.coords().len() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: p.coords().len(),
        });
    }
    if q.coords().len() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: q.coords().len(),
        });
    }
    if p == q {
        return Err(Error::EqualPoints);
    }
    let x = p.coords();
    let y = q.coords();
    let mut v: [BigInt; 6] = Default::default();
    for (k, &(i, j)) in MINOR_INDEX.iter().enumerate() {
        v[k] = &x[i] * &y[j] - &x[j] * &y[i];
    }
    canonicalize_pluecker(&mut v);
    debug_assert!(pluecker_relation_holds(&v));
    Ok(v)
}

fn canonicalize_pluecker(v: &mut [BigInt; 6]) {
    let mut content = BigInt::zero();
    for c in v.iter() {
        content = content.gcd(c);
    }
    debug_assert!(!content.is_zero(), "distinct points have a nonzero minor");
    let flip = v.iter().find(|c| !c.is_zero()).map(|c| c.is_negative());
    if flip == Some(true) {
        content = -content;
    }
    for c in v.iter_mut() {
        *c = &*c / &content;
    }
}

/// `p01*p23 - p02*p13 + p03*p12 == 0`.
pub(crate) fn pluecker_relation_holds(v: &[BigInt; 6]) -> bool {
    (&v[0] * &v[5] - &v[1] * &v[4] + &v[2] * &v[3]).is_zero()
}

/// A line found by `detect_lines`, with the exact number of input points
/// lying on it.
#[derive(Debug, Clone)]
pub struct DetectedLine {
    pub line: RationalLine,
    pub member_count: usize,
}

/// Group all unordered pairs of the input points by canonical Plücker
/// vector and return every line hit by at least `min_points` points, with
/// exact member counts, ordered by member count descending then Plücker
/// vector ascending.
///
/// Points must be canonical, deduplicated, and live in projective 3-space.
/// `min_points` must be at least 3.
pub fn detect_lines(points: &[ProjPoint], min_points: usize) -> Result<Vec<DetectedLine>> {
    assert!(min_points >= 3, "min_points must be at least 3");
    for p in points {
        if p.coords().len() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: p.coords().len(),
            });
        }
    }

    // Per-anchor grouping: a line whose least member is the anchor shows up
    // there with all of its other members, so scanning anchors in index
    // order sees every qualifying line at full count first.
    let fast = fast_views(points);
    let mut found: BTreeMap<[BigInt; 6], (usize, usize)> = BTreeMap::new();
    match fast {
        Some(views) => {
            let mut groups: BTreeMap<[i64; 6], Vec<usize>> = BTreeMap::new();
            for anchor in 0..points.len() {
                groups.clear();
                for j in (anchor + 1)..points.len() {
                    let key = pluecker_i64(&views[anchor], &views[j]);
                    groups.entry(key).or_default().push(j);
                }
                for (key, members) in &groups {
                    if members.len() + 1 >= min_points {
                        let big: [BigInt; 6] = key.map(BigInt::from);
                        found
                            .entry(big)
                            .or_insert((anchor, members.len() + 1));
                    }
                }
            }
        }
        None => {
            let mut groups: BTreeMap<[BigInt; 6], Vec<usize>> = BTreeMap::new();
            for anchor in 0..points.len() {
                groups.clear();
                for j in (anchor + 1)..points.len() {
                    let key = pluecker_of_pair(&points[anchor], &points[j])?;
                    groups.entry(key).or_default().push(j);
                }
                for (key, members) in &groups {
                    if members.len() + 1 >= min_points {
                        found
                            .entry(key.clone())
                            .or_insert((anchor, members.len() + 1));
                    }
                }
            }
        }
    }

    let mut out: Vec<DetectedLine> = Vec::with_capacity(found.len());
    for (key, (anchor, count)) in found {
        // Rebuild the line from its anchor and any partner on it.
        let partner = points
            .iter()
            .enumerate()
            .find(|(j, q)| {
                *j != anchor && pluecker_of_pair(&points[anchor], q).ok() == Some(key.clone())
            })
            .map(|(j, _)| j)
            .expect("grouped line has a partner");
        let line = RationalLine::through(&points[anchor], &points[partner])?;
        out.push(DetectedLine {
            line,
            member_count: count,
        });
    }
    out.sort_by(|a, b| {
        b.member_count
            .cmp(&a.member_count)
            .then_with(|| a.line.pluecker().cmp(b.line.pluecker()))
    });
    Ok(out)
}

fn fast_views(points: &[ProjPoint]) -> Option<Vec<[i64; 4]>> {
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let v = p.coords_i64()?;
        if v.iter().any(|&c| c.abs() > FAST_COORD_LIMIT) {
            return None;
        }
        out.push([v[0], v[1], v[2], v[3]]);
    }
    Some(out)
}

/// Canonical Plücker key over i64 views; minors fit i128 and the reduced
/// entries fit i64 because they divide the minors.
fn pluecker_i64(x: &[i64; 4], y: &[i64; 4]) -> [i64; 6] {
    let mut v = [0i128; 6];
    for (k, &(i, j)) in MINOR_INDEX.iter().enumerate() {
        v[k] = x[i] as i128 * y[j] as i128 - x[j] as i128 * y[i] as i128;
    }
    let mut content: i128 = 0;
    for &c in &v {
        content = gcd_i128(content, c.abs());
    }
    debug_assert!(content > 0);
    let mut out = [0i64; 6];
    let mut flipped = false;
    let mut seen_nonzero = false;
    for k in 0..6 {
        let mut c = v[k] / content;
        if !seen_nonzero && c != 0 {
            seen_nonzero = true;
            flipped = c < 0;
        }
        if flipped {
            c = -c;
        }
        out[k] = c as i64;
    }
    out
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Whether a degree-d form vanishes identically on a line: evaluate at d+1
/// distinct parameter points `s*P + t*Q`; a nonzero binary degree-d form
/// has at most d projective roots, so d+1 vanishings force the zero form.
pub fn line_on_surface(line: &RationalLine, spec: &HypersurfaceSpec) -> bool {
    assert_eq!(
        spec.ambient_dim(),
        3,
        "lines live in projective 3-space"
    );
    let (p, q) = line.span();
    let d = spec.degree();
    for (s, t) in parameter_points(d) {
        let coords: Vec<BigInt> = p
            .coords()
            .iter()
            .zip(q.coords())
            .map(|(a, b)| a * BigInt::from(s) + b * BigInt::from(t))
            .collect();
        let value = spec.evaluate_at(&coords).expect("span dims match");
        if !value.is_zero() {
            return false;
        }
    }
    true
}

/// d+1 pairwise non-proportional parameter pairs, e.g. for d = 4:
/// (1,0), (0,1), (1,1), (1,2), (2,1).
fn parameter_points(degree: u32) -> Vec<(i64, i64)> {
    let need = degree as usize + 1;
    let mut out = vec![(1i64, 0i64), (0, 1)];
    let mut k = 1i64;
    while out.len() < need {
        out.push((1, k));
        if out.len() < need && k > 1 {
            out.push((k, 1));
        }
        k += 1;
    }
    out.truncate(need);
    out
}

/// All canonical points of a line with Weil height at most `height_bound`.
///
/// Sweeps primitive parameter pairs (s, t) over a box wide enough to cover
/// every such point: the content of `s*P + t*Q` divides the content of the
/// span's minor vector, which bounds the parameters needed for any point of
/// height <= B.
pub fn points_on_line(line: &RationalLine, height_bound: u64) -> Result<Vec<ProjPoint>> {
    let (p, q) = line.span();
    let pc = p
        .coords_i64()
        .ok_or_else(|| Error::InvalidConfig("line span exceeds the sweep range".to_string()))?;
    let qc = q
        .coords_i64()
        .ok_or_else(|| Error::InvalidConfig("line span exceeds the sweep range".to_string()))?;

    // Content of the raw minor vector of this particular spanning pair.
    let mut gamma: i128 = 0;
    for &(i, j) in MINOR_INDEX.iter() {
        gamma = gcd_i128(
            gamma,
            (pc[i] as i128 * qc[j] as i128 - pc[j] as i128 * qc[i] as i128).abs(),
        );
    }
    let hp = pc.iter().map(|c| c.abs()).max().unwrap() as i128;
    let hq = qc.iter().map(|c| c.abs()).max().unwrap() as i128;
    let sweep = 2 * gamma * height_bound as i128 * hp.max(hq);
    let sweep: i64 = sweep
        .try_into()
        .map_err(|_| Error::InvalidConfig("line sweep range overflows".to_string()))?;
    if sweep > (1 << 21) {
        return Err(Error::InvalidConfig(format!(
            "line sweep range {sweep} is too large"
        )));
    }

    let bound = BigInt::from(height_bound);
    let mut out = Vec::new();
    // Sign-canonical primitive parameters: s > 0 with any t, plus (0, 1).
    let mut push = |s: i64, t: i64| {
        let coords: Vec<BigInt> = pc
            .iter()
            .zip(&qc)
            .map(|(&a, &b)| BigInt::from(a as i128 * s as i128 + b as i128 * t as i128))
            .collect();
        if coords.iter().all(Zero::is_zero) {
            return;
        }
        let pt = ProjPoint::normalize(&coords).expect("nonzero");
        if BigInt::from(pt.max_abs_coord()) <= bound {
            out.push(pt);
        }
    };
    push(0, 1);
    for s in 1..=sweep {
        for t in -sweep..=sweep {
            if gcd_i128(s as i128, (t as i128).abs()) == 1 {
                push(s, t);
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// The open-set complement used by counting and repulsion scans: a point is
/// excluded iff it lies on one of the listed lines or is denylisted.
#[derive(Debug, Clone, Default)]
pub struct ExclusionPredicate {
    lines: Vec<RationalLine>,
    extra_points: Vec<ProjPoint>,
}

impl ExclusionPredicate {
    pub fn new(lines: Vec<RationalLine>, extra_points: Vec<ProjPoint>) -> ExclusionPredicate {
        ExclusionPredicate {
            lines,
            extra_points,
        }
    }

    /// Excludes nothing.
    pub fn none() -> ExclusionPredicate {
        ExclusionPredicate::default()
    }

    pub fn lines(&self) -> &[RationalLine] {
        &self.lines
    }

    pub fn extra_points(&self) -> &[ProjPoint] {
        &self.extra_points
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty() && self.extra_points.is_empty()
    }

    pub fn is_excluded(&self, p: &ProjPoint) -> bool {
        self.extra_points.contains(p) || self.lines.iter().any(|l| l.contains(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

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

    fn as_i64(v: &[BigInt; 6]) -> [i64; 6] {
        let mut out = [0i64; 6];
        for (o, c) in out.iter_mut().zip(v) {
            *o = c.to_i64().unwrap();
        }
        out
    }

    #[test]
    fn pluecker_axis_line() {
        let v = pluecker_of_pair(&pt(&[1, 0, 0, 0]), &pt(&[0, 1, 0, 0])).unwrap();
        assert_eq!(as_i64(&v), [1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn pluecker_canonical_form() {
        let v = pluecker_of_pair(&pt(&[1, 0, 1, 0]), &pt(&[0, 1, 0, 1])).unwrap();
        assert_eq!(as_i64(&v), [1, 0, 1, -1, 0, 1]);
        assert!(pluecker_relation_holds(&v));
    }

    #[test]
    fn pluecker_span_invariance() {
        // All of these span the line {x0 = x2, x1 = x3}.
        let on_line = [
            pt(&[1, 0, 1, 0]),
            pt(&[0, 1, 0, 1]),
            pt(&[1, 1, 1, 1]),
            pt(&[2, 1, 2, 1]),
            pt(&[3, 1, 3, 1]),
            pt(&[1, -2, 1, -2]),
        ];
        let expect = pluecker_of_pair(&on_line[0], &on_line[1]).unwrap();
        for (i, a) in on_line.iter().enumerate() {
            for b in &on_line[i + 1..] {
                assert_eq!(pluecker_of_pair(a, b).unwrap(), expect);
            }
        }
    }

    #[test]
    fn pluecker_rejects_equal_and_wrong_dim() {
        let a = pt(&[1, 0, 1, 0]);
        assert!(matches!(
            pluecker_of_pair(&a, &a),
            Err(Error::EqualPoints)
        ));
        let b = pt(&[1, 0, 1]);
        assert!(matches!(
            pluecker_of_pair(&b, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn detect_three_collinear() {
        let pts = vec![pt(&[1, 0, 1, 0]), pt(&[0, 1, 0, 1]), pt(&[1, 1, 1, 1])];
        let lines = detect_lines(&pts, 3).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].member_count, 3);
        assert_eq!(as_i64(lines[0].line.pluecker()), [1, 0, 1, -1, 0, 1]);
    }

    #[test]
    fn detect_general_position_is_empty() {
        let pts = vec![
            pt(&[1, 0, 0, 0]),
            pt(&[0, 1, 0, 0]),
            pt(&[0, 0, 1, 0]),
            pt(&[0, 0, 0, 1]),
        ];
        assert!(detect_lines(&pts, 3).unwrap().is_empty());
    }

    #[test]
    fn detect_counts_exactly() {
        // Five points on {x0=x2, x1=x3}; four on {x1=0, x3=0} (the shared
        // point [1,0,1,0] lies on both); one stray.
        let mut pts = vec![
            pt(&[1, 0, 1, 0]),
            pt(&[0, 1, 0, 1]),
            pt(&[1, 1, 1, 1]),
            pt(&[2, 1, 2, 1]),
            pt(&[1, 2, 1, 2]),
            pt(&[1, 0, 0, 0]),
            pt(&[0, 0, 1, 0]),
            pt(&[1, 0, 2, 0]),
            pt(&[5, 3, 2, 7]),
        ];
        pts.sort();
        pts.dedup();
        let lines = detect_lines(&pts, 3).unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].member_count, 5);
        assert_eq!(lines[1].member_count, 4);
        // Recount independently through the incidence predicate.
        for dl in &lines {
            let recount = pts.iter().filter(|p| dl.line.contains(p)).count();
            assert_eq!(recount, dl.member_count);
        }
    }

    #[test]
    fn line_on_surface_examples() {
        let q = quartic();
        let on = RationalLine::through(&pt(&[1, 0, 1, 0]), &pt(&[0, 1, 0, 1])).unwrap();
        assert!(line_on_surface(&on, &q));
        let axis = RationalLine::through(&pt(&[1, 0, 0, 0]), &pt(&[0, 1, 0, 0])).unwrap();
        assert!(!line_on_surface(&axis, &q));
        // {x0 = x3, x1 = x2}
        let swapped = RationalLine::through(&pt(&[1, 0, 0, 1]), &pt(&[0, 1, 1, 0])).unwrap();
        assert!(line_on_surface(&swapped, &q));
    }

    #[test]
    fn parameter_points_are_distinct() {
        for d in 1..=6u32 {
            let pts = parameter_points(d);
            assert_eq!(pts.len(), d as usize + 1);
            for (i, &(a, b)) in pts.iter().enumerate() {
                for &(c, e) in &pts[i + 1..] {
                    assert_ne!(a as i128 * e as i128, b as i128 * c as i128);
                }
            }
        }
    }

    #[test]
    fn points_on_line_flagship() {
        let line = RationalLine::through(&pt(&[1, 0, 1, 0]), &pt(&[0, 1, 0, 1])).unwrap();
        let pts = points_on_line(&line, 5).unwrap();
        // Independent oracle: points of this line of height <= 5 biject
        // with sign-canonical primitive pairs (s, t), max(|s|,|t|) <= 5.
        let mut expect = 1usize; // (0, 1)
        for s in 1i64..=5 {
            for t in -5i64..=5 {
                if gcd_i128(s as i128, t.unsigned_abs() as i128) == 1 {
                    expect += 1;
                }
            }
        }
        assert_eq!(expect, 40);
        assert_eq!(pts.len(), expect);
        assert!(pts.contains(&pt(&[1, 1, 1, 1])));
        assert!(pts.contains(&pt(&[5, -4, 5, -4])));
        assert!(!pts.contains(&pt(&[1, 0, 0, 0])));
        for w in pts.windows(2) {
            assert!(w[0] < w[1], "sorted, deduplicated output");
        }
    }

    #[test]
    fn exclusion_predicate() {
        let line = RationalLine::through(&pt(&[1, 0, 1, 0]), &pt(&[0, 1, 0, 1])).unwrap();
        let denied = pt(&[9, 9, 1, 1]);
        let excl = ExclusionPredicate::new(vec![line], vec![denied.clone()]);
        assert!(excl.is_excluded(&pt(&[2, 1, 2, 1])));
        assert!(excl.is_excluded(&denied));
        assert!(!excl.is_excluded(&pt(&[1, 0, 0, 0])));
        assert!(ExclusionPredicate::none().is_empty());
    }
}
