//! All-pairs repulsion scans: per-pair distance exponents, argmax and
//! histogram summaries, height-threshold trend tables, and the diagonal
//! Vojta-gap evaluator.
//!
//! The exponent of a pair at a place is `-ln dist_v(P,Q) / (h(P)+h(Q))`:
//! the strength with which the pair tests the principle that close pairs
//! must be tall. Scans run over all unordered pairs of a point set, skip
//! excluded points, and cap at 10^8 pairs unless explicitly overridden.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::arith::{pair_height, Place, PlaceSet, ProjPoint};
use crate::curves::ExclusionPredicate;
use crate::error::{Error, Result};
use crate::forms::HypersurfaceSpec;
use crate::localheights::{
    arch_log_negated, max_abs_minor_i64, min_ord_over_minors_i64, proj_distance, DistanceValue,
    FAST_COORD_LIMIT,
};

/// All-pairs scans refuse to run past this many pairs without an override.
pub const PAIR_SCAN_CAP: u128 = 100_000_000;

/// Histogram geometry: exponents in [0, 1.5] at width 0.05.
const HIST_BINS: usize = 30;
const HIST_WIDTH: f64 = 0.05;

/// Caps applied to a scan before it starts.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScanLimits {
    /// Permit scans beyond [`PAIR_SCAN_CAP`] pairs.
    pub allow_large_scan: bool,
}

/// One scanned pair: indices into the scanned slice, the exact distance,
/// and the exponent `-ln dist / pair_height`.
#[derive(Debug, Clone)]
pub struct RepulsionRecord {
    pub p_index: usize,
    pub q_index: usize,
    pub place: Place,
    pub distance: DistanceValue,
    /// h(P) + h(Q), the log of the product of multiplicative heights.
    pub pair_height: f64,
    pub exponent: f64,
}

/// Exponent histogram over [0, 1.5] with explicit out-of-range counters
/// (archimedean distances above 1 produce slightly negative exponents).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExponentHistogram {
    pub bin_width_milli: u32,
    pub bins: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl ExponentHistogram {
    fn new() -> ExponentHistogram {
        ExponentHistogram {
            bin_width_milli: (HIST_WIDTH * 1000.0) as u32,
            bins: vec![0; HIST_BINS],
            underflow: 0,
            overflow: 0,
        }
    }

    fn add(&mut self, exponent: f64) {
        if exponent < 0.0 {
            self.underflow += 1;
        } else {
            let bin = (exponent / HIST_WIDTH) as usize;
            if bin < HIST_BINS {
                self.bins[bin] += 1;
            } else {
                self.overflow += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &ExponentHistogram) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum::<u64>() + self.underflow + self.overflow
    }
}

/// Aggregate of one scan: counts, the maximal exponent with every pair
/// achieving it, and the exponent histogram.
#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub place: Place,
    pub pairs_total: u64,
    pub pairs_included: u64,
    pub pairs_excluded: u64,
    pub pairs_below_min_height: u64,
    pub pairs_zero_height: u64,
    pub max_exponent: Option<f64>,
    pub argmax_pairs: Vec<(usize, usize)>,
    pub histogram: ExponentHistogram,
}

impl ScanSummary {
    fn new(place: Place) -> ScanSummary {
        ScanSummary {
            place,
            pairs_total: 0,
            pairs_included: 0,
            pairs_excluded: 0,
            pairs_below_min_height: 0,
            pairs_zero_height: 0,
            max_exponent: None,
            argmax_pairs: Vec::new(),
            histogram: ExponentHistogram::new(),
        }
    }

    fn observe(&mut self, i: usize, j: usize, exponent: f64) {
        self.pairs_included += 1;
        self.histogram.add(exponent);
        match self.max_exponent {
            Some(m) if exponent < m => {}
            Some(m) if exponent == m => self.argmax_pairs.push((i, j)),
            _ => {
                self.max_exponent = Some(exponent);
                self.argmax_pairs = vec![(i, j)];
            }
        }
    }

    /// Associative merge; argmax ties concatenate in argument order and are
    /// re-sorted, so the result is independent of the split.
    pub fn merge(mut self, other: ScanSummary) -> ScanSummary {
        debug_assert_eq!(self.place, other.place);
        self.pairs_total += other.pairs_total;
        self.pairs_included += other.pairs_included;
        self.pairs_excluded += other.pairs_excluded;
        self.pairs_below_min_height += other.pairs_below_min_height;
        self.pairs_zero_height += other.pairs_zero_height;
        self.histogram.merge(&other.histogram);
        match (self.max_exponent, other.max_exponent) {
            (None, _) => {
                self.max_exponent = other.max_exponent;
                self.argmax_pairs = other.argmax_pairs;
            }
            (Some(a), Some(b)) if b > a => {
                self.max_exponent = Some(b);
                self.argmax_pairs = other.argmax_pairs;
            }
            (Some(a), Some(b)) if b == a => {
                self.argmax_pairs.extend(other.argmax_pairs);
            }
            _ => {}
        }
        self.argmax_pairs.sort_unstable();
        self
    }
}

// ---------------------------------------------------------------------------
// Pair kernels (fast i64 views with a big-integer fallback)
// ---------------------------------------------------------------------------

enum Views {
    Fast(Vec<FastPt>),
    Slow,
}

struct FastPt {
    coords: Vec<i64>,
    height: i64,
}

fn build_views(points: &[ProjPoint]) -> Views {
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        match p.coords_i64() {
            Some(c) if c.iter().all(|&x| x.abs() <= FAST_COORD_LIMIT) => {
                let height = c.iter().map(|x| x.abs()).max().expect("nonempty");
                out.push(FastPt { coords: c, height });
            }
            _ => return Views::Slow,
        }
    }
    Views::Fast(out)
}

/// ln(H(P) * H(Q)) and whether the product is exactly 1.
fn pair_log_height(points: &[ProjPoint], views: &Views, i: usize, j: usize) -> (f64, bool) {
    match views {
        Views::Fast(v) => {
            let prod = v[i].height as i128 * v[j].height as i128;
            ((prod as f64).ln(), prod == 1)
        }
        Views::Slow => {
            let h = pair_height(&points[i], &points[j]);
            let one = h.multiplicative == BigRational::one();
            (h.logarithmic, one)
        }
    }
}

/// `-ln dist_v`; None when the points coincide (degenerate input).
fn dist_log_negated(
    points: &[ProjPoint],
    views: &Views,
    i: usize,
    j: usize,
    place: Place,
) -> Option<f64> {
    match views {
        Views::Fast(v) => match place {
            Place::Archimedean => {
                let m = max_abs_minor_i64(&v[i].coords, &v[j].coords);
                if m == 0 {
                    return None;
                }
                Some(arch_log_negated(
                    m,
                    v[i].height as i128 * v[j].height as i128,
                ))
            }
            Place::Finite(p) => {
                let ord = min_ord_over_minors_i64(&v[i].coords, &v[j].coords, p.get())?;
                Some(ord as f64 * (p.get() as f64).ln())
            }
        },
        Views::Slow => {
            let d = proj_distance(&points[i], &points[j], place).expect("equal dims");
            if d.exact == BigRational::from_integer(BigInt::from(0)) {
                None
            } else {
                Some(d.log_negated)
            }
        }
    }
}

fn dist_value(
    points: &[ProjPoint],
    views: &Views,
    i: usize,
    j: usize,
    place: Place,
) -> DistanceValue {
    match views {
        Views::Fast(v) => match place {
            Place::Archimedean => {
                let m = max_abs_minor_i64(&v[i].coords, &v[j].coords);
                let hprod = v[i].height as i128 * v[j].height as i128;
                if m == 0 {
                    proj_distance(&points[i], &points[j], place).expect("equal dims")
                } else {
                    DistanceValue {
                        exact: BigRational::new(BigInt::from(m), BigInt::from(hprod)),
                        log_negated: arch_log_negated(m, hprod),
                    }
                }
            }
            Place::Finite(p) => {
                match min_ord_over_minors_i64(&v[i].coords, &v[j].coords, p.get()) {
                    Some(ord) => DistanceValue {
                        exact: BigRational::new(
                            BigInt::one(),
                            BigInt::from(p.get()).pow(ord),
                        ),
                        log_negated: ord as f64 * (p.get() as f64).ln(),
                    },
                    None => proj_distance(&points[i], &points[j], place).expect("equal dims"),
                }
            }
        },
        Views::Slow => proj_distance(&points[i], &points[j], place).expect("equal dims"),
    }
}

fn check_pair_cap(n: usize, limits: ScanLimits) -> Result<u128> {
    let pairs = n as u128 * (n as u128).saturating_sub(1) / 2;
    if pairs > PAIR_SCAN_CAP && !limits.allow_large_scan {
        return Err(Error::ScanTooLarge {
            pairs,
            cap: PAIR_SCAN_CAP,
        });
    }
    Ok(pairs)
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// The repulsion record of a single pair from a point slice.
///
/// Errors with `EqualPoints` for a degenerate pair and `ZeroPairHeight`
/// when both points have multiplicative height 1 (the exponent is
/// undefined there; callers drop such pairs).
pub fn repulsion_exponent(
    points: &[ProjPoint],
    p_index: usize,
    q_index: usize,
    place: Place,
) -> Result<RepulsionRecord> {
    let p = &points[p_index];
    let q = &points[q_index];
    if p == q {
        return Err(Error::EqualPoints);
    }
    let h = pair_height(p, q);
    if h.multiplicative == BigRational::one() {
        return Err(Error::ZeroPairHeight);
    }
    let distance = proj_distance(p, q, place)?;
    let exponent = distance.log_negated / h.logarithmic;
    Ok(RepulsionRecord {
        p_index,
        q_index,
        place,
        distance,
        pair_height: h.logarithmic,
        exponent,
    })
}

/// Stream every record of an all-pairs scan to `visitor` in (i, j) order
/// and return the summary. Pairs touching an excluded point, degenerate
/// pairs, and pairs with `pair_height < min_pair_height` are skipped (and
/// counted).
pub fn pair_scan_with(
    points: &[ProjPoint],
    place: Place,
    exclusion: &ExclusionPredicate,
    min_pair_height: f64,
    limits: ScanLimits,
    mut visitor: impl FnMut(&RepulsionRecord),
) -> Result<ScanSummary> {
    let pairs = check_pair_cap(points.len(), limits)?;
    let views = build_views(points);
    let excluded: Vec<bool> = points.iter().map(|p| exclusion.is_excluded(p)).collect();

    let mut summary = ScanSummary::new(place);
    summary.pairs_total = pairs as u64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if excluded[i] || excluded[j] {
                summary.pairs_excluded += 1;
                continue;
            }
            let (pair_h, height_one) = pair_log_height(points, &views, i, j);
            if height_one {
                summary.pairs_zero_height += 1;
                continue;
            }
            if pair_h < min_pair_height {
                summary.pairs_below_min_height += 1;
                continue;
            }
            let Some(log_neg) = dist_log_negated(points, &views, i, j, place) else {
                // duplicate points in the input; contract says deduplicated
                summary.pairs_zero_height += 1;
                continue;
            };
            let exponent = log_neg / pair_h;
            summary.observe(i, j, exponent);
            let record = RepulsionRecord {
                p_index: i,
                q_index: j,
                place,
                distance: dist_value(points, &views, i, j, place),
                pair_height: pair_h,
                exponent,
            };
            visitor(&record);
        }
    }
    summary.argmax_pairs.sort_unstable();
    Ok(summary)
}

/// Collecting form of [`pair_scan_with`].
pub fn pair_scan(
    points: &[ProjPoint],
    place: Place,
    exclusion: &ExclusionPredicate,
    min_pair_height: f64,
    limits: ScanLimits,
) -> Result<(Vec<RepulsionRecord>, ScanSummary)> {
    let mut records = Vec::new();
    let summary = pair_scan_with(points, place, exclusion, min_pair_height, limits, |r| {
        records.push(r.clone())
    })?;
    Ok((records, summary))
}

/// One row of the repulsion trend table: the maximal exponent among pairs
/// at least `min_pair_height` tall.
#[derive(Debug, Clone, Serialize)]
pub struct TrendRow {
    pub min_pair_height: f64,
    pub pairs: u64,
    pub max_exponent: Option<f64>,
}

/// Maximal pair exponent above each height threshold, in one pass.
pub fn trend_max_exponents(
    points: &[ProjPoint],
    place: Place,
    exclusion: &ExclusionPredicate,
    thresholds: &[f64],
    limits: ScanLimits,
) -> Result<Vec<TrendRow>> {
    check_pair_cap(points.len(), limits)?;
    let views = build_views(points);
    let excluded: Vec<bool> = points.iter().map(|p| exclusion.is_excluded(p)).collect();
    let mut rows: Vec<TrendRow> = thresholds
        .iter()
        .map(|&t| TrendRow {
            min_pair_height: t,
            pairs: 0,
            max_exponent: None,
        })
        .collect();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if excluded[i] || excluded[j] {
                continue;
            }
            let (pair_h, height_one) = pair_log_height(points, &views, i, j);
            if height_one {
                continue;
            }
            let Some(log_neg) = dist_log_negated(points, &views, i, j, place) else {
                continue;
            };
            let exponent = log_neg / pair_h;
            for row in rows.iter_mut() {
                if pair_h >= row.min_pair_height {
                    row.pairs += 1;
                    if row.max_exponent.map_or(true, |m| exponent > m) {
                        row.max_exponent = Some(exponent);
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// The minimal constant and its witnesses for a diagonal Vojta gap test.
#[derive(Debug, Clone, Serialize)]
pub struct VojtaReport {
    pub epsilon: f64,
    pub places: PlaceSet,
    /// max over included pairs of
    /// `m_S(P,Q) + canonical_coefficient*pair_h - epsilon*pair_h`.
    pub constant: f64,
    /// Every pair achieving the constant (all ties, ascending).
    pub argmax_pairs: Vec<(usize, usize)>,
    pub excluded_count: u64,
    pub included_pairs: u64,
    pub canonical_coefficient: i64,
}

/// Evaluate the diagonal gap statistic over all included distinct pairs:
/// the proximity to the diagonal over S, plus the canonical term
/// `(d - n - 1) * pair_h`, minus `epsilon * pair_h`. Returns the maximal
/// value (the empirical additive constant), with every pair attaining it.
pub fn vojta_gap_check(
    points: &[ProjPoint],
    spec: &HypersurfaceSpec,
    epsilon: f64,
    places: &PlaceSet,
    exclusion: &ExclusionPredicate,
    limits: ScanLimits,
) -> Result<VojtaReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig("epsilon must be positive".into()));
    }
    check_pair_cap(points.len(), limits)?;
    let views = build_views(points);
    let excluded: Vec<bool> = points.iter().map(|p| exclusion.is_excluded(p)).collect();
    let kappa = spec.canonical_coefficient() as f64;

    let gap = |i: usize, j: usize| -> Option<f64> {
        let (pair_h, _) = pair_log_height(points, &views, i, j);
        let mut m = 0.0;
        for &v in places {
            m += dist_log_negated(points, &views, i, j, v)?;
        }
        Some(m + (kappa - epsilon) * pair_h)
    };

    let mut constant: Option<f64> = None;
    let mut argmax: Vec<(usize, usize)> = Vec::new();
    let mut excluded_count = 0u64;
    let mut included = 0u64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if excluded[i] || excluded[j] {
                excluded_count += 1;
                continue;
            }
            let Some(term) = gap(i, j) else { continue };
            included += 1;
            match constant {
                Some(c) if term < c => {}
                Some(c) if term == c => argmax.push((i, j)),
                _ => {
                    constant = Some(term);
                    argmax = vec![(i, j)];
                }
            }
        }
    }
    let Some(constant) = constant else {
        return Err(Error::NoPairs);
    };

    // Re-verify on emit: no included pair may exceed the reported constant.
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if excluded[i] || excluded[j] {
                continue;
            }
            if let Some(term) = gap(i, j) {
                assert!(
                    term <= constant,
                    "gap constant violated by pair ({i},{j}): {term} > {constant}"
                );
            }
        }
    }

    Ok(VojtaReport {
        epsilon,
        places: places.clone(),
        constant,
        argmax_pairs: argmax,
        excluded_count,
        included_pairs: included,
        canonical_coefficient: spec.canonical_coefficient(),
    })
}
