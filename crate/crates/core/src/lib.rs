//! Exact-arithmetic toolkit for rational points on hypersurfaces over the
//! rationals.
//!
//! The crate enumerates all rational points of bounded height on an integral
//! hypersurface, computes Weil heights and place-local distance/proximity
//! functionals exactly, detects rational lines through the resulting point
//! sets, and runs all-pairs "repulsion" scans that measure how close two
//! rational points can be relative to their heights.
//!
//! Everything upstream of the report layer is exact: points are primitive
//! integer tuples, distances are rationals, and local heights are logarithms
//! of explicitly known rationals. Floating point enters only when a log is
//! taken, and every emitted float is a deterministic function of the inputs
//! (independent of thread or partition count).

pub mod arith;
pub mod curves;
pub mod error;
pub mod forms;
pub mod localheights;
mod primes;
pub mod repulsion;
pub mod search;
pub mod verify;

pub use arith::{abs_v, pair_height, weil_height, HeightValue, Place, PlaceSet, Prime, ProjPoint};
pub use curves::{
    detect_lines, line_on_surface, pluecker_of_pair, points_on_line, DetectedLine,
    ExclusionPredicate, RationalLine,
};
pub use error::{Error, Result};
pub use forms::{HypersurfaceSpec, Term};
pub use localheights::{
    local_height_hypersurface, proj_distance, proximity, proximity_to_diagonal,
    proximity_to_divisor, DistanceValue, Divisor, ProximityInput,
};
pub use repulsion::{
    pair_scan, pair_scan_with, repulsion_exponent, trend_max_exponents, vojta_gap_check,
    ExponentHistogram, RepulsionRecord, ScanLimits, ScanSummary, TrendRow, VojtaReport,
    PAIR_SCAN_CAP,
};
pub use search::{
    count_function, default_sieve_primes, enumerate_points, enumerate_points_into,
    fit_growth_exponent, CountSample, CountSeries, SearchConfig,
};
pub use verify::{run_checks, CheckOutcome, VerifyParams};
