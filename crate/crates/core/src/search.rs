//! Enumeration of all rational points of bounded height on a hypersurface,
//! counting functions with exclusions, and growth-exponent fitting.
//!
//! The enumerator walks sign-canonical primitive coordinate tuples over the
//! box `[-B, B]^(n+1)` and prunes with residue sieves: for each sieve prime
//! p it precomputes which last-coordinate residues can complete a prefix to
//! a root of F mod p, stores them as periodic bitmasks, and rejects 64
//! candidates per AND. Survivors are confirmed by an exact evaluation, so
//! the sieve is a pure accelerator: output is identical with sieving
//! disabled, and identical under any partition count.
//!
//! Points stream to sorted spill files once an in-memory cap is exceeded;
//! the merged stream is globally sorted because partitions split the
//! leading coordinate range in order.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Seek, Write};

use crate::arith::ProjPoint;
use crate::curves::ExclusionPredicate;
use crate::error::{Error, Result};
use crate::forms::{coefficients_mod_p, evaluate_mod_p, HypersurfaceSpec};
use crate::primes::{is_prime_u64, small_primes, SIEVE_PRIME_LIMIT};

/// Hard cap on the box height; beyond this the box walk is hopeless anyway.
pub const MAX_BOX_HEIGHT: u64 = 1 << 17;

/// Default cap on points held in memory before spilling to disk.
pub const DEFAULT_MEMORY_CAP: usize = 4_000_000;

/// Sieve table primes must keep their masks in a u64 and their tables small.
const TABLE_PRIME_LIMIT: u64 = 61;
const TABLE_ENTRY_LIMIT: u64 = 1 << 22;
const TABLE_BUILD_LIMIT: u64 = 1 << 24;

/// Parameters of one enumeration run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Enumerate points with multiplicative height <= this bound.
    pub height_bound: u64,
    /// Primes used for residue pruning; empty disables the sieve.
    pub sieve_primes: Vec<u64>,
    /// Number of leading-coordinate partitions; output is identical for
    /// any value (determinism contract), this only shapes the work split.
    pub thread_partitions: usize,
    /// Real dimension of the variety, carried into reports that rescale
    /// exponents by dimension.
    pub real_dimension: u32,
    /// Spill to disk once this many points are buffered in memory.
    pub memory_cap_points: usize,
}

impl SearchConfig {
    /// Defaults for a given surface: derived sieve primes, one partition,
    /// real dimension of the hypersurface.
    pub fn for_spec(spec: &HypersurfaceSpec, height_bound: u64) -> SearchConfig {
        SearchConfig {
            height_bound,
            sieve_primes: default_sieve_primes(spec),
            thread_partitions: 1,
            real_dimension: spec.ambient_dim().saturating_sub(1) as u32,
            memory_cap_points: DEFAULT_MEMORY_CAP,
        }
    }

    /// Same bounds, no sieve: the naive scan used as the sieve's oracle.
    pub fn without_sieve(mut self) -> SearchConfig {
        self.sieve_primes.clear();
        self
    }

    pub fn with_partitions(mut self, partitions: usize) -> SearchConfig {
        self.thread_partitions = partitions;
        self
    }
}

/// The first six primes not dividing the gcd of the form's pure-power
/// coefficients.
pub fn default_sieve_primes(spec: &HypersurfaceSpec) -> Vec<u64> {
    let mut content = BigInt::zero();
    for c in spec.leading_coefficients() {
        content = num_integer::Integer::gcd(&content, &c);
    }
    let content = if content.is_zero() {
        BigInt::from(1)
    } else {
        content
    };
    small_primes()
        .iter()
        .copied()
        .filter(|&p| !(&content % BigInt::from(p)).is_zero())
        .take(6)
        .collect()
}

/// Enumerate every canonical point on the hypersurface with height at most
/// `cfg.height_bound`, in lexicographic coordinate order.
pub fn enumerate_points(spec: &HypersurfaceSpec, cfg: &SearchConfig) -> Result<Vec<ProjPoint>> {
    let mut out = Vec::new();
    enumerate_points_into(spec, cfg, |p| out.push(p))?;
    debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
    Ok(out)
}

/// Streaming form of [`enumerate_points`]: points arrive in lexicographic
/// order without requiring the whole set in memory. Returns the count.
pub fn enumerate_points_into(
    spec: &HypersurfaceSpec,
    cfg: &SearchConfig,
    mut emit: impl FnMut(ProjPoint),
) -> Result<u64> {
    validate(spec, cfg)?;
    let shared = Shared::build(spec, cfg)?;
    let b = cfg.height_bound as i64;
    let chunks = partition_ranges(b, cfg.thread_partitions);
    let cap = (cfg.memory_cap_points / cfg.thread_partitions.max(1)).max(64);

    let mut worker_outputs: Vec<Result<Vec<Batch>>> = Vec::new();
    if chunks.len() == 1 {
        worker_outputs.push(run_chunk(&shared, chunks[0], cap));
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|&chunk| {
                    let shared = &shared;
                    scope.spawn(move || run_chunk(shared, chunk, cap))
                })
                .collect();
            for h in handles {
                worker_outputs.push(h.join().expect("enumeration worker panicked"));
            }
        });
    }

    let mut total = 0u64;
    for out in worker_outputs {
        for batch in out? {
            match batch {
                Batch::Mem(points) => {
                    for p in points {
                        emit(p);
                        total += 1;
                    }
                }
                Batch::Spill(file, count) => {
                    let mut reader = BufReader::new(file);
                    reader.rewind()?;
                    for line in reader.lines() {
                        let line = line?;
                        let coords: Vec<BigInt> = line
                            .split(' ')
                            .map(|s| s.parse::<BigInt>().expect("spill file is well formed"))
                            .collect();
                        emit(ProjPoint::from_canonical_coords(coords));
                    }
                    total += count;
                }
            }
        }
    }
    Ok(total)
}

fn validate(spec: &HypersurfaceSpec, cfg: &SearchConfig) -> Result<()> {
    if cfg.height_bound < 1 {
        return Err(Error::InvalidConfig("height bound must be >= 1".into()));
    }
    if cfg.height_bound > MAX_BOX_HEIGHT {
        return Err(Error::InvalidConfig(format!(
            "height bound {} exceeds the box enumeration limit {MAX_BOX_HEIGHT}",
            cfg.height_bound
        )));
    }
    if cfg.thread_partitions < 1 {
        return Err(Error::InvalidConfig("thread_partitions must be >= 1".into()));
    }
    for (i, &p) in cfg.sieve_primes.iter().enumerate() {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        if p > SIEVE_PRIME_LIMIT {
            return Err(Error::InvalidConfig(format!(
                "sieve prime {p} exceeds the limit {SIEVE_PRIME_LIMIT}"
            )));
        }
        if cfg.sieve_primes[..i].contains(&p) {
            return Err(Error::InvalidConfig(format!("duplicate sieve prime {p}")));
        }
    }
    let _ = spec;
    Ok(())
}

fn partition_ranges(b: i64, partitions: usize) -> Vec<(i64, i64)> {
    // The leading coordinate of a canonical tuple is always in [0, B].
    let total = b + 1;
    let k = partitions.max(1) as i64;
    let size = (total + k - 1) / k;
    let mut out = Vec::new();
    let mut lo = 0i64;
    while lo <= b {
        let hi = (lo + size - 1).min(b);
        out.push((lo, hi));
        lo = hi + 1;
    }
    out
}

// ---------------------------------------------------------------------------
// Shared read-only state
// ---------------------------------------------------------------------------

enum EvalPath {
    /// All intermediate values provably fit i128.
    I128 { pows: Vec<Vec<i128>> },
    /// Arbitrary-precision fallback for forms with huge coefficients.
    Big { pows: Vec<Vec<BigInt>> },
}

struct TablePrime {
    p: u64,
    /// Indexed by the prefix residue tuple; each entry is the feasible-set
    /// bitmask for the last coordinate, pre-replicated cyclically into 128
    /// bits so any 64-bit window can be taken with one shift.
    expanded: Vec<u128>,
}

struct LargePrime {
    p: u64,
    coeffs_mod: Vec<u64>,
}

struct Shared<'a> {
    spec: &'a HypersurfaceSpec,
    b: i64,
    width: usize,
    eval: EvalPath,
    tables: Vec<TablePrime>,
    large: Vec<LargePrime>,
}

impl<'a> Shared<'a> {
    fn build(spec: &'a HypersurfaceSpec, cfg: &SearchConfig) -> Result<Shared<'a>> {
        let b = cfg.height_bound as i64;
        let width = spec.ambient_dim() + 1;
        let degree = spec.degree();

        let bound = spec.max_abs_value_bound(cfg.height_bound);
        let eval = if bound <= BigInt::from(i128::MAX >> 2) {
            let mut pows = Vec::with_capacity((2 * b + 1) as usize);
            for v in -b..=b {
                let mut row = Vec::with_capacity(degree as usize + 1);
                let mut acc: i128 = 1;
                for _ in 0..=degree {
                    row.push(acc);
                    acc = acc.saturating_mul(v as i128);
                }
                pows.push(row);
            }
            EvalPath::I128 { pows }
        } else {
            if cfg.height_bound > (1 << 14) {
                return Err(Error::InvalidConfig(
                    "coefficients too large for box enumeration at this height bound".into(),
                ));
            }
            let mut pows = Vec::with_capacity((2 * b + 1) as usize);
            for v in -b..=b {
                let big = BigInt::from(v);
                let row: Vec<BigInt> = (0..=degree).map(|e| big.pow(e)).collect();
                pows.push(row);
            }
            EvalPath::Big { pows }
        };

        let mut tables = Vec::new();
        let mut large = Vec::new();
        for &p in &cfg.sieve_primes {
            let entries = (p as u128).pow(width as u32 - 1);
            let builds = (p as u128).pow(width as u32);
            if p <= TABLE_PRIME_LIMIT
                && entries <= TABLE_ENTRY_LIMIT as u128
                && builds <= TABLE_BUILD_LIMIT as u128
            {
                tables.push(build_table(spec, p, width));
            } else {
                large.push(LargePrime {
                    p,
                    coeffs_mod: coefficients_mod_p(spec, p),
                });
            }
        }

        Ok(Shared {
            spec,
            b,
            width,
            eval,
            tables,
            large,
        })
    }
}

fn build_table(spec: &HypersurfaceSpec, p: u64, width: usize) -> TablePrime {
    let degree = spec.degree() as usize;
    // powtab[r][e] = r^e mod p
    let mut powtab = vec![vec![0u64; degree + 1]; p as usize];
    for r in 0..p {
        let mut acc = 1u64 % p;
        for e in 0..=degree {
            powtab[r as usize][e] = acc;
            acc = acc * r % p;
        }
    }
    let coeffs: Vec<u64> = coefficients_mod_p(spec, p)
        .into_iter()
        .map(|c| c % p)
        .collect();
    let exps: Vec<&[u32]> = spec.terms().iter().map(|t| t.exponents()).collect();

    let entries = (p as u64).pow(width as u32 - 1) as usize;
    let mut expanded = vec![0u128; entries];
    let mut prefix = vec![0u64; width - 1];
    for idx in 0..entries {
        // decode prefix residues (most significant digit first)
        let mut rem = idx;
        for d in (0..width - 1).rev() {
            prefix[d] = (rem % p as usize) as u64;
            rem /= p as usize;
        }
        let mut mask: u64 = 0;
        for r_last in 0..p {
            let mut acc: u64 = 0;
            for (t, &c) in exps.iter().zip(&coeffs) {
                if c == 0 {
                    continue;
                }
                let mut prod = c;
                for (d, &e) in t.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    let r = if d == width - 1 {
                        r_last
                    } else {
                        prefix[d]
                    };
                    prod = prod * powtab[r as usize][e as usize] % p;
                }
                acc = (acc + prod) % p;
            }
            if acc == 0 {
                mask |= 1u64 << r_last;
            }
        }
        // replicate the p-bit pattern cyclically into 128 bits
        let mut ext = mask as u128;
        let mut len = p as u32;
        while len < 128 {
            ext |= ext << len;
            len *= 2;
        }
        expanded[idx] = ext;
    }
    TablePrime { p, expanded }
}

// ---------------------------------------------------------------------------
// The walk
// ---------------------------------------------------------------------------

enum Batch {
    Mem(Vec<ProjPoint>),
    Spill(File, u64),
}

struct Sink {
    buf: Vec<ProjPoint>,
    cap: usize,
    batches: Vec<Batch>,
}

impl Sink {
    fn push(&mut self, point: ProjPoint) -> Result<()> {
        self.buf.push(point);
        if self.buf.len() >= self.cap {
            self.spill()?;
        }
        Ok(())
    }

    fn spill(&mut self) -> Result<()> {
        let file = tempfile::tempfile()?;
        let mut w = BufWriter::new(file);
        for p in &self.buf {
            let mut first = true;
            for c in p.coords() {
                if !first {
                    write!(w, " ")?;
                }
                write!(w, "{c}")?;
                first = false;
            }
            writeln!(w)?;
        }
        let file = w.into_inner().map_err(|e| e.into_error())?;
        self.batches.push(Batch::Spill(file, self.buf.len() as u64));
        self.buf.clear();
        Ok(())
    }

    fn finish(mut self) -> Result<Vec<Batch>> {
        if !self.buf.is_empty() {
            self.batches.push(Batch::Mem(std::mem::take(&mut self.buf)));
        }
        Ok(self.batches)
    }
}

fn run_chunk(shared: &Shared, chunk: (i64, i64), cap: usize) -> Result<Vec<Batch>> {
    let width = shared.width;
    let terms = shared.spec.terms().len();
    let mut walker = Walker {
        shared,
        coords: vec![0i64; width],
        idx_stack: vec![vec![0u32; shared.tables.len()]; width + 1],
        partial_i128: vec![vec![0i128; terms]; width + 1],
        partial_big: Vec::new(),
        sink: Sink {
            buf: Vec::new(),
            cap,
            batches: Vec::new(),
        },
    };
    match &shared.eval {
        EvalPath::I128 { .. } => {
            for (t, term) in shared.spec.terms().iter().enumerate() {
                walker.partial_i128[0][t] = term
                    .coefficient()
                    .to_i128()
                    .expect("coefficient fits i128 on this path");
            }
        }
        EvalPath::Big { .. } => {
            walker.partial_big = vec![vec![BigInt::zero(); terms]; width + 1];
            for (t, term) in shared.spec.terms().iter().enumerate() {
                walker.partial_big[0][t] = term.coefficient().clone();
            }
        }
    }

    let (lo, hi) = chunk;
    for x0 in lo..=hi {
        walker.enter(0, x0)?;
    }
    walker.sink.finish()
}

struct Walker<'a, 'b> {
    shared: &'a Shared<'b>,
    coords: Vec<i64>,
    /// idx_stack[depth][k]: sieve-table prefix index after `depth` coords.
    idx_stack: Vec<Vec<u32>>,
    /// partial_*[depth][t]: product of coefficient and the powers of the
    /// first `depth` coordinates for term t.
    partial_i128: Vec<Vec<i128>>,
    partial_big: Vec<Vec<BigInt>>,
    sink: Sink,
}

impl Walker<'_, '_> {
    /// Fix coordinate `depth` to `x` and recurse.
    fn enter(&mut self, depth: usize, x: i64) -> Result<()> {
        let width = self.shared.width;
        debug_assert!(depth < width - 1);
        self.coords[depth] = x;

        for (k, table) in self.shared.tables.iter().enumerate() {
            let r = x.rem_euclid(table.p as i64) as u32;
            self.idx_stack[depth + 1][k] = self.idx_stack[depth][k] * table.p as u32 + r;
        }
        let b = self.shared.b;
        match &self.shared.eval {
            EvalPath::I128 { pows } => {
                let row = &pows[(x + b) as usize];
                for (t, term) in self.shared.spec.terms().iter().enumerate() {
                    let e = term.exponents()[depth] as usize;
                    self.partial_i128[depth + 1][t] = self.partial_i128[depth][t] * row[e];
                }
            }
            EvalPath::Big { pows } => {
                let row = &pows[(x + b) as usize];
                for (t, term) in self.shared.spec.terms().iter().enumerate() {
                    let e = term.exponents()[depth] as usize;
                    self.partial_big[depth + 1][t] = &self.partial_big[depth][t] * &row[e];
                }
            }
        }

        // locked: a positive coordinate has appeared, so the remaining ones
        // range over the full box. g: gcd of the prefix (0 while all zero).
        let locked = self.coords[..=depth].iter().any(|&c| c != 0);
        let g = self.coords[..=depth]
            .iter()
            .fold(0u64, |g, &c| gcd_u64(g, c.unsigned_abs()));

        if depth + 2 == width {
            self.leaf_row(locked, g)
        } else if locked {
            for x_next in -b..=b {
                self.enter(depth + 1, x_next)?;
            }
            Ok(())
        } else {
            for x_next in 0..=b {
                self.enter(depth + 1, x_next)?;
            }
            Ok(())
        }
    }

    /// Scan the last coordinate in 64-wide blocks ANDing per-prime masks.
    fn leaf_row(&mut self, locked: bool, g: u64) -> Result<()> {
        let b = self.shared.b;
        let depth = self.shared.width - 1;
        let (lo, hi) = if locked { (-b, b) } else { (1, b) };

        // (periodic expansion, current window phase, prime)
        let mut ctx: Vec<(u128, u64, u64)> = Vec::with_capacity(self.shared.tables.len());
        for (k, table) in self.shared.tables.iter().enumerate() {
            let ext = table.expanded[self.idx_stack[depth][k] as usize];
            if ext == 0 {
                return Ok(()); // no residue can complete this prefix
            }
            ctx.push((ext, lo.rem_euclid(table.p as i64) as u64, table.p));
        }

        let len = (hi - lo + 1) as u64;
        let nblocks = (len + 63) / 64;
        for blk in 0..nblocks {
            let start = lo + (blk * 64) as i64;
            let nbits = (len - blk * 64).min(64);
            let mut word: u64 = if nbits == 64 { !0 } else { (1u64 << nbits) - 1 };
            for c in ctx.iter_mut() {
                word &= (c.0 >> c.1) as u64;
                c.1 = (c.1 + 64) % c.2;
            }
            while word != 0 {
                let bit = word.trailing_zeros();
                word &= word - 1;
                self.candidate(start + bit as i64, g)?;
            }
        }
        Ok(())
    }

    /// Sieve survivor: confirm with exact arithmetic, check primitivity,
    /// and emit.
    fn candidate(&mut self, t: i64, g: u64) -> Result<()> {
        let depth = self.shared.width - 1;
        let b = self.shared.b;
        let is_zero = match &self.shared.eval {
            EvalPath::I128 { pows } => {
                let row = &pows[(t + b) as usize];
                let mut acc: i128 = 0;
                for (k, term) in self.shared.spec.terms().iter().enumerate() {
                    acc += self.partial_i128[depth][k] * row[term.exponents()[depth] as usize];
                }
                acc == 0
            }
            EvalPath::Big { pows } => {
                // Large-prime residue pre-filter, then exact evaluation.
                for lp in &self.shared.large {
                    self.coords[depth] = t;
                    let residues: Vec<u64> = self.coords
                        [..self.shared.width]
                        .iter()
                        .map(|&c| c.rem_euclid(lp.p as i64) as u64)
                        .collect();
                    if evaluate_mod_p(&lp.coeffs_mod, self.shared.spec.terms(), &residues, lp.p)
                        != 0
                    {
                        return Ok(());
                    }
                }
                let row = &pows[(t + b) as usize];
                let mut acc = BigInt::zero();
                for (k, term) in self.shared.spec.terms().iter().enumerate() {
                    acc += &self.partial_big[depth][k] * &row[term.exponents()[depth] as usize];
                }
                acc.is_zero()
            }
        };
        if !is_zero {
            return Ok(());
        }
        // Large primes in the i128 path were only ever a pre-filter; the
        // exact zero already implies every residue condition.
        let primitive = if g == 0 {
            t == 1
        } else {
            gcd_u64(g, t.unsigned_abs()) == 1
        };
        if !primitive {
            return Ok(());
        }
        self.coords[depth] = t;
        let coords: Vec<BigInt> = self.coords[..self.shared.width]
            .iter()
            .map(|&c| BigInt::from(c))
            .collect();
        self.sink.push(ProjPoint::from_canonical_coords(coords))
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

/// One sample of a counting function: how many points have height <= bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSample {
    pub bound: u64,
    pub count: u64,
}

/// A counting function sampled at strictly increasing bounds; counts are
/// nondecreasing because larger boxes contain smaller ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountSeries {
    samples: Vec<CountSample>,
}

impl CountSeries {
    pub fn new(samples: Vec<CountSample>) -> Result<CountSeries> {
        for w in samples.windows(2) {
            if w[0].bound >= w[1].bound {
                return Err(Error::UnsortedBounds);
            }
            if w[0].count > w[1].count {
                return Err(Error::InvalidConfig(
                    "counts must be nondecreasing in the bound".into(),
                ));
            }
        }
        Ok(CountSeries { samples })
    }

    pub fn samples(&self) -> &[CountSample] {
        &self.samples
    }
}

/// Count, for each bound, the points of height <= bound that the exclusion
/// predicate keeps. Bounds must be strictly increasing.
pub fn count_function(
    points: &[ProjPoint],
    exclusion: &ExclusionPredicate,
    bounds: &[u64],
) -> Result<CountSeries> {
    for w in bounds.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::UnsortedBounds);
        }
    }
    let mut per_bucket = vec![0u64; bounds.len()];
    for p in points {
        if exclusion.is_excluded(p) {
            continue;
        }
        let h = p.max_abs_coord();
        let Some(h) = h.to_u64() else { continue };
        // first bound that admits this point
        match bounds.iter().position(|&b| h <= b) {
            Some(idx) => per_bucket[idx] += 1,
            None => continue,
        }
    }
    let mut acc = 0u64;
    let samples = bounds
        .iter()
        .zip(&per_bucket)
        .map(|(&bound, &c)| {
            acc += c;
            CountSample { bound, count: acc }
        })
        .collect();
    CountSeries::new(samples)
}

/// Least-squares slope of ln(count) against ln(bound), dropping zero-count
/// samples. Needs at least two positive samples.
pub fn fit_growth_exponent(series: &CountSeries) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series
        .samples
        .iter()
        .filter(|s| s.count >= 1)
        .map(|s| ((s.bound as f64).ln(), (s.count as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData);
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in pts {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData);
    }
    Ok(sxy / sxx)
}
