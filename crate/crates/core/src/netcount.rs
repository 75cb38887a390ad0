//! Exact counts of digital-net points in anchored boxes.
//!
//! Point `i < 2^m` of a base-2 digital net lies in the elementary interval
//! `E(k, c)` exactly when the first `k_j` rows of generating matrix `j`
//! map the digits of `i` to the leading `k_j` digits of `c_j / 2^k_j`. The
//! number of such `i` is the number of solutions of a linear system over
//! GF(2), `0` or `2^(m - rank)`. An anchored box `[0, a)^d` splits into a
//! product of one-dimensional intervals, one per set bit of `a`, so the box
//! count is a sum of such solution counts.

use std::fmt;
use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

pub use crate::gf2::BitMatrix;
use crate::error::{Error, Result};
use crate::gf2::{Echelon, MAX_COLS};
use crate::sequences::{DyadicRational, ElementaryInterval, GeneratorSet};

/// `C i = a` over GF(2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystemGF2 {
    pub matrix: BitMatrix,
    pub target: Vec<bool>,
}

impl LinearSystemGF2 {
    pub fn new(matrix: BitMatrix, target: Vec<bool>) -> Result<Self> {
        if matrix.n_rows() != target.len() {
            return Err(Error::DimensionMismatch {
                expected: matrix.n_rows(),
                actual: target.len(),
            });
        }
        Ok(LinearSystemGF2 { matrix, target })
    }

    /// The system with no equations in `m` unknowns.
    pub fn empty(m: u32) -> Result<Self> {
        Ok(LinearSystemGF2 {
            matrix: BitMatrix::zeros(0, m)?,
            target: Vec::new(),
        })
    }
}

/// Number of solutions in `{0,1}^m`.
pub fn solve_count(system: &LinearSystemGF2, m: u32) -> Result<BigUint> {
    if system.matrix.n_cols() != m {
        return Err(Error::DimensionMismatch {
            expected: m as usize,
            actual: system.matrix.n_cols() as usize,
        });
    }
    let mut ech = Echelon::new();
    for (&row, &rhs) in system.matrix.rows().iter().zip(&system.target) {
        ech.insert(row, rhs);
        if !ech.is_consistent() {
            return Ok(BigUint::zero());
        }
    }
    Ok(BigUint::one() << (m - ech.rank()) as usize)
}

/// `[0, a)` as disjoint dyadic intervals, one per set bit of `a`, left to
/// right: the interval for digit `k` is `[c/2^k, (c+1)/2^k)` with `c` the
/// first `k - 1` digits followed by a zero.
pub fn dyadic_box_decomposition(a: &DyadicRational) -> Vec<ElementaryInterval> {
    let a = a.reduced();
    (1..=a.log2_denominator())
        .filter(|&k| a.digit(k))
        .map(|k| {
            ElementaryInterval::dyadic(vec![k], vec![a.cell_index(k) - 1]).expect("valid interval")
        })
        .collect()
}

/// `floor(2^m alpha) / 2^m`.
pub fn truncate(alpha: &BigRational, m: u32) -> Result<DyadicRational> {
    if m == 0 || m > MAX_COLS {
        return Err(Error::Precision {
            requested: m,
            max: MAX_COLS,
        });
    }
    if alpha.is_negative() || *alpha >= BigRational::one() {
        return Err(Error::InvalidArgument(format!("{alpha} is not in [0, 1)")));
    }
    let scaled = (alpha * BigRational::from_integer(BigInt::one() << m as usize)).floor();
    let numerator = scaled.to_integer().to_u128().expect("below 2^m");
    DyadicRational::new(numerator, m)
}

/// `a_m = floor(2^m 2/3) / 2^m`.
pub fn truncate_alpha(m: u32) -> Result<DyadicRational> {
    truncate(&two_thirds(), m)
}

fn two_thirds() -> BigRational {
    BigRational::new(2.into(), 3.into())
}

/// Leading rows of each generating matrix with the matching digits of `c`.
pub fn assemble_system(
    gens: &GeneratorSet,
    interval: &ElementaryInterval,
) -> Result<LinearSystemGF2> {
    if interval.base() != 2 {
        return Err(Error::InvalidBase(interval.base()));
    }
    if interval.dim() != gens.dim() {
        return Err(Error::DimensionMismatch {
            expected: gens.dim(),
            actual: interval.dim(),
        });
    }
    let m = gens.precision();
    let mut matrix = BitMatrix::zeros(0, m)?;
    let mut target = Vec::new();
    for (j, (&k, &c)) in interval.k().iter().zip(interval.c()).enumerate() {
        if k > m {
            return Err(Error::Precision {
                requested: k,
                max: m,
            });
        }
        let mat = gens.matrix(j);
        for r in 0..k {
            matrix.push_row(mat.row(r as usize));
            target.push((c >> (k - 1 - r)) & 1 == 1);
        }
    }
    LinearSystemGF2::new(matrix, target)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMethod {
    /// Shares elimination work across tuples with a common prefix.
    Incremental,
    /// Assembles and solves every tuple's system from scratch.
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountOptions {
    pub workers: usize,
    pub method: CountMethod,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            workers: 1,
            method: CountMethod::Incremental,
        }
    }
}

/// Number of the first `2^m` points in `[0, a)^d`.
pub fn count_in_box(gens: &GeneratorSet, d: usize, m: u32, a: &DyadicRational) -> Result<BigUint> {
    count_in_box_with(gens, d, m, a, CountOptions::default())
}

pub fn count_in_box_with(
    gens: &GeneratorSet,
    d: usize,
    m: u32,
    a: &DyadicRational,
    opts: CountOptions,
) -> Result<BigUint> {
    let gens = restrict(gens, d, m)?;
    let a = a.reduced();
    let numerator = a.numerator_at(m).ok_or(Error::Precision {
        requested: a.log2_denominator(),
        max: m,
    })?;
    count_numerator(&gens, numerator, opts)
}

fn restrict(gens: &GeneratorSet, d: usize, m: u32) -> Result<GeneratorSet> {
    if m == 0 || m > gens.precision() {
        return Err(Error::Precision {
            requested: m,
            max: gens.precision(),
        });
    }
    let g = if d == gens.dim() { gens.clone() } else { gens.first_dims(d)? };
    if m == g.precision() {
        Ok(g)
    } else {
        g.truncated(m)
    }
}

// Box [0, A / 2^m)^d with 0 <= A <= 2^m, on generators of precision m.
fn count_numerator(gens: &GeneratorSet, numerator: u128, opts: CountOptions) -> Result<BigUint> {
    let m = gens.precision();
    if m < 128 && numerator == 1u128 << m {
        return Ok(BigUint::one() << m as usize);
    }
    if numerator == 0 {
        return Ok(BigUint::zero());
    }
    let a = DyadicRational::new(numerator, m)?;
    let workers = opts.workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    match opts.method {
        CountMethod::Incremental => {
            let rows: Vec<Vec<u128>> = gens.matrices().iter().map(|mat| mat.rows().to_vec()).collect();
            let digits: Vec<bool> = (1..=m).map(|k| a.digit(k)).collect();
            let ctx = Ctx {
                rows: &rows,
                digits: &digits,
                m,
            };
            let shards = ctx.branches(0, &Echelon::new());
            let hist = pool.install(|| {
                shards
                    .par_iter()
                    .map(|e| {
                        let mut h = Histogram::new();
                        ctx.descend(1, e, &mut h);
                        h
                    })
                    .reduce(Histogram::new, Histogram::merge)
            });
            Ok(hist.total())
        }
        CountMethod::Naive => {
            let pieces = dyadic_box_decomposition(&a);
            let d = gens.dim();
            let total = pieces.len().pow(d as u32);
            let counts = pool.install(|| {
                (0..total)
                    .into_par_iter()
                    .map(|mut t| {
                        let mut k = Vec::with_capacity(d);
                        let mut c = Vec::with_capacity(d);
                        for _ in 0..d {
                            let p = &pieces[t % pieces.len()];
                            t /= pieces.len();
                            k.push(p.k()[0]);
                            c.push(p.c()[0]);
                        }
                        let e = ElementaryInterval::dyadic(k, c)?;
                        solve_count(&assemble_system(gens, &e)?, m)
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            Ok(counts.into_iter().sum())
        }
    }
}

// Number of consistent leaves by remaining free dimension m - rank.
#[derive(Clone, Debug)]
struct Histogram([u128; 129]);

impl Histogram {
    fn new() -> Self {
        Histogram([0; 129])
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
        self
    }

    fn total(&self) -> BigUint {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &n)| n != 0)
            .map(|(free, &n)| BigUint::from(n) << free)
            .sum()
    }
}

struct Ctx<'a> {
    rows: &'a [Vec<u128>],
    digits: &'a [bool],
    m: u32,
}

impl Ctx<'_> {
    /// Echelon states after constraining dimension `j` to each interval of
    /// the decomposition, dropping inconsistent ones.
    fn branches(&self, j: usize, start: &Echelon) -> Vec<Echelon> {
        let mut out = Vec::new();
        let mut prefix = start.clone();
        for (r, &bit) in self.digits.iter().enumerate() {
            let row = self.rows[j][r];
            if bit {
                let mut e = prefix.clone();
                e.insert(row, false);
                if e.is_consistent() {
                    out.push(e);
                }
            }
            if !self.digits[r + 1..].contains(&true) {
                break;
            }
            prefix.insert(row, bit);
            if !prefix.is_consistent() {
                break;
            }
        }
        out
    }

    fn descend(&self, j: usize, e: &Echelon, h: &mut Histogram) {
        if j == self.rows.len() {
            h.0[(self.m - e.rank()) as usize] += 1;
            return;
        }
        for next in self.branches(j, e) {
            self.descend(j + 1, &next, h);
        }
    }
}

/// `n (mu_hat - mu)` at `n = 2^m` as `numerator / 2^exponent`, unreduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigRationalError {
    pub numerator: BigInt,
    pub exponent: u32,
}

impl BigRationalError {
    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(self.numerator.clone(), BigInt::one() << self.exponent as usize)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_ratio().to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for BigRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.exponent)
    }
}

/// Signed scaled error for the box `[0, a)^d` with `a = A / 2^m`:
/// `count - A^d / 2^(m(d-1))`.
pub fn signed_scaled_error_for(
    gens: &GeneratorSet,
    d: usize,
    m: u32,
    a: &DyadicRational,
    opts: CountOptions,
) -> Result<(BigUint, BigRationalError)> {
    let count = count_in_box_with(gens, d, m, a, opts)?;
    let big_a = BigInt::from(a.numerator_at(m).expect("checked by the count"));
    let exponent = m * (d as u32 - 1);
    let numerator = (BigInt::from(count.clone()) << exponent as usize) - num_traits::pow(big_a, d);
    Ok((count, BigRationalError { numerator, exponent }))
}

/// Signed scaled error at the truncated box `[0, a_m)^d`.
pub fn signed_scaled_error_exact(gens: &GeneratorSet, d: usize, m: u32) -> Result<BigRationalError> {
    Ok(signed_scaled_error_for(gens, d, m, &truncate_alpha(m)?, CountOptions::default())?.1)
}

/// Exact `n (mu_hat - mu)` for the box `[0, alpha)^d` with rational `alpha`.
///
/// A coordinate with `m` binary digits is below `alpha` iff it is below
/// `ceil(2^m alpha) / 2^m`, so the count reduces to a dyadic box.
pub fn true_scaled_error(
    gens: &GeneratorSet,
    d: usize,
    m: u32,
    alpha: &BigRational,
    opts: CountOptions,
) -> Result<BigRational> {
    if !alpha.is_positive() || *alpha > BigRational::one() {
        return Err(Error::InvalidArgument(format!("{alpha} is not in (0, 1]")));
    }
    let gens = restrict(gens, d, m)?;
    let scale = BigRational::from_integer(BigInt::one() << m as usize);
    let ceil = (alpha * &scale).ceil().to_integer().to_u128().expect("at most 2^m");
    let count = count_numerator(&gens, ceil, opts)?;
    Ok(BigRational::from_integer(count.into()) - scale * num_traits::pow(alpha.clone(), d))
}

/// Enclosure `[-alpha^(d-1) d, d]` of the true error minus the truncated one.
pub fn truncation_bounds_for(alpha: &BigRational, d: usize) -> (BigRational, BigRational) {
    let dd = BigRational::from_integer(d.into());
    let lo = -(num_traits::pow(alpha.clone(), d.saturating_sub(1)) * &dd);
    (lo, dd)
}

/// `[-(2/3)^(d-1) d, d]`.
pub fn truncation_bounds(d: usize) -> (BigRational, BigRational) {
    truncation_bounds_for(&two_thirds(), d)
}

/// One row of the big-`m` table.
#[derive(Clone, Debug, PartialEq)]
pub struct NetcountRow {
    pub d: usize,
    pub m: u32,
    pub a_numerator: u128,
    pub count: BigUint,
    pub error: BigRationalError,
    pub bound_lo: BigRational,
    pub bound_hi: BigRational,
}

pub const NETCOUNT_CSV_HEADER: [&str; 8] = [
    "d",
    "m",
    "A",
    "count",
    "signed_scaled_error_exact",
    "signed_scaled_error_float",
    "bound_lo",
    "bound_hi",
];

/// Table row for `[0, truncate(alpha, m))^d`.
pub fn netcount_row(
    gens: &GeneratorSet,
    d: usize,
    m: u32,
    alpha: &BigRational,
    opts: CountOptions,
) -> Result<NetcountRow> {
    let a = truncate(alpha, m)?;
    let (count, error) = signed_scaled_error_for(gens, d, m, &a, opts)?;
    let (bound_lo, bound_hi) = truncation_bounds_for(alpha, d);
    Ok(NetcountRow {
        d,
        m,
        a_numerator: a.numerator_at(m).expect("m digits"),
        count,
        error,
        bound_lo,
        bound_hi,
    })
}

impl NetcountRow {
    pub fn to_record(&self) -> [String; 8] {
        [
            self.d.to_string(),
            self.m.to_string(),
            self.a_numerator.to_string(),
            self.count.to_string(),
            self.error.to_string(),
            format!("{:e}", self.error.to_f64()),
            self.bound_lo.to_string(),
            self.bound_hi.to_string(),
        ]
    }
}

pub fn write_netcount_csv<W: Write>(writer: W, rows: &[NetcountRow]) -> Result<W> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(NETCOUNT_CSV_HEADER)?;
    for r in rows {
        w.write_record(r.to_record())?;
    }
    w.into_inner()
        .map_err(|e| Error::InvalidArgument(format!("flushing csv: {e}")))
}
