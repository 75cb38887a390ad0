use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::sequences::{f64_to_ratio, Coordinate, Sequence};

fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `(1/n) #{i : x_i < alpha} - alpha`.
pub fn local_discrepancy(points: &[Coordinate], alpha: &BigRational) -> Result<BigRational> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    let below = points.iter().filter(|x| x.lt_ratio(alpha)).count();
    Ok(BigRational::new(below.into(), points.len().into()) - alpha)
}

/// `n delta_n(alpha)` for `n = 1..=n_max` along a one-dimensional sequence.
pub fn n_delta_trace(seq: &Sequence, alpha: &BigRational, n_max: u64) -> Result<Vec<BigRational>> {
    if seq.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: seq.dim(),
        });
    }
    let mut below = 0u64;
    let mut out = Vec::with_capacity(n_max as usize);
    for i in 0..n_max {
        let x = seq.point(i)?;
        if x.coord(0).lt_ratio(alpha) {
            below += 1;
        }
        out.push(int(below) - int(i + 1) * alpha);
    }
    Ok(out)
}

/// `int_0^1 delta_n(alpha) d alpha`, integrating the step function over the
/// sorted points.
pub fn integrated_discrepancy(points: &[Coordinate]) -> Result<BigRational> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    let mut sorted: Vec<BigRational> = points.iter().map(Coordinate::to_ratio).collect();
    sorted.sort();
    sorted.push(BigRational::one());
    // On (x_(j), x_(j+1)] exactly j points lie below alpha.
    let mut area = BigRational::zero();
    for j in 1..sorted.len() {
        area += int(j as u64) * (&sorted[j] - &sorted[j - 1]);
    }
    Ok(area / int(points.len() as u64) - BigRational::new(1.into(), 2.into()))
}

/// Binary digits `a_1 .. a_count` of `alpha` in `[0, 1)`.
pub fn binary_digits(alpha: &BigRational, count: usize) -> Result<Vec<bool>> {
    if alpha.is_negative() || *alpha >= BigRational::one() {
        return Err(Error::InvalidArgument(format!("{alpha} is not in [0, 1)")));
    }
    let mut x = alpha.clone();
    let two = int(2);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        x *= &two;
        let bit = x >= BigRational::one();
        if bit {
            x -= BigRational::one();
        }
        out.push(bit);
    }
    Ok(out)
}

/// `h_alpha(m) = #{1 <= k <= m : a_k != a_(k+1)}` for digits `bits[0] = a_1, ...`.
pub fn alternation_count(bits: &[bool], m: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if bits.len() < m + 1 {
        return Err(Error::InvalidArgument(format!(
            "need {} digits, got {}",
            m + 1,
            bits.len()
        )));
    }
    Ok(bits[..=m].windows(2).filter(|w| w[0] != w[1]).count())
}

/// Share of `1 <= n <= 2^m` with `n delta_n(alpha) > (1 - eps) h_alpha(m)`.
pub fn corollary1_fraction(
    m: u32,
    eps: f64,
    alpha: &BigRational,
    seq: &Sequence,
) -> Result<BigRational> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} is not in (0, 1)")));
    }
    if m == 0 || m > 40 {
        return Err(Error::InvalidArgument(format!("m = {m} is out of range")));
    }
    let h = alternation_count(&binary_digits(alpha, m as usize + 1)?, m as usize)?;
    let threshold = (BigRational::one() - f64_to_ratio(eps)) * int(h as u64);
    let total = 1u64 << m;
    let hits = n_delta_trace(seq, alpha, total)?
        .iter()
        .filter(|v| **v > threshold)
        .count();
    Ok(BigRational::new(hits.into(), total.into()))
}

/// `sum_{i<n} x_i` for the base-2 van der Corput points, from the per-digit
/// ones counts: digit `k` (0-based) of `i` runs in alternating blocks of `2^k`
/// zeros and `2^k` ones, so among `i < n` it is one exactly
/// `2^k floor(n / 2^(k+1)) + max(0, n mod 2^(k+1) - 2^k)` times, and each one
/// contributes `2^-(k+1)`.
pub fn vdc_prefix_sum(n: u64) -> BigRational {
    if n <= 1 {
        return BigRational::zero();
    }
    let n = n as u128;
    let digits = 128 - (n - 1).leading_zeros();
    let mut numerator = BigInt::zero();
    for k in 0..digits {
        let block = 1u128 << k;
        let period = block << 1;
        let ones = block * (n / period) + (n % period).saturating_sub(block);
        numerator += BigInt::from(ones) << (digits - k - 1) as usize;
    }
    BigRational::new(numerator, BigInt::one() << digits as usize)
}

/// `n_L = sum_{l=0}^{L} 4^l = (4^(L+1) - 1) / 3`.
pub fn n_l(l: u32) -> Result<u128> {
    if l > 62 {
        return Err(Error::InvalidArgument(format!("n_L overflows for L = {l}")));
    }
    Ok(((1u128 << (2 * l + 2)) - 1) / 3)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prop2Check {
    pub l: u32,
    pub n: u64,
    /// `n |mu_hat - 1/2|`
    pub lhs: BigRational,
    pub bitlen: u32,
    /// `bitlen / 8`
    pub rhs: BigRational,
    pub pass: bool,
    /// `lhs / log n`
    pub lhs_over_log: f64,
}

/// Checks `n_L |mu_hat_(n_L) - 1/2| >= bitlen(n_L) / 8` exactly.
pub fn prop2_check(l: u32) -> Result<Prop2Check> {
    if l == 0 || l > 31 {
        return Err(Error::InvalidArgument(format!("L = {l} is out of range 1..=31")));
    }
    let n = n_l(l)? as u64;
    let lhs = (vdc_prefix_sum(n) - BigRational::new(n.into(), 2.into())).abs();
    let bitlen = 64 - n.leading_zeros();
    let rhs = BigRational::new(bitlen.into(), 8.into());
    let pass = lhs >= rhs;
    let lhs_over_log = lhs.to_f64().unwrap_or(f64::NAN) / (n as f64).ln();
    Ok(Prop2Check {
        l,
        n,
        lhs,
        bitlen,
        rhs,
        pass,
        lhs_over_log,
    })
}
