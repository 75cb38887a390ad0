//! Roth-style fooling functions and the lower-bound certificate.
//!
//! For a cell `E(k, c)` the function `U_{k,c}` is zero outside the cell and,
//! inside it, `(-1)^j` where `j` counts the coordinates lying in the left half
//! of the cell's side. With `m` the smallest integer such that `2^m >= 2n`,
//! the fooling function is `h = sum_{|k| = m} sum_{c in P_k} U_{k,c}` where
//! `P_k` lists the cells at `k` holding none of the points.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::sequences::compositions;

use super::wce;

fn cell_of(x: f64, k: u32) -> u128 {
    (x * (k as f64).exp2()).floor() as u128
}

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// `U_{k,c}(y)` in `{-1, 0, 1}`.
pub fn u_eval(k: &[u32], c: &[u128], y: &[f64]) -> i8 {
    let mut sign = 1i8;
    for ((&kj, &cj), &yj) in k.iter().zip(c).zip(y) {
        let idx = cell_of(yj, kj + 1);
        if idx >> 1 != cj {
            return 0;
        }
        if idx & 1 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// Exact `int U_{k,c} U_{k',c'}`, computed cell by cell.
pub fn u_inner_product(k: &[u32], c: &[u128], k2: &[u32], c2: &[u128]) -> BigRational {
    let mut total = BigRational::one();
    for j in 0..k.len() {
        let level = k[j].max(k2[j]) + 1;
        let span = |kk: u32, cc: u128| (cc << (level - kk), (cc + 1) << (level - kk));
        let (a0, a1) = span(k[j], c[j]);
        let (b0, b1) = span(k2[j], c2[j]);
        let sign = |kk: u32, t: u128| if (t >> (level - kk - 1)) & 1 == 0 { -1i64 } else { 1 };
        let mut sum = 0i64;
        for t in a0.max(b0)..a1.min(b1) {
            sum += sign(k[j], t) * sign(k2[j], t);
        }
        total *= BigRational::from_integer(sum.into()) * pow2(-(level as i64));
        if total.is_zero() {
            break;
        }
    }
    total
}

/// Empty and occupied cells for one `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoolingBlock {
    pub k: Vec<u32>,
    pub empty: Vec<Vec<u128>>,
    pub occupied: Vec<Vec<u128>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoolingFunction {
    pub d: usize,
    pub m: u32,
    pub n: usize,
    pub blocks: Vec<FoolingBlock>,
}

impl FoolingFunction {
    /// `h(y)`.
    pub fn eval(&self, y: &[f64]) -> i64 {
        self.blocks
            .iter()
            .map(|b| {
                b.empty
                    .iter()
                    .map(|c| u_eval(&b.k, c, y) as i64)
                    .sum::<i64>()
            })
            .sum()
    }

    /// `binom(m + d - 1, d - 1)`, the number of `k` with `|k| = m`.
    pub fn k_vectors(&self) -> usize {
        self.blocks.len()
    }
}

/// Builds `h` for points in `[0, 1)^d`.
pub fn build_fooling(points: &[Vec<f64>]) -> Result<FoolingFunction> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyPoints);
    }
    let d = points[0].len();
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: p.len(),
            });
        }
        if p.iter().any(|&v| !(0.0..1.0).contains(&v)) {
            return Err(Error::InvalidArgument(format!("point {p:?} is outside [0, 1)^d")));
        }
    }
    let m = (usize::BITS - (2 * n - 1).leading_zeros()).max(1);
    let mut blocks = Vec::new();
    for k in compositions(m, d) {
        let mut occupied: Vec<Vec<u128>> = points
            .iter()
            .map(|p| p.iter().zip(&k).map(|(&x, &kj)| cell_of(x, kj)).collect())
            .collect();
        occupied.sort();
        occupied.dedup();
        let seen: HashSet<&Vec<u128>> = occupied.iter().collect();
        let mut empty = Vec::new();
        for flat in 0..(1u128 << m) {
            let mut rest = flat;
            let mut c = vec![0u128; d];
            for j in (0..d).rev() {
                c[j] = rest & ((1u128 << k[j]) - 1);
                rest >>= k[j];
            }
            if !seen.contains(&c) {
                empty.push(c);
            }
        }
        blocks.push(FoolingBlock { k, empty, occupied });
    }
    Ok(FoolingFunction { d, m, n, blocks })
}

/// `int h^2 = sum_k |P_k| 2^-m`, by orthogonality of the `U_{k,c}`.
pub fn h_l2_norm_sq(h: &FoolingFunction) -> BigRational {
    let cells: usize = h.blocks.iter().map(|b| b.empty.len()).sum();
    BigRational::from_integer(cells.into()) * pow2(-(h.m as i64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HInnerProducts {
    /// `int h(y) prod_j (y_j - 1{y_j > x_ij}) dy` per point.
    pub per_point: Vec<BigRational>,
    /// `sum_i a_i per_point[i]`.
    pub total: BigRational,
}

// For a cell [L, L + w) with w = 2^-k and s = -1 on its left half, +1 on its
// right half, int s(y) (y - 1{y > x}) dy over the cell is w^2/4 when x lies
// outside it and w^2/4 - g otherwise, with g = x - L on the left half and
// g = L + w - x on the right half.
fn deduction(x: &BigRational, k: u32, cell: u128) -> BigRational {
    let w = pow2(-(k as i64));
    let left = BigRational::from_integer(cell.into()) * &w;
    let mid = &left + &w / BigRational::from_integer(2.into());
    if *x < mid {
        x - left
    } else {
        left + w - x
    }
}

/// Exact inner products of `h` with the representer derivatives of each point.
pub fn h_inner_products(
    h: &FoolingFunction,
    points: &[Vec<f64>],
    weights: &[f64],
) -> Result<HInnerProducts> {
    if points.len() != weights.len() {
        return Err(Error::WrongPointCount {
            expected: weights.len(),
            actual: points.len(),
        });
    }
    let d = h.d;
    let m = h.m;
    // q[k] = 2^(-2k-2), the factor of a side not containing the point;
    // t[k] = 2^(-k-2), the sum of that factor over the 2^k cells at level k.
    let q: Vec<BigRational> = (0..=m).map(|k| pow2(-2 * k as i64 - 2)).collect();
    let t: Vec<BigRational> = (0..=m).map(|k| pow2(-(k as i64) - 2)).collect();
    let mut per_point = Vec::with_capacity(points.len());
    for (i, x) in points.iter().enumerate() {
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: x.len(),
            });
        }
        let xe: Vec<BigRational> = x.iter().map(|&v| exact(v)).collect();
        let cells: Vec<Vec<u128>> = x.iter().map(|&v| (0..=m).map(|k| cell_of(v, k)).collect()).collect();
        let g: Vec<Vec<BigRational>> = (0..d)
            .map(|j| (0..=m).map(|k| deduction(&xe[j], k, cells[j][k as usize])).collect())
            .collect();
        let mut value = BigRational::zero();
        for block in &h.blocks {
            let k = &block.k;
            // Sum over all cells at k, then remove the occupied ones, grouped
            // by which sides contain the point.
            let mut all = BigRational::one();
            for j in 0..d {
                all *= &t[k[j] as usize] - &g[j][k[j] as usize];
            }
            let mut pattern = vec![0u64; 1 << d];
            for c in &block.occupied {
                let mut mask = 0usize;
                for j in 0..d {
                    if c[j] == cells[j][k[j] as usize] {
                        mask |= 1 << j;
                    }
                }
                pattern[mask] += 1;
            }
            if pattern[(1 << d) - 1] == 0 {
                return Err(Error::OccupiedCell { point: i });
            }
            let mut occupied = BigRational::zero();
            for (mask, &count) in pattern.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                let mut term = BigRational::from_integer(count.into());
                for j in 0..d {
                    let kj = k[j] as usize;
                    if mask >> j & 1 == 1 {
                        term *= &q[kj] - &g[j][kj];
                    } else {
                        term *= &q[kj];
                    }
                }
                occupied += term;
            }
            value += all - occupied;
        }
        per_point.push(value);
    }
    let total = per_point
        .iter()
        .zip(weights)
        .map(|(v, &a)| v * exact(a))
        .sum();
    Ok(HInnerProducts { per_point, total })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepCheck {
    pub step: &'static str,
    /// Lower bound the worst-case error must meet.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCertificate {
    pub n: usize,
    pub d: usize,
    pub m: u32,
    pub wce: f64,
    pub sum_weights: BigRational,
    /// `|1 - sum a_i|`.
    pub first_bound: f64,
    pub h_norm_sq: BigRational,
    /// `binom(m + d - 1, d - 1)`.
    pub k_vectors: usize,
    pub per_point: Vec<BigRational>,
    pub weighted_total: BigRational,
    /// `weighted_total / sqrt(int h^2)`.
    pub cauchy_schwarz_bound: f64,
    /// `weighted_total / (sum a_i sqrt(int h^2))` when positive.
    pub lambda: Option<f64>,
    /// `lambda / (lambda + 1)`, or zero without a positive `lambda`.
    pub minmax_floor: f64,
    pub lower_bound: f64,
    /// `n / 4^(m + d)`.
    pub per_point_floor: BigRational,
    pub per_point_floor_holds: bool,
    pub steps: Vec<StepCheck>,
}

/// Absolute slack for comparing the floating worst-case error with bounds.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-12;

/// Computes every quantity of the lower-bound chain and checks it.
pub fn certificate(points: &[Vec<f64>], weights: &[f64]) -> Result<BoundCertificate> {
    let e = wce(points, weights)?;
    let h = build_fooling(points)?;
    let h_norm_sq = h_l2_norm_sq(&h);
    let inner = h_inner_products(&h, points, weights)?;
    let sum_weights: BigRational = weights.iter().map(|&a| exact(a)).sum();
    let first_bound = (BigRational::one() - &sum_weights).abs().to_f64().unwrap_or(f64::NAN);
    let norm = h_norm_sq.to_f64().unwrap_or(f64::NAN).sqrt();
    let total_f = inner.total.to_f64().unwrap_or(f64::NAN);
    let cauchy_schwarz_bound = total_f / norm;
    let lambda = (inner.total.is_positive() && sum_weights.is_positive())
        .then(|| cauchy_schwarz_bound / sum_weights.to_f64().unwrap_or(f64::NAN));
    let minmax_floor = lambda.map_or(0.0, |l| l / (l + 1.0));
    let check = |step, bound: f64| StepCheck {
        step,
        bound,
        holds: e >= bound - CERTIFICATE_TOLERANCE,
    };
    let steps = vec![
        check("first lower bound", first_bound),
        check("cauchy-schwarz", cauchy_schwarz_bound),
        check("min-max floor", minmax_floor),
    ];
    if let Some(s) = steps.iter().find(|s| !s.holds) {
        return Err(Error::CertificateViolation {
            step: s.step,
            detail: format!("wce {e} < bound {}", s.bound),
        });
    }
    let k_vectors = h.k_vectors();
    if h_norm_sq > BigRational::from_integer(k_vectors.into()) {
        return Err(Error::CertificateViolation {
            step: "norm of h",
            detail: format!("{h_norm_sq} exceeds {k_vectors}"),
        });
    }
    let per_point_floor =
        BigRational::from_integer(points.len().into()) * pow2(-2 * (h.m as i64 + h.d as i64));
    let per_point_floor_holds = inner.per_point.iter().all(|v| *v >= per_point_floor);
    let lower_bound = first_bound.max(cauchy_schwarz_bound).max(minmax_floor);
    Ok(BoundCertificate {
        n: points.len(),
        d: h.d,
        m: h.m,
        wce: e,
        sum_weights,
        first_bound,
        h_norm_sq,
        k_vectors,
        per_point: inner.per_point,
        weighted_total: inner.total,
        cauchy_schwarz_bound,
        lambda,
        minmax_floor,
        lower_bound,
        per_point_floor,
        per_point_floor_holds,
        steps,
    })
}
