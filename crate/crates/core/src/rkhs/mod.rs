//! The unanchored Sobolev kernel on `[0, 1]^d`, worst-case errors of
//! weighted rules and optimal weights.
//!
//! The one-dimensional kernel is
//! `k(x, y) = 4/3 + (x^2 + y^2 - x - y - |x - y|) / 2` and the `d`-dimensional
//! kernel is the product over coordinates. Every `k(x, .)` integrates to one,
//! so the representer of integration is the constant `1` and the worst-case
//! error of `sum_i a_i f(x_i)` is `|| 1 - sum_i a_i K(x_i, .) ||`.

mod fooling;

pub use fooling::{
    build_fooling, certificate, h_inner_products, h_l2_norm_sq, u_eval, u_inner_product,
    BoundCertificate, FoolingBlock, FoolingFunction, HInnerProducts, StepCheck,
    CERTIFICATE_TOLERANCE,
};

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::sequences::Point;

/// Radicands above `-RADICAND_TOLERANCE` are clamped to zero.
pub const RADICAND_TOLERANCE: f64 = 1e-12;

fn check_same_dim(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    Ok(())
}

pub fn kernel_1d(x: f64, y: f64) -> f64 {
    4.0 / 3.0 + (x * x + y * y - x - y - (x - y).abs()) / 2.0
}

pub fn kernel(x: &[f64], y: &[f64]) -> Result<f64> {
    check_same_dim(x, y)?;
    Ok(x.iter().zip(y).map(|(&a, &b)| kernel_1d(a, b)).product())
}

/// Exact kernel on rational inputs.
pub fn kernel_exact(x: &[BigRational], y: &[BigRational]) -> Result<BigRational> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    let four_thirds = BigRational::new(4.into(), 3.into());
    let half = BigRational::new(1.into(), 2.into());
    Ok(x.iter().zip(y).fold(BigRational::one(), |acc, (a, b)| {
        let t = a * a + b * b - a - b - (a - b).abs();
        acc * (&four_thirds + t * &half)
    }))
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let d = points.first().map_or(0, Vec::len);
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: p.len(),
            });
        }
        if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidArgument(format!("point {p:?} is outside the unit cube")));
        }
    }
    Ok(d)
}

pub fn gram_matrix(points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    check_points(points)?;
    let n = points.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel(&points[i], &points[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// `sqrt(1 - 2 sum a_i + sum a_i a_j K(x_i, x_j))`.
pub fn wce(points: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    if points.len() != weights.len() {
        return Err(Error::WrongPointCount {
            expected: weights.len(),
            actual: points.len(),
        });
    }
    let g = gram_matrix(points)?;
    let a = DVector::from_column_slice(weights);
    let radicand = 1.0 - 2.0 * a.sum() + a.dot(&(&g * &a));
    clamp_sqrt(radicand)
}

fn clamp_sqrt(radicand: f64) -> Result<f64> {
    if radicand >= 0.0 {
        Ok(radicand.sqrt())
    } else if radicand >= -RADICAND_TOLERANCE {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand(radicand))
    }
}

pub fn equal_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Conditions above this are reported instead of solved.
pub const MAX_CONDITION: f64 = 1e14;

/// Weights minimising the worst-case error, and the minimum `r_n`.
///
/// The weights solve `G a = 1`; then `r_n^2 = 1 - sum_i a_i`.
pub fn optimal_weights(points: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    let g = gram_matrix(points)?;
    let n = points.len();
    let condition = || {
        let eig = g.clone().symmetric_eigen().eigenvalues;
        let hi = eig.max();
        let lo = eig.min();
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    };
    let chol = match g.clone().cholesky() {
        Some(c) => c,
        None => return Err(Error::SingularGram { condition: condition() }),
    };
    let diag = chol.l_dirty().diagonal();
    let ratio = diag.max() / diag.min();
    if ratio * ratio > MAX_CONDITION {
        let c = condition();
        if c > MAX_CONDITION {
            return Err(Error::SingularGram { condition: c });
        }
    }
    let a = chol.solve(&DVector::from_element(n, 1.0));
    let r = clamp_sqrt(1.0 - a.sum())?;
    Ok((a.iter().copied().collect(), r))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateEntry {
    pub n: usize,
    pub r_n: f64,
    /// `r_n n / log(n)^((d-1)/2)`; absent when `log n = 0` and `d > 1`.
    pub normalized: Option<f64>,
}

/// Optimal `r_n` along nested prefixes of `points`.
pub fn rate_trace(points: &[Vec<f64>], ns: &[usize]) -> Result<Vec<RateEntry>> {
    let d = check_points(points)?;
    ns.iter()
        .map(|&n| {
            if n == 0 || n > points.len() {
                return Err(Error::WrongPointCount {
                    expected: n,
                    actual: points.len(),
                });
            }
            let (_, r_n) = optimal_weights(&points[..n])?;
            let power = (d as f64 - 1.0) / 2.0;
            let log = (n as f64).ln();
            let normalized = if power == 0.0 {
                Some(r_n * n as f64)
            } else if log > 0.0 {
                Some(r_n * n as f64 / log.powf(power))
            } else {
                None
            };
            Ok(RateEntry { n, r_n, normalized })
        })
        .collect()
}

/// Coordinates as doubles; dyadic coordinates with at most 53 digits stay exact.
pub fn to_f64_points(points: &[Point]) -> Vec<Vec<f64>> {
    points.iter().map(Point::to_f64).collect()
}
