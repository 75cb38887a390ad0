//! Test integrands on `[0, 1)^d` with exact evaluation where the family allows.
//!
//! Every indicator uses the strict comparison `x_j < alpha_j`, matching the
//! half-open elementary intervals.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::sequences::{Coordinate, DyadicRational, Point};

/// Threshold `alpha` of an indicator factor.
#[derive(Clone, Debug, PartialEq)]
pub enum Threshold {
    Rational(BigRational),
    /// An irrational threshold, compared through its 128-bit truncation
    /// `approx <= alpha < approx + 2^-128`. Coordinates with at most 128
    /// binary digits are therefore classified exactly.
    Irrational {
        label: String,
        approx: DyadicRational,
        value: f64,
    },
}

impl Threshold {
    pub fn rational(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidIntegrand("zero denominator".into()));
        }
        Self::from_ratio(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_ratio(r: BigRational) -> Result<Self> {
        if !r.is_positive() || r >= BigRational::one() {
            return Err(Error::InvalidIntegrand(format!("threshold {r} is not in (0, 1)")));
        }
        Ok(Threshold::Rational(r))
    }

    /// `sqrt(2) - 1`, the default badly approximable threshold.
    pub fn sqrt2_minus_1() -> Self {
        let two_shifted = BigUint::from(2u32) << 256usize;
        let root = two_shifted.sqrt() - (BigUint::one() << 128usize);
        let numerator = root.to_u128().expect("sqrt(2)-1 < 1");
        Threshold::Irrational {
            label: "sqrt2-1".into(),
            approx: DyadicRational::new(numerator, 128).expect("in [0, 1)"),
            value: std::f64::consts::SQRT_2 - 1.0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "sqrt2-1" | "sqrt(2)-1" => return Ok(Self::sqrt2_minus_1()),
            _ => {}
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidIntegrand(format!("bad threshold '{s}'")))?;
            let q: BigInt = q
                .trim()
                .parse()
                .map_err(|_| Error::InvalidIntegrand(format!("bad threshold '{s}'")))?;
            if q.is_zero() {
                return Err(Error::InvalidIntegrand(format!("bad threshold '{s}'")));
            }
            return Self::from_ratio(BigRational::new(p, q));
        }
        // Decimal literal, read exactly.
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        let digits = format!("{int}{frac}");
        let numer: BigInt = digits
            .parse()
            .map_err(|_| Error::InvalidIntegrand(format!("bad threshold '{s}'")))?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        Self::from_ratio(BigRational::new(numer, denom))
    }

    pub fn as_ratio(&self) -> Option<&BigRational> {
        match self {
            Threshold::Rational(r) => Some(r),
            Threshold::Irrational { .. } => None,
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Threshold::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Threshold::Irrational { value, .. } => *value,
        }
    }

    /// Exact `x < alpha`.
    pub fn above(&self, x: &Coordinate) -> bool {
        match self {
            Threshold::Rational(r) => lt_rational(x, r),
            Threshold::Irrational { approx, .. } => !approx_lt(approx, x),
        }
    }
}

// x < p/q with a u128 fast path.
fn lt_rational(x: &Coordinate, r: &BigRational) -> bool {
    if let (Some(p), Some(q)) = (r.numer().to_u64(), r.denom().to_u64()) {
        let (a, b) = match x {
            Coordinate::Dyadic(d) if d.log2_denominator() <= 64 => {
                (d.numerator(), 1u128 << d.log2_denominator())
            }
            Coordinate::Rational(c) if c.denominator() <= u64::MAX as u128 => {
                (c.numerator(), c.denominator())
            }
            _ => return x.to_ratio() < *r,
        };
        return a * (q as u128) < (p as u128) * b;
    }
    x.to_ratio() < *r
}

// approx < x, exactly.
fn approx_lt(approx: &DyadicRational, x: &Coordinate) -> bool {
    match x {
        Coordinate::Dyadic(d) => approx < d,
        Coordinate::Rational(_) => approx.to_ratio() < x.to_ratio(),
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Rational(r) => write!(f, "{r}"),
            Threshold::Irrational { label, .. } => f.write_str(label),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `f(x) = x` on `[0, 1)`.
    Linear,
    /// `prod_j 1{x_j < alpha_j}`.
    BoxIndicator(Vec<Threshold>),
    /// `prod_j (x_j - 1/2)`.
    CenteredProduct,
    /// `prod_j (1{x_j < alpha_j} - alpha_j)`.
    CenteredIndicatorProduct(Vec<Threshold>),
    /// `1{x_1 + x_2 < 1}`.
    SimplexIndicator,
    /// `prod_j (x_j^theta - 1/(1 + theta))`.
    PowerProduct(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrandSpec {
    family: Family,
    dim: usize,
}

/// Mean of an integrand over the unit cube.
#[derive(Clone, Debug, PartialEq)]
pub enum ExactMean {
    Exact(BigRational),
    /// Real value; `f64` rounding is the only error.
    Real(f64),
}

impl ExactMean {
    pub fn to_f64(&self) -> f64 {
        match self {
            ExactMean::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            ExactMean::Real(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            ExactMean::Exact(r) => Some(r),
            ExactMean::Real(_) => None,
        }
    }
}

impl IntegrandSpec {
    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidIntegrand("dimension must be at least 1".into()));
        }
        match &family {
            Family::Linear if dim != 1 => {
                return Err(Error::InvalidIntegrand("f(x) = x needs d = 1".into()))
            }
            Family::SimplexIndicator if dim != 2 => {
                return Err(Error::InvalidIntegrand("the simplex indicator needs d = 2".into()))
            }
            Family::BoxIndicator(a) | Family::CenteredIndicatorProduct(a) if a.len() != dim => {
                return Err(Error::InvalidIntegrand(format!(
                    "{} thresholds for dimension {dim}",
                    a.len()
                )))
            }
            Family::PowerProduct(theta) if !(*theta > 0.0 && *theta < 1.0) => {
                return Err(Error::InvalidIntegrand(format!("theta = {theta} is not in (0, 1)")))
            }
            _ => {}
        }
        Ok(IntegrandSpec { family, dim })
    }

    pub fn linear() -> Self {
        IntegrandSpec {
            family: Family::Linear,
            dim: 1,
        }
    }

    pub fn centered_product(dim: usize) -> Result<Self> {
        Self::new(Family::CenteredProduct, dim)
    }

    pub fn box_indicator(alpha: Vec<Threshold>) -> Result<Self> {
        let d = alpha.len();
        Self::new(Family::BoxIndicator(alpha), d)
    }

    pub fn centered_indicator(alpha: Vec<Threshold>) -> Result<Self> {
        let d = alpha.len();
        Self::new(Family::CenteredIndicatorProduct(alpha), d)
    }

    pub fn simplex() -> Self {
        IntegrandSpec {
            family: Family::SimplexIndicator,
            dim: 2,
        }
    }

    pub fn power_product(theta: f64, dim: usize) -> Result<Self> {
        Self::new(Family::PowerProduct(theta), dim)
    }

    /// Parses `linear`, `box:2/3^3`, `box:2/3,3/5`, `centered`,
    /// `centered-indicator:2/3,3/5`, `simplex` or `power:0.5`. Families
    /// without an explicit dimension use `default_dim`.
    pub fn parse(s: &str, default_dim: usize) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s, None),
        };
        let thresholds = |args: Option<&str>| -> Result<Vec<Threshold>> {
            let args = args.ok_or_else(|| Error::InvalidIntegrand(format!("'{name}' needs thresholds")))?;
            if let Some((a, rep)) = args.rsplit_once('^') {
                let rep: usize = rep
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidIntegrand(format!("bad repeat count in '{args}'")))?;
                let t = Threshold::parse(a)?;
                return Ok(vec![t; rep]);
            }
            args.split(',').map(Threshold::parse).collect()
        };
        match name {
            "linear" | "x" => Ok(Self::linear()),
            "box" => Self::box_indicator(thresholds(args)?),
            "centered" | "centered-product" => Self::centered_product(default_dim),
            "centered-indicator" => Self::centered_indicator(thresholds(args)?),
            "simplex" => Ok(Self::simplex()),
            "power" => {
                let theta = args
                    .unwrap_or("0.5")
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidIntegrand(format!("bad theta in '{s}'")))?;
                Self::power_product(theta, default_dim)
            }
            other => Err(Error::InvalidIntegrand(format!("unknown integrand '{other}'"))),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether evaluation on exact points yields exact rationals.
    pub fn is_exact(&self) -> bool {
        match &self.family {
            Family::Linear | Family::CenteredProduct | Family::SimplexIndicator => true,
            Family::BoxIndicator(_) => true,
            Family::CenteredIndicatorProduct(a) => a.iter().all(|t| t.as_ratio().is_some()),
            Family::PowerProduct(_) => false,
        }
    }

    fn check_dim(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.dim(),
            });
        }
        Ok(())
    }

    /// Exact value at `x`, or `None` for families without one.
    pub fn evaluate_exact(&self, x: &Point) -> Result<Option<BigRational>> {
        self.check_dim(x)?;
        let c = x.coords();
        let half = || BigRational::new(1.into(), 2.into());
        let one = BigRational::one;
        let indicator = |b: bool| if b { one() } else { BigRational::zero() };
        Ok(match &self.family {
            Family::Linear => Some(c[0].to_ratio()),
            Family::BoxIndicator(a) => {
                Some(indicator(a.iter().zip(c).all(|(t, xj)| t.above(xj))))
            }
            Family::CenteredProduct => {
                Some(c.iter().fold(one(), |acc, xj| acc * (xj.to_ratio() - half())))
            }
            Family::CenteredIndicatorProduct(a) => {
                let mut acc = one();
                for (t, xj) in a.iter().zip(c) {
                    let alpha = match t.as_ratio() {
                        Some(r) => r,
                        None => return Ok(None),
                    };
                    acc *= indicator(t.above(xj)) - alpha;
                }
                Some(acc)
            }
            Family::SimplexIndicator => Some(indicator(c[0].to_ratio() + c[1].to_ratio() < one())),
            Family::PowerProduct(_) => None,
        })
    }

    /// Value at `x` as a double. Indicator comparisons are still exact.
    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        self.check_dim(x)?;
        let c = x.coords();
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        Ok(match &self.family {
            Family::Linear => c[0].to_f64(),
            Family::BoxIndicator(a) => ind(a.iter().zip(c).all(|(t, xj)| t.above(xj))),
            Family::CenteredProduct => c.iter().map(|xj| xj.to_f64() - 0.5).product(),
            Family::CenteredIndicatorProduct(a) => a
                .iter()
                .zip(c)
                .map(|(t, xj)| ind(t.above(xj)) - t.value())
                .product(),
            Family::SimplexIndicator => {
                let exact = c[0].to_ratio() + c[1].to_ratio() < BigRational::one();
                ind(exact)
            }
            Family::PowerProduct(theta) => c
                .iter()
                .map(|xj| xj.to_f64().powf(*theta) - 1.0 / (1.0 + theta))
                .product(),
        })
    }

    pub fn true_mean(&self) -> ExactMean {
        match &self.family {
            Family::Linear | Family::SimplexIndicator => {
                ExactMean::Exact(BigRational::new(1.into(), 2.into()))
            }
            Family::CenteredProduct
            | Family::CenteredIndicatorProduct(_)
            | Family::PowerProduct(_) => ExactMean::Exact(BigRational::zero()),
            Family::BoxIndicator(a) => {
                if a.iter().all(|t| t.as_ratio().is_some()) {
                    ExactMean::Exact(
                        a.iter()
                            .fold(BigRational::one(), |acc, t| acc * t.as_ratio().unwrap()),
                    )
                } else {
                    ExactMean::Real(a.iter().map(Threshold::value).product())
                }
            }
        }
    }
}

impl fmt::Display for IntegrandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |a: &[Threshold]| {
            a.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        match &self.family {
            Family::Linear => f.write_str("linear"),
            Family::BoxIndicator(a) => write!(f, "box:{}", list(a)),
            Family::CenteredProduct => write!(f, "centered[d={}]", self.dim),
            Family::CenteredIndicatorProduct(a) => write!(f, "centered-indicator:{}", list(a)),
            Family::SimplexIndicator => f.write_str("simplex"),
            Family::PowerProduct(t) => write!(f, "power:{t}[d={}]", self.dim),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{RationalCoordinate, Sequence};

    fn q(p: i64, r: i64) -> BigRational {
        BigRational::new(p.into(), r.into())
    }

    fn pt(coords: &[(u128, u128)]) -> Point {
        Point::new(
            coords
                .iter()
                .map(|&(p, r)| Coordinate::Rational(RationalCoordinate::new(p, r).unwrap()))
                .collect(),
        )
    }

    #[test]
    fn centered_product_vanishes_on_midline() {
        let f = IntegrandSpec::centered_product(2).unwrap();
        assert_eq!(f.evaluate_exact(&pt(&[(1, 2), (1, 4)])).unwrap(), Some(q(0, 1)));
        assert_eq!(f.evaluate(&pt(&[(1, 2), (1, 4)])).unwrap(), 0.0);
    }

    #[test]
    fn box_indicator_example() {
        let f = IntegrandSpec::parse("box:2/3^3", 3).unwrap();
        let x = pt(&[(3, 5), (3, 5), (3, 5)]);
        assert_eq!(f.evaluate(&x).unwrap(), 1.0);
        assert_eq!(f.evaluate_exact(&x).unwrap(), Some(q(1, 1)));
        assert_eq!(f.true_mean(), ExactMean::Exact(q(8, 27)));
    }

    #[test]
    fn centered_indicator_example() {
        let f = IntegrandSpec::parse("centered-indicator:2/3,3/5", 2).unwrap();
        let x = pt(&[(9, 10), (1, 2)]);
        assert_eq!(f.evaluate_exact(&x).unwrap(), Some(q(-4, 15)));
        assert!((f.evaluate(&x).unwrap() + 4.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn indicator_uses_strict_comparison() {
        let f = IntegrandSpec::parse("box:1/2", 1).unwrap();
        assert_eq!(f.evaluate_exact(&pt(&[(1, 2)])).unwrap(), Some(q(0, 1)));
        let s = IntegrandSpec::simplex();
        assert_eq!(s.evaluate_exact(&pt(&[(1, 2), (1, 2)])).unwrap(), Some(q(0, 1)));
        assert_eq!(s.evaluate_exact(&pt(&[(1, 2), (1, 3)])).unwrap(), Some(q(1, 1)));
    }

    #[test]
    fn means() {
        assert_eq!(
            IntegrandSpec::centered_product(5).unwrap().true_mean(),
            ExactMean::Exact(q(0, 1))
        );
        assert_eq!(IntegrandSpec::simplex().true_mean(), ExactMean::Exact(q(1, 2)));
        assert_eq!(IntegrandSpec::linear().true_mean(), ExactMean::Exact(q(1, 2)));
        assert_eq!(
            IntegrandSpec::power_product(0.5, 3).unwrap().true_mean(),
            ExactMean::Exact(q(0, 1))
        );
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(IntegrandSpec::new(Family::Linear, 2).is_err());
        assert!(IntegrandSpec::new(Family::SimplexIndicator, 3).is_err());
        assert!(IntegrandSpec::power_product(1.5, 2).is_err());
        assert!(IntegrandSpec::parse("box:3/2", 1).is_err());
        assert!(IntegrandSpec::parse("box:0", 1).is_err());
        assert!(IntegrandSpec::parse("nope", 1).is_err());
        let f = IntegrandSpec::centered_product(2).unwrap();
        assert!(matches!(
            f.evaluate(&pt(&[(1, 3)])),
            Err(Error::DimensionMismatch { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn decimal_thresholds_are_exact() {
        assert_eq!(Threshold::parse("0.3").unwrap(), Threshold::Rational(q(3, 10)));
        assert_eq!(Threshold::parse(" 2/3 ").unwrap(), Threshold::Rational(q(2, 3)));
    }

    #[test]
    fn sqrt2_threshold_truncation() {
        let t = Threshold::sqrt2_minus_1();
        let Threshold::Irrational { approx, value, .. } = &t else { panic!() };
        assert!((approx.to_f64() - value).abs() < 1e-15);
        // approx <= sqrt(2) - 1 < approx + 2^-128  <=>  (approx + 1)^2 <= 2 < (approx + 1 + 2^-128)^2
        let a = approx.to_ratio() + BigRational::one();
        let ulp = BigRational::new(1.into(), BigInt::one() << 128usize);
        let two = q(2, 1);
        assert!(&a * &a <= two);
        let b = &a + ulp;
        assert!(&b * &b > two);
        assert!(!t.above(&Coordinate::Rational(RationalCoordinate::new(1, 2).unwrap())));
        assert!(t.above(&Coordinate::Rational(RationalCoordinate::new(2, 5).unwrap())));
        assert!(!IntegrandSpec::parse("centered-indicator:sqrt2-1^2", 2).unwrap().is_exact());
    }

    #[test]
    fn centered_product_midpoint_symmetry() {
        for d in 1..=4 {
            let f = IntegrandSpec::centered_product(d).unwrap();
            for i in 1..200u64 {
                let p = crate::sequences::halton_point(i, &crate::sequences::first_primes(d)).unwrap();
                if p.coords().iter().any(|c| c.to_ratio() == q(1, 2)) {
                    continue;
                }
                let mirrored = Point::new(
                    p.coords()
                        .iter()
                        .map(|c| match c {
                            Coordinate::Rational(r) => Coordinate::Rational(
                                RationalCoordinate::new(r.denominator() - r.numerator(), r.denominator())
                                    .unwrap(),
                            ),
                            _ => unreachable!(),
                        })
                        .collect(),
                );
                let a = f.evaluate_exact(&p).unwrap().unwrap();
                let b = f.evaluate_exact(&mirrored).unwrap().unwrap();
                if d % 2 == 0 {
                    assert_eq!(a, b);
                } else {
                    assert_eq!(a, -b);
                }
            }
        }
    }

    #[test]
    fn box_indicator_is_monotone_in_alpha() {
        let seq = Sequence::Halton { bases: vec![2, 3] };
        let alphas = [q(1, 5), q(1, 3), q(1, 2), q(2, 3), q(9, 10)];
        for i in 0..300 {
            let x = seq.point(i).unwrap();
            let mut prev = 0.0;
            for a in &alphas {
                let f = IntegrandSpec::box_indicator(vec![
                    Threshold::Rational(a.clone()),
                    Threshold::Rational(q(3, 4)),
                ])
                .unwrap();
                let v = f.evaluate(&x).unwrap();
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn centered_families_average_to_zero_over_full_periods() {
        // One coordinate fixed, the other running over a full van der Corput period.
        let vdc = Sequence::VanDerCorput { base: 2 };
        let cases = [
            IntegrandSpec::centered_product(2).unwrap(),
            IntegrandSpec::parse("centered-indicator:1/2,3/4", 2).unwrap(),
        ];
        let fixed = Coordinate::Rational(RationalCoordinate::new(1, 3).unwrap());
        for f in &cases {
            let mut previous = None;
            for m in [4u32, 8, 12] {
                let n = 1u64 << m;
                let mut sum = BigRational::zero();
                for i in 0..n {
                    let x = vdc.point(i).unwrap().coords()[0];
                    let p = Point::new(vec![fixed, x]);
                    sum += f.evaluate_exact(&p).unwrap().unwrap();
                }
                let avg = (sum / BigRational::from_integer(n.into())).abs();
                if let Some(prev) = previous {
                    assert!(avg <= prev, "{f}: average should shrink");
                }
                previous = Some(avg);
            }
            assert!(previous.unwrap() < q(1, 1000), "{f}");
        }
    }
}
