//! Exact coordinates for points in the unit cube.
//!
//! Base-2 constructions produce [`DyadicRational`] values; radical inverses in
//! other bases produce [`RationalCoordinate`]s. Both compare by value so that
//! half-open box membership is decided without rounding.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};

/// Largest supported denominator exponent for [`DyadicRational`].
pub const MAX_DYADIC_BITS: u32 = 128;

/// A value `numerator / 2^log2_denominator` in `[0, 1)`.
///
/// The representation is not required to be reduced; equality, ordering and
/// hashing all work on the value.
#[derive(Clone, Copy, Debug)]
pub struct DyadicRational {
    numerator: u128,
    log2_denominator: u32,
}

impl DyadicRational {
    pub const ZERO: DyadicRational = DyadicRational {
        numerator: 0,
        log2_denominator: 0,
    };

    pub fn new(numerator: u128, log2_denominator: u32) -> Result<Self> {
        if log2_denominator > MAX_DYADIC_BITS {
            return Err(Error::Precision {
                requested: log2_denominator,
                max: MAX_DYADIC_BITS,
            });
        }
        if log2_denominator < 128 && numerator >> log2_denominator != 0 {
            return Err(Error::InvalidArgument(format!(
                "{numerator}/2^{log2_denominator} is not in [0, 1)"
            )));
        }
        Ok(DyadicRational {
            numerator,
            log2_denominator,
        })
    }

    pub fn numerator(&self) -> u128 {
        self.numerator
    }

    pub fn log2_denominator(&self) -> u32 {
        self.log2_denominator
    }

    /// Same value with the smallest possible denominator.
    pub fn reduced(&self) -> Self {
        if self.numerator == 0 {
            return Self::ZERO;
        }
        let tz = self.numerator.trailing_zeros().min(self.log2_denominator);
        DyadicRational {
            numerator: self.numerator >> tz,
            log2_denominator: self.log2_denominator - tz,
        }
    }

    /// Numerator over `2^bits`, if the value is representable at that precision.
    pub fn numerator_at(&self, bits: u32) -> Option<u128> {
        if bits > MAX_DYADIC_BITS {
            return None;
        }
        let r = self.reduced();
        if r.log2_denominator > bits {
            return None;
        }
        let shift = bits - r.log2_denominator;
        if r.numerator == 0 {
            Some(0)
        } else {
            // r.numerator < 2^r.log2_denominator, so the shift cannot overflow.
            Some(r.numerator << shift)
        }
    }

    /// Binary digit `k` after the point (`k = 1` is the most significant).
    pub fn digit(&self, k: u32) -> bool {
        if k == 0 || k > self.log2_denominator {
            return false;
        }
        (self.numerator >> (self.log2_denominator - k)) & 1 == 1
    }

    /// `floor(2^k * self)`.
    pub fn cell_index(&self, k: u32) -> u128 {
        if k >= self.log2_denominator {
            if self.numerator == 0 {
                0
            } else {
                self.numerator << (k - self.log2_denominator)
            }
        } else {
            self.numerator >> (self.log2_denominator - k)
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 * 2f64.powi(-(self.log2_denominator as i32))
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.numerator),
            BigInt::one() << self.log2_denominator as usize,
        )
    }

    fn aligned(&self, bits: u32) -> u128 {
        if self.numerator == 0 {
            0
        } else {
            self.numerator << (bits - self.log2_denominator)
        }
    }
}

impl PartialEq for DyadicRational {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for DyadicRational {}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let bits = self.log2_denominator.max(other.log2_denominator);
        self.aligned(bits).cmp(&other.aligned(bits))
    }
}

impl Hash for DyadicRational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let r = self.reduced();
        r.numerator.hash(state);
        r.log2_denominator.hash(state);
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.numerator, self.log2_denominator)
    }
}

/// A reduced fraction `numerator / denominator` in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RationalCoordinate {
    numerator: u128,
    denominator: u128,
}

impl RationalCoordinate {
    pub fn new(numerator: u128, denominator: u128) -> Result<Self> {
        if denominator == 0 || numerator >= denominator {
            return Err(Error::InvalidArgument(format!(
                "{numerator}/{denominator} is not in [0, 1)"
            )));
        }
        let g = numerator.gcd(&denominator);
        Ok(RationalCoordinate {
            numerator: numerator / g,
            denominator: denominator / g,
        })
    }

    pub fn numerator(&self) -> u128 {
        self.numerator
    }

    pub fn denominator(&self) -> u128 {
        self.denominator
    }

    /// `floor(base^k * self)`.
    pub fn cell_index(&self, base: u64, k: u32) -> u128 {
        let scale = (base as u128).checked_pow(k);
        if let Some(prod) = scale.and_then(|s| s.checked_mul(self.numerator)) {
            return prod / self.denominator;
        }
        let prod = BigUint::from(base).pow(k) * BigUint::from(self.numerator);
        (prod / BigUint::from(self.denominator))
            .to_u128()
            .expect("cell index exceeds u128")
    }

    pub fn to_f64(&self) -> f64 {
        // Both parts can exceed 2^53; go through the big rational for a
        // correctly rounded result in that case.
        if self.denominator < (1u128 << 53) {
            self.numerator as f64 / self.denominator as f64
        } else {
            self.to_ratio().to_f64().unwrap_or(f64::NAN)
        }
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.numerator),
            BigInt::from(self.denominator),
        )
    }
}

impl PartialOrd for RationalCoordinate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalCoordinate {
    fn cmp(&self, other: &Self) -> Ordering {
        match (
            self.numerator.checked_mul(other.denominator),
            other.numerator.checked_mul(self.denominator),
        ) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.to_ratio().cmp(&other.to_ratio()),
        }
    }
}

impl fmt::Display for RationalCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// One exact coordinate.
#[derive(Clone, Copy, Debug)]
pub enum Coordinate {
    Dyadic(DyadicRational),
    Rational(RationalCoordinate),
}

impl Coordinate {
    pub fn to_f64(&self) -> f64 {
        match self {
            Coordinate::Dyadic(x) => x.to_f64(),
            Coordinate::Rational(x) => x.to_f64(),
        }
    }

    pub fn to_ratio(&self) -> BigRational {
        match self {
            Coordinate::Dyadic(x) => x.to_ratio(),
            Coordinate::Rational(x) => x.to_ratio(),
        }
    }

    /// `floor(base^k * self)`, the index of the base-`base` cell of width
    /// `base^-k` holding this coordinate.
    pub fn cell_index(&self, base: u64, k: u32) -> u128 {
        match self {
            Coordinate::Dyadic(x) if base == 2 => x.cell_index(k),
            Coordinate::Dyadic(x) => {
                let r = RationalCoordinate::new(x.numerator(), 1u128 << x.log2_denominator());
                match r {
                    Ok(r) if x.log2_denominator() < 128 => r.cell_index(base, k),
                    _ => {
                        let v = x.to_ratio() * BigRational::from_integer(BigInt::from(base).pow(k));
                        v.floor().to_integer().to_u128().expect("cell index exceeds u128")
                    }
                }
            }
            Coordinate::Rational(x) => x.cell_index(base, k),
        }
    }

    /// Exact `self < threshold`.
    pub fn lt_ratio(&self, threshold: &BigRational) -> bool {
        self.to_ratio() < *threshold
    }

    /// Exact `self < threshold` against a dyadic threshold.
    pub fn lt_dyadic(&self, threshold: &DyadicRational) -> bool {
        match self {
            Coordinate::Dyadic(x) => x < threshold,
            Coordinate::Rational(_) => self.to_ratio() < threshold.to_ratio(),
        }
    }
}

impl PartialEq for Coordinate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Coordinate {}

impl PartialOrd for Coordinate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Coordinate {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Coordinate::Dyadic(a), Coordinate::Dyadic(b)) => a.cmp(b),
            (Coordinate::Rational(a), Coordinate::Rational(b)) => a.cmp(b),
            _ => self.to_ratio().cmp(&other.to_ratio()),
        }
    }
}

impl From<DyadicRational> for Coordinate {
    fn from(x: DyadicRational) -> Self {
        Coordinate::Dyadic(x)
    }
}

impl From<RationalCoordinate> for Coordinate {
    fn from(x: RationalCoordinate) -> Self {
        Coordinate::Rational(x)
    }
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coordinate::Dyadic(x) => x.fmt(f),
            Coordinate::Rational(x) => x.fmt(f),
        }
    }
}

/// A point of `[0, 1)^d` with exact coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Point {
    coords: Vec<Coordinate>,
}

impl Point {
    pub fn new(coords: Vec<Coordinate>) -> Self {
        Point { coords }
    }

    pub fn origin(dim: usize) -> Self {
        Point {
            coords: vec![Coordinate::Dyadic(DyadicRational::ZERO); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    pub fn coord(&self, j: usize) -> &Coordinate {
        &self.coords[j]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(Coordinate::to_f64).collect()
    }
}

impl From<Vec<Coordinate>> for Point {
    fn from(coords: Vec<Coordinate>) -> Self {
        Point { coords }
    }
}

/// Exact rational for an `f64` (every finite double is a dyadic rational).
pub fn f64_to_ratio(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}
