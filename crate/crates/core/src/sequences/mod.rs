//! Exact low-discrepancy sequences: van der Corput, Halton and Sobol'.
//!
//! Points are 0-based (`x_0, x_1, ...`) and carry exact coordinates; floating
//! point only appears when a caller asks for it.

mod coord;
mod direction;
mod net;
mod sobol;

pub use coord::{
    f64_to_ratio, Coordinate, DyadicRational, Point, RationalCoordinate, MAX_DYADIC_BITS,
};
pub use direction::{
    builtin_direction_numbers, direction_numbers_from_env, load_direction_numbers,
    parse_direction_numbers, DirectionNumberRecord, BUILTIN_DIRECTION_NUMBERS,
    DIRECTION_NUMBERS_ENV,
};
pub use net::{compositions, is_tmd_net, smallest_t, ElementaryInterval};
pub use sobol::{sobol_generator_set, sobol_point, GeneratorSet};

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Digit reversal of `i` in base `b`: `sum_k i_k b^-k` where `i = sum_k i_k b^(k-1)`.
pub fn radical_inverse(i: u64, base: u64) -> Result<RationalCoordinate> {
    if base < 2 {
        return Err(Error::InvalidBase(base));
    }
    let b = base as u128;
    let mut rest = i as u128;
    let mut numerator: u128 = 0;
    let mut denominator: u128 = 1;
    while rest > 0 {
        numerator = numerator * b + rest % b;
        denominator *= b;
        rest /= b;
    }
    RationalCoordinate::new(numerator, denominator)
}

/// Base-2 van der Corput point as an exact dyadic.
pub fn van_der_corput(i: u64) -> DyadicRational {
    let bits = 64 - i.leading_zeros();
    let reversed = if bits == 0 {
        0
    } else {
        (i.reverse_bits() >> (64 - bits)) as u128
    };
    DyadicRational::new(reversed, bits).expect("digit reversal is in [0, 1)")
}

pub fn check_bases(bases: &[u64]) -> Result<()> {
    for (a, &p) in bases.iter().enumerate() {
        if p < 2 {
            return Err(Error::InvalidBase(p));
        }
        for &q in &bases[a + 1..] {
            if p.gcd(&q) != 1 {
                return Err(Error::NonCoprimeBases(p, q));
            }
        }
    }
    Ok(())
}

/// Halton point: coordinate `j` is the radical inverse of `i` in `bases[j]`.
pub fn halton_point(i: u64, bases: &[u64]) -> Result<Point> {
    check_bases(bases)?;
    bases
        .iter()
        .map(|&b| radical_inverse(i, b).map(Coordinate::from))
        .collect::<Result<Vec<_>>>()
        .map(Point::new)
}

/// The first `d` primes, the usual Halton bases.
pub fn first_primes(d: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(d);
    let mut candidate = 2u64;
    while primes.len() < d {
        if primes.iter().all(|p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// Which sequence an experiment draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    #[serde(rename = "vdc")]
    VanDerCorput,
    Halton,
    Sobol,
}

impl FromStr for SequenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vdc" | "van-der-corput" => Ok(SequenceKind::VanDerCorput),
            "halton" => Ok(SequenceKind::Halton),
            "sobol" => Ok(SequenceKind::Sobol),
            other => Err(Error::InvalidArgument(format!("unknown sequence '{other}'"))),
        }
    }
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SequenceKind::VanDerCorput => "vdc",
            SequenceKind::Halton => "halton",
            SequenceKind::Sobol => "sobol",
        })
    }
}

/// A concrete sequence ready to emit points.
#[derive(Clone, Debug)]
pub enum Sequence {
    /// One-dimensional van der Corput in the given base.
    VanDerCorput { base: u64 },
    Halton { bases: Vec<u64> },
    Sobol(GeneratorSet),
}

impl Sequence {
    /// Builds a `d`-dimensional sequence able to emit at least `capacity`
    /// points. Sobol' uses the given direction numbers.
    pub fn build(
        kind: SequenceKind,
        d: usize,
        capacity: u64,
        records: &[DirectionNumberRecord],
    ) -> Result<Self> {
        match kind {
            SequenceKind::VanDerCorput => {
                if d != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        actual: d,
                    });
                }
                Ok(Sequence::VanDerCorput { base: 2 })
            }
            SequenceKind::Halton => Ok(Sequence::Halton {
                bases: first_primes(d),
            }),
            SequenceKind::Sobol => {
                let bits = bits_for(capacity);
                Ok(Sequence::Sobol(sobol_generator_set(records, d, bits)?))
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Sequence::VanDerCorput { .. } => 1,
            Sequence::Halton { bases } => bases.len(),
            Sequence::Sobol(g) => g.dim(),
        }
    }

    pub fn point(&self, i: u64) -> Result<Point> {
        match self {
            Sequence::VanDerCorput { base: 2 } => {
                Ok(Point::new(vec![Coordinate::Dyadic(van_der_corput(i))]))
            }
            Sequence::VanDerCorput { base } => {
                Ok(Point::new(vec![radical_inverse(i, *base)?.into()]))
            }
            Sequence::Halton { bases } => halton_point(i, bases),
            Sequence::Sobol(g) => sobol_point(i as u128, g),
        }
    }

    /// The first `n` points.
    pub fn points(&self, n: u64) -> Result<Vec<Point>> {
        (0..n).map(|i| self.point(i)).collect()
    }
}

/// Smallest `m >= 1` with `2^m >= n`.
pub fn bits_for(n: u64) -> u32 {
    if n <= 2 {
        1
    } else {
        64 - (n - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rc(n: u128, d: u128) -> RationalCoordinate {
        RationalCoordinate::new(n, d).unwrap()
    }

    #[test]
    fn radical_inverse_examples() {
        assert_eq!(radical_inverse(0, 2).unwrap(), rc(0, 1));
        assert_eq!(radical_inverse(3, 2).unwrap(), rc(3, 4));
        assert_eq!(radical_inverse(5, 3).unwrap(), rc(7, 9));
        assert!(matches!(radical_inverse(5, 1), Err(Error::InvalidBase(1))));
    }

    #[test]
    fn halton_examples() {
        let p = halton_point(1, &[2, 3]).unwrap();
        assert_eq!(p.coords()[0], Coordinate::from(rc(1, 2)));
        assert_eq!(p.coords()[1], Coordinate::from(rc(1, 3)));
        assert_eq!(halton_point(0, &[2, 3]).unwrap(), Point::origin(2));
        let p = halton_point(5, &[2, 3]).unwrap();
        assert_eq!(p.coords()[0], Coordinate::from(rc(5, 8)));
        assert_eq!(p.coords()[1], Coordinate::from(rc(7, 9)));
    }

    #[test]
    fn halton_rejects_bad_bases() {
        assert!(matches!(
            halton_point(3, &[2, 4]),
            Err(Error::NonCoprimeBases(2, 4))
        ));
        assert!(matches!(halton_point(3, &[1, 3]), Err(Error::InvalidBase(1))));
    }

    #[test]
    fn dyadic_van_der_corput_matches_radical_inverse() {
        for i in 0..5000u64 {
            let a = Coordinate::Dyadic(van_der_corput(i));
            let b = Coordinate::Rational(radical_inverse(i, 2).unwrap());
            assert_eq!(a, b, "i = {i}");
        }
    }

    #[test]
    fn van_der_corput_prefix_is_left_endpoint_rule() {
        for base in 2..=5u64 {
            for m in 0..=12u32 {
                let n = base.pow(m);
                if n > 1 << 14 {
                    break;
                }
                let mut seen: Vec<u128> = (0..n)
                    .map(|i| {
                        let x = radical_inverse(i, base).unwrap();
                        x.cell_index(base, m)
                    })
                    .collect();
                seen.sort_unstable();
                // Each cell index equals the exact numerator over base^m, so a
                // permutation of 0..n means the set is exactly {i / base^m}.
                let expected: Vec<u128> = (0..n as u128).collect();
                assert_eq!(seen, expected, "base {base}, m {m}");
                for i in 0..n {
                    let x = radical_inverse(i, base).unwrap();
                    assert_eq!(n as u128 % x.denominator(), 0);
                }
            }
        }
    }

    #[test]
    fn primes_and_bits() {
        assert_eq!(first_primes(5), vec![2, 3, 5, 7, 11]);
        assert_eq!(bits_for(1), 1);
        assert_eq!(bits_for(2), 1);
        assert_eq!(bits_for(3), 2);
        assert_eq!(bits_for(16), 4);
        assert_eq!(bits_for(17), 5);
    }

    #[test]
    fn sequence_kind_parses() {
        assert_eq!("sobol".parse::<SequenceKind>().unwrap(), SequenceKind::Sobol);
        assert_eq!("vdc".parse::<SequenceKind>().unwrap(), SequenceKind::VanDerCorput);
        assert!("faure".parse::<SequenceKind>().is_err());
    }
}
