use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, MAX_COLS};

use super::coord::{Coordinate, DyadicRational, Point};
use super::direction::DirectionNumberRecord;

/// Generating matrices of a base-2 digital sequence.
///
/// Matrix `j` maps the digits of an index `i` (column `c` = digit `c` of `i`,
/// least significant first) to the binary digits of coordinate `j` (row `r` =
/// digit `r + 1` after the point).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    precision: u32,
    matrices: Vec<BitMatrix>,
    // Column c of matrix j as a numerator over 2^precision.
    columns: Vec<Vec<u128>>,
    t: Option<u32>,
}

impl GeneratorSet {
    pub fn new(matrices: Vec<BitMatrix>, t: Option<u32>) -> Result<Self> {
        let precision = matrices
            .first()
            .map(BitMatrix::n_cols)
            .ok_or_else(|| Error::InvalidArgument("a generator set needs at least one matrix".into()))?;
        for m in &matrices {
            if !m.is_square() || m.n_cols() != precision {
                return Err(Error::InvalidArgument(format!(
                    "generating matrices must all be {precision}x{precision}"
                )));
            }
        }
        let columns = matrices
            .iter()
            .map(|mat| {
                (0..precision)
                    .map(|c| {
                        (0..precision as usize).fold(0u128, |acc, r| {
                            if mat.get(r, c) {
                                acc | (1u128 << (precision as usize - 1 - r))
                            } else {
                                acc
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(GeneratorSet {
            precision,
            matrices,
            columns,
            t,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrices.len()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn matrices(&self) -> &[BitMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, j: usize) -> &BitMatrix {
        &self.matrices[j]
    }

    pub fn declared_t(&self) -> Option<u32> {
        self.t
    }

    /// Leading `m x m` blocks, which generate the first `2^m` points to `m`
    /// digits.
    pub fn truncated(&self, m: u32) -> Result<Self> {
        if m == 0 || m > self.precision {
            return Err(Error::Precision {
                requested: m,
                max: self.precision,
            });
        }
        let matrices = self
            .matrices
            .iter()
            .map(|mat| mat.leading(m as usize, m))
            .collect::<Result<_>>()?;
        GeneratorSet::new(matrices, self.t)
    }

    /// Leading `d` coordinates.
    pub fn first_dims(&self, d: usize) -> Result<Self> {
        if d == 0 || d > self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: d,
            });
        }
        GeneratorSet::new(self.matrices[..d].to_vec(), self.t)
    }

    /// Numerator over `2^precision` of coordinate `j` of point `i`.
    pub(crate) fn coordinate_numerator(&self, i: u128, j: usize) -> u128 {
        let cols = &self.columns[j];
        let mut rest = i;
        let mut acc = 0u128;
        while rest != 0 {
            let c = rest.trailing_zeros() as usize;
            acc ^= cols[c];
            rest &= rest - 1;
        }
        acc
    }
}

/// Direction-number integers `m_1 .. m_count` for one record.
fn direction_integers(rec: &DirectionNumberRecord, count: u32) -> Vec<u128> {
    let s = rec.degree as usize;
    let mut m: Vec<u128> = rec.initial.iter().copied().take(count as usize).collect();
    for i in s..count as usize {
        let mut next = m[i - s] ^ (m[i - s] << s);
        for k in 1..s {
            if (rec.coefficients >> (s - 1 - k)) & 1 == 1 {
                next ^= m[i - k] << k;
            }
        }
        m.push(next);
    }
    m
}

/// Sobol' generating matrices for the first `d` dimensions at precision `m`.
///
/// Dimension 1 is the identity. For dimension `j >= 2`, column `c` holds the
/// binary digits of `v_c = m_c / 2^c`, where the `m_c` follow the usual
/// primitive-polynomial recurrence seeded by the record's initial values.
pub fn sobol_generator_set(
    records: &[DirectionNumberRecord],
    d: usize,
    m: u32,
) -> Result<GeneratorSet> {
    if m == 0 || m > MAX_COLS {
        return Err(Error::Precision {
            requested: m,
            max: MAX_COLS,
        });
    }
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut matrices = vec![BitMatrix::identity(m)?];
    for dim in 2..=d {
        let rec = records
            .iter()
            .find(|r| r.dimension == dim)
            .ok_or(Error::MissingDimension(dim))?;
        let ints = direction_integers(rec, m);
        let mut mat = BitMatrix::zeros(m as usize, m)?;
        for (c, &mc) in ints.iter().enumerate() {
            // v_{c+1} = mc / 2^{c+1}; digit r+1 of v is bit (c - r) of mc.
            for r in 0..=c {
                if (mc >> (c - r)) & 1 == 1 {
                    mat.set(r, c as u32, true);
                }
            }
        }
        matrices.push(mat);
    }
    GeneratorSet::new(matrices, None)
}

/// Point `i` of the digital sequence, exact to `gens.precision()` digits.
pub fn sobol_point(i: u128, gens: &GeneratorSet) -> Result<Point> {
    let m = gens.precision();
    if m < 128 && i >> m != 0 {
        return Err(Error::IndexOutOfRange {
            index: i,
            precision: m,
        });
    }
    let coords = (0..gens.dim())
        .map(|j| {
            let num = gens.coordinate_numerator(i, j);
            Coordinate::Dyadic(DyadicRational::new(num, m).expect("numerator below 2^m"))
        })
        .collect();
    Ok(Point::new(coords))
}
