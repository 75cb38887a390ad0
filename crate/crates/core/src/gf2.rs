//! Dense bit matrices over GF(2) with one `u128` word per row.
//!
//! Column `c` of a row is bit `c` of the word, so matrices have at most 128
//! columns. That covers every precision the generators support.

use std::fmt;

use crate::error::{Error, Result};

pub const MAX_COLS: u32 = 128;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: Vec<u128>,
    cols: u32,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: u32) -> Result<Self> {
        check_cols(cols)?;
        Ok(BitMatrix {
            rows: vec![0; rows],
            cols,
        })
    }

    pub fn identity(m: u32) -> Result<Self> {
        check_cols(m)?;
        Ok(BitMatrix {
            rows: (0..m).map(|r| 1u128 << r).collect(),
            cols: m,
        })
    }

    /// Builds a matrix from packed rows; bits at or above `cols` must be clear.
    pub fn from_rows(rows: Vec<u128>, cols: u32) -> Result<Self> {
        check_cols(cols)?;
        let mask = col_mask(cols);
        if let Some(r) = rows.iter().position(|&w| w & !mask != 0) {
            return Err(Error::InvalidArgument(format!(
                "row {r} has bits beyond column {cols}"
            )));
        }
        Ok(BitMatrix { rows, cols })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> u32 {
        self.cols
    }

    pub fn rows(&self) -> &[u128] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> u128 {
        self.rows[r]
    }

    pub fn get(&self, r: usize, c: u32) -> bool {
        (self.rows[r] >> c) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: u32, value: bool) {
        assert!(c < self.cols, "column {c} out of range");
        if value {
            self.rows[r] |= 1 << c;
        } else {
            self.rows[r] &= !(1 << c);
        }
    }

    pub fn push_row(&mut self, row: u128) {
        debug_assert_eq!(row & !col_mask(self.cols), 0);
        self.rows.push(row);
    }

    /// Column `c` packed with row `r` at bit `r`; needs at most 128 rows.
    pub fn column(&self, c: u32) -> u128 {
        assert!(self.rows.len() <= 128);
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (r, &w)| acc | (((w >> c) & 1) << r))
    }

    /// `self * x` over GF(2); bit `r` of the result is row `r` dotted with `x`.
    pub fn mul_vec(&self, x: u128) -> u128 {
        assert!(self.rows.len() <= 128);
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (r, &w)| acc | (((w & x).count_ones() as u128 & 1) << r))
    }

    /// Leading `rows x cols` block.
    pub fn leading(&self, rows: usize, cols: u32) -> Result<Self> {
        if rows > self.rows.len() || cols > self.cols {
            return Err(Error::InvalidArgument(format!(
                "cannot take a {rows}x{cols} block of a {}x{} matrix",
                self.rows.len(),
                self.cols
            )));
        }
        let mask = col_mask(cols);
        Ok(BitMatrix {
            rows: self.rows[..rows].iter().map(|w| w & mask).collect(),
            cols,
        })
    }

    pub fn is_square(&self) -> bool {
        self.rows.len() == self.cols as usize
    }

    /// Square, zero below the diagonal and ones on it.
    pub fn is_unit_upper_triangular(&self) -> bool {
        self.is_square()
            && self
                .rows
                .iter()
                .enumerate()
                .all(|(r, &w)| (w >> r) & 1 == 1 && w & ((1u128 << r) - 1) == 0)
    }

    pub fn rank(&self) -> u32 {
        let mut basis = Echelon::new();
        for &w in &self.rows {
            basis.insert(w, false);
        }
        basis.rank()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows.len(), self.cols)?;
        for &w in &self.rows {
            let line: String = (0..self.cols)
                .map(|c| if (w >> c) & 1 == 1 { '1' } else { '0' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

pub(crate) fn col_mask(cols: u32) -> u128 {
    if cols >= 128 {
        u128::MAX
    } else {
        (1u128 << cols) - 1
    }
}

fn check_cols(cols: u32) -> Result<()> {
    if cols > MAX_COLS {
        Err(Error::Precision {
            requested: cols,
            max: MAX_COLS,
        })
    } else {
        Ok(())
    }
}

/// Row echelon basis of an augmented system `C i = a` over GF(2), grown one
/// equation at a time.
///
/// Each stored row has its highest set bit at its pivot column. Inserting a
/// row reduces it against the pivots from the top down; a row that reduces to
/// zero with right-hand side one makes the system inconsistent.
#[derive(Clone)]
pub struct Echelon {
    rows: [u128; 128],
    present: u128,
    rhs: u128,
    rank: u32,
    consistent: bool,
}

impl Default for Echelon {
    fn default() -> Self {
        Self::new()
    }
}

impl Echelon {
    pub fn new() -> Self {
        Echelon {
            rows: [0; 128],
            present: 0,
            rhs: 0,
            rank: 0,
            consistent: true,
        }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn is_consistent(&self) -> bool {
        self.consistent
    }

    pub fn insert(&mut self, mut row: u128, mut rhs: bool) {
        if !self.consistent {
            return;
        }
        while row != 0 {
            let p = 127 - row.leading_zeros();
            if (self.present >> p) & 1 == 1 {
                row ^= self.rows[p as usize];
                rhs ^= (self.rhs >> p) & 1 == 1;
            } else {
                self.rows[p as usize] = row;
                self.present |= 1 << p;
                if rhs {
                    self.rhs |= 1 << p;
                }
                self.rank += 1;
                return;
            }
        }
        if rhs {
            self.consistent = false;
        }
    }
}
