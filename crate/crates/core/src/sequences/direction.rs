//! Reader for Sobol' direction numbers in the Joe–Kuo text format.
//!
//! The file starts with one header line, followed by one line per dimension:
//! `d s a m_1 ... m_s`, whitespace separated. Dimension 1 is the van der
//! Corput sequence and has no line.

use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};

/// Environment variable naming an alternative direction-number file.
pub const DIRECTION_NUMBERS_ENV: &str = "QMCLAB_DIRECTION_NUMBERS";

/// Joe–Kuo `new-joe-kuo-6` direction numbers for dimensions 2..=50.
pub const BUILTIN_DIRECTION_NUMBERS: &str = include_str!("../../data/new-joe-kuo-6.50");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionNumberRecord {
    /// 1-based dimension index, at least 2.
    pub dimension: usize,
    /// Degree `s` of the primitive polynomial.
    pub degree: u32,
    /// Interior coefficients of the polynomial packed as an integer, `a_1`
    /// in the most significant of its `s - 1` bits.
    pub coefficients: u64,
    /// Initial odd integers `m_1 .. m_s` with `m_i < 2^i`.
    pub initial: Vec<u128>,
}

pub fn load_direction_numbers<R: BufRead>(reader: R) -> Result<Vec<DirectionNumberRecord>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::DirectionNumbers {
            line: lineno,
            message: e.to_string(),
        })?;
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        records.push(parse_line(&line, lineno)?);
    }
    Ok(records)
}

pub fn parse_direction_numbers(text: &str) -> Result<Vec<DirectionNumberRecord>> {
    load_direction_numbers(text.as_bytes())
}

pub fn builtin_direction_numbers() -> Vec<DirectionNumberRecord> {
    parse_direction_numbers(BUILTIN_DIRECTION_NUMBERS).expect("bundled direction numbers parse")
}

/// Direction numbers from the file named by [`DIRECTION_NUMBERS_ENV`], or the
/// bundled table when it is unset.
pub fn direction_numbers_from_env() -> Result<Vec<DirectionNumberRecord>> {
    match std::env::var_os(DIRECTION_NUMBERS_ENV) {
        Some(path) => load_direction_file(Path::new(&path)),
        None => Ok(builtin_direction_numbers()),
    }
}

pub fn load_direction_file(path: &Path) -> Result<Vec<DirectionNumberRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_direction_numbers(std::io::BufReader::new(file))
}

fn parse_line(line: &str, lineno: usize) -> Result<DirectionNumberRecord> {
    let bad = |message: String| Error::DirectionNumbers {
        line: lineno,
        message,
    };
    let fields: Vec<u128> = line
        .split_whitespace()
        .map(|f| {
            f.parse::<u128>()
                .map_err(|_| bad(format!("'{f}' is not a nonnegative integer")))
        })
        .collect::<Result<_>>()?;
    if fields.len() < 4 {
        return Err(bad(format!("expected 'd s a m_1 ... m_s', got {} fields", fields.len())));
    }
    let dimension = fields[0] as usize;
    let degree = fields[1];
    let coefficients = fields[2];
    if dimension < 2 {
        return Err(bad(format!("dimension {dimension} must be at least 2")));
    }
    if degree == 0 || degree > 64 {
        return Err(bad(format!("unsupported degree {degree}")));
    }
    let degree = degree as u32;
    let initial = fields[3..].to_vec();
    if initial.len() != degree as usize {
        return Err(bad(format!(
            "degree {degree} needs {degree} initial values, found {}",
            initial.len()
        )));
    }
    if coefficients >> (degree - 1) != 0 {
        return Err(bad(format!(
            "coefficient {coefficients} has more than {} bits",
            degree - 1
        )));
    }
    for (k, &m) in initial.iter().enumerate() {
        let i = k as u32 + 1;
        if m % 2 == 0 {
            return Err(bad(format!("m_{i} = {m} is even")));
        }
        if m >> i != 0 {
            return Err(bad(format!("m_{i} = {m} is not below 2^{i}")));
        }
    }
    Ok(DirectionNumberRecord {
        dimension,
        degree,
        coefficients: coefficients as u64,
        initial,
    })
}
