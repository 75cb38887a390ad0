//! Checkpointed big-`m` tables.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::MRange;
use crate::error::{Error, Result};
use crate::netcount::{netcount_row, truncate, CountOptions, NetcountRow, NETCOUNT_CSV_HEADER};
use crate::sequences::{sobol_point, GeneratorSet};

/// Rows up to this `m` are also counted by enumerating the points.
pub const BRUTE_FORCE_MAX_M: u32 = 16;

/// One table row, checked against the count range, the `d = 1` identity and,
/// for small `m`, direct enumeration.
pub fn bigm_row(
    gens: &GeneratorSet,
    d: usize,
    m: u32,
    alpha: &BigRational,
    opts: CountOptions,
) -> Result<NetcountRow> {
    let row = netcount_row(gens, d, m, alpha, opts)?;
    if row.count > BigUint::one() << m as usize {
        return Err(Error::CheckFailed(format!("count {} exceeds 2^{m}", row.count)));
    }
    if d == 1 && !row.error.numerator.is_zero() {
        return Err(Error::CheckFailed(format!("d = 1 error {} is not zero at m = {m}", row.error)));
    }
    if m <= BRUTE_FORCE_MAX_M {
        let gens = gens.first_dims(d)?.truncated(m)?;
        let a = truncate(alpha, m)?;
        let mut direct = 0u64;
        for i in 0..1u128 << m {
            let p = sobol_point(i, &gens)?;
            if p.coords().iter().all(|x| x.lt_dyadic(&a)) {
                direct += 1;
            }
        }
        if row.count != BigUint::from(direct) {
            return Err(Error::CheckFailed(format!(
                "d = {d}, m = {m}: GF(2) count {} but enumeration gives {direct}",
                row.count
            )));
        }
    }
    Ok(row)
}

fn encode(fields: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields)?;
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("flushing csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of ascii fields"))
}

/// Writes the table for `m` in `range` to `path`, one flushed row per `m`.
///
/// An existing file for the same `d` and `alpha` is resumed: complete rows
/// are kept, a torn last line is dropped and rows past `range.end` are cut,
/// so the result is byte-identical to an uninterrupted run. Returns the
/// number of data rows.
pub fn write_bigm_checkpointed(
    path: &Path,
    gens: &GeneratorSet,
    d: usize,
    range: MRange,
    alpha: &BigRational,
    opts: CountOptions,
) -> Result<usize> {
    let header = encode(&NETCOUNT_CSV_HEADER.map(String::from))?;
    let existing = match fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut keep = 0usize;
    let mut next_m = range.start;
    if existing.starts_with(&header) {
        keep = header.len();
        for line in existing[header.len()..].split_inclusive('\n') {
            if !line.ends_with('\n') || next_m > range.end {
                break;
            }
            let fields: Vec<&str> = line.trim_end().split(',').collect();
            let a = truncate(alpha, next_m)?.numerator_at(next_m).expect("m digits");
            let matches = fields.len() == NETCOUNT_CSV_HEADER.len()
                && fields[0] == d.to_string()
                && fields[1] == next_m.to_string()
                && fields[2] == a.to_string();
            if !matches {
                return Err(Error::CheckFailed(format!(
                    "{} holds rows of a different run; remove it to start over",
                    path.display()
                )));
            }
            keep += line.len();
            next_m += 1;
        }
    } else if !existing.is_empty() && !header.starts_with(existing.as_str()) {
        return Err(Error::CheckFailed(format!(
            "{} is not a big-m table; remove it to start over",
            path.display()
        )));
    }
    let mut file = OpenOptions::new()
        .create(true)
        .write(true)
        .truncate(false)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    if keep == 0 {
        file.set_len(0).map_err(|e| Error::io(path, e))?;
        file.write_all(header.as_bytes()).map_err(|e| Error::io(path, e))?;
    } else {
        file.set_len(keep as u64).map_err(|e| Error::io(path, e))?;
    }
    let mut file = OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    for m in next_m..=range.end {
        let row = bigm_row(gens, d, m, alpha, opts)?;
        let line = encode(&row.to_record())?;
        file.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
        file.flush().map_err(|e| Error::io(path, e))?;
    }
    Ok((range.end - range.start + 1) as usize)
}

/// Streams the table for `m` in `range` to `writer`, flushing every row.
pub fn write_bigm_stream<W: Write>(
    mut writer: W,
    gens: &GeneratorSet,
    d: usize,
    range: MRange,
    alpha: &BigRational,
    opts: CountOptions,
) -> Result<W> {
    let io = |e| Error::io("<stream>", e);
    writer
        .write_all(encode(&NETCOUNT_CSV_HEADER.map(String::from))?.as_bytes())
        .map_err(io)?;
    for m in range.iter() {
        let row = bigm_row(gens, d, m, alpha, opts)?;
        writer.write_all(encode(&row.to_record())?.as_bytes()).map_err(io)?;
        writer.flush().map_err(io)?;
    }
    Ok(writer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{builtin_direction_numbers, sobol_generator_set};

    fn alpha() -> BigRational {
        BigRational::new(2.into(), 3.into())
    }

    fn gens(d: usize) -> GeneratorSet {
        sobol_generator_set(&builtin_direction_numbers(), d, 40).unwrap()
    }

    #[test]
    fn resume_matches_fresh_run() {
        let dir = tempfile::tempdir().unwrap();
        let fresh = dir.path().join("fresh.csv");
        let g = gens(2);
        let opts = CountOptions::default();
        write_bigm_checkpointed(&fresh, &g, 2, MRange::new(1, 24).unwrap(), &alpha(), opts).unwrap();
        let full = fs::read(&fresh).unwrap();

        let part = dir.path().join("part.csv");
        write_bigm_checkpointed(&part, &g, 2, MRange::new(1, 10).unwrap(), &alpha(), opts).unwrap();
        // Tear the last row as an interrupted write would.
        let mut bytes = fs::read(&part).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&part, &bytes).unwrap();
        write_bigm_checkpointed(&part, &g, 2, MRange::new(1, 24).unwrap(), &alpha(), opts).unwrap();
        assert_eq!(fs::read(&part).unwrap(), full);

        // A shorter range cuts the extra rows.
        write_bigm_checkpointed(&part, &g, 2, MRange::new(1, 5).unwrap(), &alpha(), opts).unwrap();
        let short = fs::read_to_string(&part).unwrap();
        assert_eq!(short.lines().count(), 6);
        assert!(String::from_utf8(full).unwrap().starts_with(&short));
    }

    #[test]
    fn refuses_foreign_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let opts = CountOptions::default();
        write_bigm_checkpointed(&p, &gens(3), 3, MRange::new(1, 4).unwrap(), &alpha(), opts).unwrap();
        let r = write_bigm_checkpointed(&p, &gens(2), 2, MRange::new(1, 6).unwrap(), &alpha(), opts);
        assert!(matches!(r, Err(Error::CheckFailed(_))));
        fs::write(&p, "something else\n").unwrap();
        let r = write_bigm_checkpointed(&p, &gens(2), 2, MRange::new(1, 6).unwrap(), &alpha(), opts);
        assert!(matches!(r, Err(Error::CheckFailed(_))));
    }

    #[test]
    fn stream_matches_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let range = MRange::new(1, 12).unwrap();
        let opts = CountOptions::default();
        write_bigm_checkpointed(&p, &gens(3), 3, range, &alpha(), opts).unwrap();
        let streamed = write_bigm_stream(Vec::new(), &gens(3), 3, range, &alpha(), opts).unwrap();
        assert_eq!(fs::read(&p).unwrap(), streamed);
    }

    #[test]
    fn one_dimensional_errors_vanish() {
        let g = gens(1);
        for m in 1..=30 {
            let row = bigm_row(&g, 1, m, &alpha(), CountOptions::default()).unwrap();
            assert!(row.error.numerator.is_zero());
        }
    }
}
