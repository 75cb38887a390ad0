//! Running integration-error traces, record detection and the exact
//! one-dimensional van der Corput results.

mod vdc;

pub use vdc::{
    alternation_count, binary_digits, corollary1_fraction, integrated_discrepancy,
    local_discrepancy, n_delta_trace, n_l, prop2_check, vdc_prefix_sum, Prop2Check,
};

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::integrands::{ExactMean, IntegrandSpec};
use crate::sequences::Sequence;

/// Largest `N` for which traces accumulate in exact rational arithmetic.
pub const EXACT_LIMIT: u64 = 1 << 22;

/// An exact rational or a double.
#[derive(Clone, Debug, PartialEq)]
pub enum TraceValue {
    Exact(BigRational),
    Real(f64),
}

impl TraceValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            TraceValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            TraceValue::Real(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            TraceValue::Exact(r) => Some(r),
            TraceValue::Real(_) => None,
        }
    }

    /// Exact when both sides are exact, otherwise by value as doubles.
    pub fn compare(&self, other: &TraceValue) -> Option<Ordering> {
        match (self, other) {
            (TraceValue::Exact(a), TraceValue::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for TraceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceValue::Exact(r) => write!(f, "{r}"),
            TraceValue::Real(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub n: u64,
    pub mean: TraceValue,
    /// `mean - mu`.
    pub signed_error: TraceValue,
    /// `n |mean - mu|`.
    pub scaled_error: TraceValue,
    /// `n |mean - mu| / log n`, absent at `n = 1`.
    pub log_scaled_error: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arithmetic {
    /// Exact when the integrand allows it and `N <= EXACT_LIMIT`.
    Auto,
    Exact,
    Float,
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

enum Accumulator {
    Exact { sum: BigRational, mu: BigRational },
    Float { sum: CompensatedSum, mu: f64 },
}

/// Streams the trace entries `n = 1..=N` of one sequence and integrand.
pub struct RunningTrace<'a> {
    seq: &'a Sequence,
    f: &'a IntegrandSpec,
    n_max: u64,
    next: u64,
    acc: Accumulator,
}

impl<'a> RunningTrace<'a> {
    pub fn new(
        seq: &'a Sequence,
        f: &'a IntegrandSpec,
        n_max: u64,
        arithmetic: Arithmetic,
    ) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidArgument("a trace needs N >= 1".into()));
        }
        if seq.dim() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                actual: seq.dim(),
            });
        }
        let mean = f.true_mean();
        let exact_possible = f.is_exact() && mean.as_exact().is_some();
        let exact = match arithmetic {
            Arithmetic::Auto => exact_possible && n_max <= EXACT_LIMIT,
            Arithmetic::Exact if !exact_possible => {
                return Err(Error::InvalidIntegrand(format!("{f} has no exact evaluation")))
            }
            Arithmetic::Exact => true,
            Arithmetic::Float => false,
        };
        let acc = match (exact, mean) {
            (true, ExactMean::Exact(mu)) => Accumulator::Exact {
                sum: BigRational::zero(),
                mu,
            },
            (_, m) => Accumulator::Float {
                sum: CompensatedSum::default(),
                mu: m.to_f64(),
            },
        };
        Ok(RunningTrace {
            seq,
            f,
            n_max,
            next: 0,
            acc,
        })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.acc, Accumulator::Exact { .. })
    }

    fn step(&mut self) -> Result<TraceEntry> {
        let x = self.seq.point(self.next)?;
        self.next += 1;
        let n = self.next;
        let log_scaled = |scaled: f64| (n > 1).then(|| scaled / (n as f64).ln());
        match &mut self.acc {
            Accumulator::Exact { sum, mu } => {
                let v = self
                    .f
                    .evaluate_exact(&x)?
                    .expect("exact accumulation requires an exact integrand");
                *sum += v;
                let nn = BigRational::from_integer(BigInt::from(n));
                let diff = &*sum - &nn * &*mu;
                let scaled = diff.abs();
                let scaled_f = scaled.to_f64().unwrap_or(f64::NAN);
                Ok(TraceEntry {
                    n,
                    mean: TraceValue::Exact(&*sum / &nn),
                    signed_error: TraceValue::Exact(diff / nn),
                    scaled_error: TraceValue::Exact(scaled),
                    log_scaled_error: log_scaled(scaled_f),
                })
            }
            Accumulator::Float { sum, mu } => {
                sum.add(self.f.evaluate(&x)?);
                let mean = sum.value() / n as f64;
                let err = mean - *mu;
                let scaled = n as f64 * err.abs();
                Ok(TraceEntry {
                    n,
                    mean: TraceValue::Real(mean),
                    signed_error: TraceValue::Real(err),
                    scaled_error: TraceValue::Real(scaled),
                    log_scaled_error: log_scaled(scaled),
                })
            }
        }
    }
}

impl Iterator for RunningTrace<'_> {
    type Item = Result<TraceEntry>;

    fn next(&mut self) -> Option<Self::Item> {
        (self.next < self.n_max).then(|| self.step())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorTrace {
    entries: Vec<TraceEntry>,
    exact: bool,
}

impl ErrorTrace {
    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Entry for sample size `n`.
    pub fn at(&self, n: u64) -> Option<&TraceEntry> {
        self.entries.get(n.checked_sub(1)? as usize)
    }

    pub fn records(&self, scaling: Scaling) -> RecordSet {
        records(&self.entries, scaling)
    }
}

/// Full trace for `n = 1..=N`.
pub fn running_trace(seq: &Sequence, f: &IntegrandSpec, n_max: u64) -> Result<ErrorTrace> {
    running_trace_with(seq, f, n_max, Arithmetic::Auto)
}

pub fn running_trace_with(
    seq: &Sequence,
    f: &IntegrandSpec,
    n_max: u64,
    arithmetic: Arithmetic,
) -> Result<ErrorTrace> {
    let it = RunningTrace::new(seq, f, n_max, arithmetic)?;
    let exact = it.is_exact();
    let entries = it.collect::<Result<Vec<_>>>()?;
    Ok(ErrorTrace { entries, exact })
}

/// Which scaled error a record refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scaling {
    /// `n |mean - mu|`
    N,
    /// `n |mean - mu| / log n`
    NOverLog,
}

impl FromStr for Scaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(Scaling::N),
            "n/log" | "n-over-log" | "log" => Ok(Scaling::NOverLog),
            other => Err(Error::InvalidArgument(format!("unknown scaling '{other}'"))),
        }
    }
}

/// Sample sizes at which the scaled error strictly exceeds every earlier value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordSet {
    pub scaling: Scaling,
    pub ns: Vec<u64>,
}

impl RecordSet {
    pub fn contains(&self, n: u64) -> bool {
        self.ns.binary_search(&n).is_ok()
    }

    pub fn len(&self) -> usize {
        self.ns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ns.is_empty()
    }

    pub fn last(&self) -> Option<u64> {
        self.ns.last().copied()
    }
}

/// Online record detection over a stream of entries.
#[derive(Clone, Debug)]
pub struct RecordTracker {
    scaling: Scaling,
    best: Option<TraceValue>,
}

impl RecordTracker {
    pub fn new(scaling: Scaling) -> Self {
        RecordTracker {
            scaling,
            best: None,
        }
    }

    /// Whether `entry` sets a new record. Ties are not records.
    pub fn observe(&mut self, entry: &TraceEntry) -> bool {
        let value = match self.scaling {
            Scaling::N => entry.scaled_error.clone(),
            Scaling::NOverLog => match entry.log_scaled_error {
                Some(v) => TraceValue::Real(v),
                None => return false,
            },
        };
        let is_record = match &self.best {
            None => true,
            Some(best) => value.compare(best) == Some(Ordering::Greater),
        };
        if is_record {
            self.best = Some(value);
        }
        is_record
    }
}

pub fn records(entries: &[TraceEntry], scaling: Scaling) -> RecordSet {
    let mut tracker = RecordTracker::new(scaling);
    let ns = entries
        .iter()
        .filter(|e| tracker.observe(e))
        .map(|e| e.n)
        .collect();
    RecordSet { scaling, ns }
}

/// Positions of strict running maxima in a plain sequence of values.
pub fn record_positions<T: PartialOrd>(values: &[T]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut best: Option<&T> = None;
    for (i, v) in values.iter().enumerate() {
        if best.map_or(true, |b| v > b) {
            out.push(i);
            best = Some(v);
        }
    }
    out
}

pub const TRACE_CSV_HEADER: [&str; 6] = [
    "n",
    "mean",
    "signed_error",
    "scaled_error",
    "log_scaled_error",
    "is_record",
];

/// Streams trace rows as CSV, flagging records under one scaling.
pub struct TraceCsvWriter<W: Write> {
    inner: csv::Writer<W>,
    tracker: RecordTracker,
}

impl<W: Write> TraceCsvWriter<W> {
    pub fn new(writer: W, scaling: Scaling) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(TRACE_CSV_HEADER)?;
        Ok(TraceCsvWriter {
            inner,
            tracker: RecordTracker::new(scaling),
        })
    }

    /// Writes one row and returns whether it was a record.
    pub fn write(&mut self, e: &TraceEntry) -> Result<bool> {
        let record = self.tracker.observe(e);
        self.inner.write_record([
            e.n.to_string(),
            e.mean.to_f64().to_string(),
            e.signed_error.to_f64().to_string(),
            e.scaled_error.to_f64().to_string(),
            e.log_scaled_error.map(|v| v.to_string()).unwrap_or_default(),
            u8::from(record).to_string(),
        ])?;
        Ok(record)
    }

    pub fn finish(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::InvalidArgument(format!("flushing csv: {e}")))
    }
}

pub fn write_trace_csv<W: Write>(writer: W, entries: &[TraceEntry], scaling: Scaling) -> Result<W> {
    let mut w = TraceCsvWriter::new(writer, scaling)?;
    for e in entries {
        w.write(e)?;
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::IntegrandSpec;
    use crate::sequences::{builtin_direction_numbers, SequenceKind};

    fn q(p: i64, r: i64) -> BigRational {
        BigRational::new(p.into(), r.into())
    }

    fn vdc() -> Sequence {
        Sequence::VanDerCorput { base: 2 }
    }

    #[test]
    fn linear_trace_example() {
        let f = IntegrandSpec::linear();
        let t = running_trace(&vdc(), &f, 4).unwrap();
        assert!(t.is_exact());
        let e = t.at(4).unwrap();
        assert_eq!(e.mean, TraceValue::Exact(q(3, 8)));
        assert_eq!(e.scaled_error, TraceValue::Exact(q(1, 2)));
        assert_eq!(e.signed_error, TraceValue::Exact(q(-1, 8)));
        assert!(t.at(1).unwrap().log_scaled_error.is_none());
        assert!(t.at(0).is_none());
    }

    #[test]
    fn indicator_trace_example() {
        let f = IntegrandSpec::parse("box:2/3", 1).unwrap();
        let t = running_trace(&vdc(), &f, 1).unwrap();
        assert_eq!(t.at(1).unwrap().mean, TraceValue::Exact(q(1, 1)));
        assert_eq!(t.at(1).unwrap().scaled_error, TraceValue::Exact(q(1, 3)));
    }

    #[test]
    fn halton_centered_product_starts_at_a_quarter() {
        let f = IntegrandSpec::centered_product(2).unwrap();
        let seq = Sequence::Halton { bases: vec![2, 3] };
        let t = running_trace(&seq, &f, 64).unwrap();
        assert_eq!(t.at(1).unwrap().scaled_error, TraceValue::Exact(q(1, 4)));
        // The origin and (1/2, 1/3) give a running sum of exactly 1/4 at n = 2.
        assert_eq!(t.at(2).unwrap().scaled_error, TraceValue::Exact(q(1, 4)));
        for e in &t.entries()[2..] {
            assert!(e.scaled_error.to_f64() < 0.25, "n = {}", e.n);
        }
    }

    #[test]
    fn exact_mean_times_n_is_the_running_sum() {
        let f = IntegrandSpec::parse("centered-indicator:2/3,3/5", 2).unwrap();
        let seq = Sequence::Halton { bases: vec![2, 3] };
        let t = running_trace(&seq, &f, 200).unwrap();
        let mut sum = BigRational::zero();
        for (i, e) in t.entries().iter().enumerate() {
            sum += f.evaluate_exact(&seq.point(i as u64).unwrap()).unwrap().unwrap();
            let mean = e.mean.as_exact().unwrap();
            assert_eq!(mean * BigRational::from_integer(e.n.into()), sum);
        }
    }

    #[test]
    fn float_path_tracks_exact_path() {
        let recs = builtin_direction_numbers();
        let seq = Sequence::build(SequenceKind::Sobol, 2, 4096, &recs).unwrap();
        let f = IntegrandSpec::centered_product(2).unwrap();
        let exact = running_trace_with(&seq, &f, 4096, Arithmetic::Exact).unwrap();
        let float = running_trace_with(&seq, &f, 4096, Arithmetic::Float).unwrap();
        assert!(!float.is_exact());
        for (a, b) in exact.entries().iter().zip(float.entries()) {
            assert!((a.scaled_error.to_f64() - b.scaled_error.to_f64()).abs() < 1e-9);
        }
    }

    #[test]
    fn power_product_runs_in_floating_point() {
        let seq = Sequence::Halton { bases: vec![2, 3] };
        let f = IntegrandSpec::power_product(0.5, 2).unwrap();
        let t = running_trace(&seq, &f, 100).unwrap();
        assert!(!t.is_exact());
        assert!(running_trace_with(&seq, &f, 10, Arithmetic::Exact).is_err());
    }

    #[test]
    fn dimension_mismatch_and_empty_trace_are_errors() {
        let f = IntegrandSpec::centered_product(2).unwrap();
        assert!(matches!(
            running_trace(&vdc(), &f, 4),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(running_trace(&vdc(), &IntegrandSpec::linear(), 0).is_err());
    }

    #[test]
    fn record_position_examples() {
        assert_eq!(record_positions(&[3, 3, 3, 3]), vec![0]);
        assert_eq!(record_positions(&[1, 2, 3, 4, 5]), vec![0, 1, 2, 3, 4]);
        assert_eq!(record_positions(&[2, 1, 2, 3, 3, 1, 4]), vec![0, 3, 6]);
        assert!(record_positions::<f64>(&[]).is_empty());
    }

    #[test]
    fn n_l_values_are_records_of_the_linear_trace() {
        let t = running_trace(&vdc(), &IntegrandSpec::linear(), 1 << 10).unwrap();
        let rec = t.records(Scaling::N);
        for l in 0..5 {
            assert!(rec.contains(n_l(l).unwrap() as u64), "n_{l}");
        }
        let rec_log = t.records(Scaling::NOverLog);
        assert_eq!(rec_log.ns[0], 2);
    }

    #[test]
    fn csv_has_fixed_columns_and_record_flags() {
        let t = running_trace(&vdc(), &IntegrandSpec::linear(), 5).unwrap();
        let out = write_trace_csv(Vec::new(), t.entries(), Scaling::N).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,mean,signed_error,scaled_error,log_scaled_error,is_record");
        assert_eq!(lines[1], "1,0,-0.5,0.5,,1");
        assert_eq!(lines[4], "4,0.375,-0.125,0.5,0.36067376022224085,0");
        assert_eq!(lines.len(), 6);
    }
}
