//! Figure-reproduction runs.
//!
//! [`run`] writes one deterministic CSV per trace or table into the output
//! directory, a `manifest.json` with the resolved configuration, and optional
//! matplotlib scripts that render the panels from those CSVs. [`verify`]
//! runs the cross-module oracle checks.

mod bigm;
mod plots;
mod verify;

pub use bigm::{bigm_row, write_bigm_checkpointed, write_bigm_stream, BRUTE_FORCE_MAX_M};
pub use plots::plot_script;
pub use verify::{verify, CheckResult, VerifyConfig, VerifyReport};

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::errorlab::{self, Arithmetic, RecordSet, RunningTrace, Scaling, TraceCsvWriter};
use crate::integrands::{IntegrandSpec, Threshold};
use crate::netcount::CountOptions;
use crate::rkhs::{self, BoundCertificate};
use crate::sequences::{
    direction_numbers_from_env, sobol_generator_set, DirectionNumberRecord, Sequence,
    SequenceKind, DIRECTION_NUMBERS_ENV,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Fig1Vdc,
    Fig2Product,
    Fig3Indicator,
    Fig4Simplex,
    Fig5Bigm,
    RkhsRate,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Fig1Vdc,
        ExperimentId::Fig2Product,
        ExperimentId::Fig3Indicator,
        ExperimentId::Fig4Simplex,
        ExperimentId::Fig5Bigm,
        ExperimentId::RkhsRate,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::Fig1Vdc => "fig1-vdc",
            ExperimentId::Fig2Product => "fig2-product",
            ExperimentId::Fig3Indicator => "fig3-indicator",
            ExperimentId::Fig4Simplex => "fig4-simplex",
            ExperimentId::Fig5Bigm => "fig5-bigm",
            ExperimentId::RkhsRate => "rkhs-rate",
        }
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s.trim())
            .ok_or_else(|| {
                let known: Vec<_> = ExperimentId::ALL.iter().map(|id| id.as_str()).collect();
                Error::InvalidArgument(format!(
                    "unknown experiment '{s}' (expected one of {})",
                    known.join(", ")
                ))
            })
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    Equal,
    Optimal,
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "equal" => Ok(WeightScheme::Equal),
            "optimal" => Ok(WeightScheme::Optimal),
            other => Err(Error::InvalidArgument(format!("unknown weights '{other}'"))),
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightScheme::Equal => "equal",
            WeightScheme::Optimal => "optimal",
        })
    }
}

/// Inclusive range of exponents `m`, written `1..100` or `1..=100`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MRange {
    pub start: u32,
    pub end: u32,
}

impl MRange {
    pub fn new(start: u32, end: u32) -> Result<Self> {
        if start == 0 || start > end {
            return Err(Error::InvalidArgument(format!("bad m range {start}..{end}")));
        }
        Ok(MRange { start, end })
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<u32> {
        self.start..=self.end
    }
}

impl FromStr for MRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad m range '{s}'"));
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
        match s.split_once("..") {
            Some((a, b)) => MRange::new(num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let m = num(s)?;
                MRange::new(m, m)
            }
        }
    }
}

impl fmt::Display for MRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// Where RKHS point sets come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointSource {
    Sequence(SequenceKind),
    /// Uniform points from a seeded ChaCha8 stream.
    Random { seed: u64 },
}

impl PointSource {
    /// The first `n` points in dimension `d` as doubles.
    pub fn points(
        &self,
        d: usize,
        n: usize,
        records: &[DirectionNumberRecord],
    ) -> Result<Vec<Vec<f64>>> {
        match self {
            PointSource::Sequence(kind) => {
                let seq = Sequence::build(*kind, d, n as u64, records)?;
                Ok(rkhs::to_f64_points(&seq.points(n as u64)?))
            }
            PointSource::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..n)
                    .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
                    .collect())
            }
        }
    }

    fn label(&self) -> String {
        match self {
            PointSource::Sequence(k) => k.to_string(),
            PointSource::Random { .. } => "random".into(),
        }
    }
}

impl FromStr for PointSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "random" {
            return Ok(PointSource::Random { seed: 0 });
        }
        if let Some(seed) = s.strip_prefix("random:") {
            let seed = seed
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad seed in '{s}'")))?;
            return Ok(PointSource::Random { seed });
        }
        s.parse().map(PointSource::Sequence)
    }
}

impl fmt::Display for PointSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointSource::Sequence(k) => write!(f, "{k}"),
            PointSource::Random { seed } => write!(f, "random:{seed}"),
        }
    }
}

/// Parameters of one run. `None` fields take the experiment's default when
/// the configuration is [resolved](ExperimentConfig::resolved).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    /// `None` runs every sequence the experiment compares.
    pub seq: Option<SequenceKind>,
    pub d: Option<usize>,
    pub n_max: Option<u64>,
    pub m_range: Option<MRange>,
    /// One threshold, or a comma-separated list with one per coordinate.
    pub alpha: Option<String>,
    /// Badly approximable threshold (fig3) or power exponent (fig4).
    pub theta: Option<String>,
    pub weights: WeightScheme,
    pub workers: usize,
    pub out: PathBuf,
    pub plots: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId, out: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            experiment,
            seq: None,
            d: None,
            n_max: None,
            m_range: None,
            alpha: None,
            theta: None,
            weights: WeightScheme::Equal,
            workers: 1,
            out: out.into(),
            plots: true,
        }
    }

    /// Fills in defaults and checks every parameter against module limits.
    pub fn resolved(&self) -> Result<Self> {
        let mut c = self.clone();
        if c.workers == 0 {
            return Err(Error::InvalidArgument("workers must be at least 1".into()));
        }
        if c.n_max == Some(0) {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        if c.d == Some(0) {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let only = |c: &ExperimentConfig, allowed: &[SequenceKind]| -> Result<()> {
            match c.seq {
                Some(k) if !allowed.contains(&k) => Err(Error::InvalidArgument(format!(
                    "{} does not use the {k} sequence",
                    c.experiment
                ))),
                _ => Ok(()),
            }
        };
        match c.experiment {
            ExperimentId::Fig1Vdc => {
                only(&c, &[SequenceKind::VanDerCorput])?;
                if c.d.unwrap_or(1) != 1 {
                    return Err(Error::InvalidArgument("fig1-vdc is one-dimensional".into()));
                }
                c.seq = Some(SequenceKind::VanDerCorput);
                c.d = Some(1);
                c.n_max.get_or_insert(1 << 14);
                c.alpha.get_or_insert_with(|| "2/3".into());
            }
            ExperimentId::Fig2Product | ExperimentId::Fig3Indicator => {
                c.d.get_or_insert(2);
                let n = if c.experiment == ExperimentId::Fig2Product { 16 } else { 20 };
                c.n_max.get_or_insert(1 << n);
            }
            ExperimentId::Fig4Simplex => {
                if c.d.unwrap_or(2) != 2 {
                    return Err(Error::InvalidArgument("fig4-simplex is two-dimensional".into()));
                }
                c.d = Some(2);
                c.n_max.get_or_insert(1 << 20);
            }
            ExperimentId::Fig5Bigm => {
                only(&c, &[SequenceKind::Sobol])?;
                c.seq = Some(SequenceKind::Sobol);
                let d = *c.d.get_or_insert(2);
                let cap = if d <= 3 { 100 } else { 50 };
                let range = *c.m_range.get_or_insert(MRange { start: 1, end: cap });
                if range.end > cap {
                    return Err(Error::InvalidArgument(format!(
                        "fig5-bigm supports m <= {cap} for d = {d}"
                    )));
                }
                c.alpha.get_or_insert_with(|| "2/3".into());
            }
            ExperimentId::RkhsRate => {
                c.d.get_or_insert(2);
                c.n_max.get_or_insert(256);
            }
        }
        if let Some(a) = &c.alpha {
            thresholds(a, c.d.unwrap_or(1))?;
        }
        if let Some(t) = &c.theta {
            Threshold::parse(t)?;
        }
        if c.seq == Some(SequenceKind::VanDerCorput) && c.d != Some(1) {
            return Err(Error::InvalidArgument("van der Corput is one-dimensional".into()));
        }
        Ok(c)
    }

    fn sequences(&self, default: &[SequenceKind]) -> Vec<SequenceKind> {
        self.seq.map_or_else(|| default.to_vec(), |k| vec![k])
    }
}

/// One threshold replicated `d` times, or exactly `d` comma-separated ones.
fn thresholds(s: &str, d: usize) -> Result<Vec<Threshold>> {
    let list = s
        .split(',')
        .map(Threshold::parse)
        .collect::<Result<Vec<_>>>()?;
    match list.len() {
        1 => Ok(vec![list[0].clone(); d]),
        n if n == d => Ok(list),
        n => Err(Error::InvalidArgument(format!("{n} thresholds for dimension {d}"))),
    }
}

fn parse_alpha(s: &str) -> Result<BigRational> {
    match Threshold::parse(s)? {
        Threshold::Rational(r) => Ok(r),
        Threshold::Irrational { label, .. } => Err(Error::InvalidArgument(format!(
            "big-m counting needs a rational alpha, got {label}"
        ))),
    }
}

/// One emitted file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub rows: usize,
    pub description: String,
    /// Record sample sizes for trace files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    /// `builtin` or the fixture path taken from the environment.
    pub direction_numbers: String,
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<String>,
    pub wall_time_seconds: f64,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Runs one experiment and returns its manifest, also written to the output
/// directory.
pub fn run(config: &ExperimentConfig) -> Result<Manifest> {
    let start = Instant::now();
    let c = config.resolved()?;
    fs::create_dir_all(&c.out).map_err(|e| Error::io(&c.out, e))?;
    let records = direction_numbers_from_env()?;
    let mut ctx = RunContext {
        out: &c.out,
        artifacts: Vec::new(),
        checks: Vec::new(),
    };
    match c.experiment {
        ExperimentId::Fig1Vdc => fig1(&c, &mut ctx)?,
        ExperimentId::Fig2Product => fig2(&c, &records, &mut ctx)?,
        ExperimentId::Fig3Indicator => fig3(&c, &records, &mut ctx)?,
        ExperimentId::Fig4Simplex => fig4(&c, &records, &mut ctx)?,
        ExperimentId::Fig5Bigm => fig5(&c, &records, &mut ctx)?,
        ExperimentId::RkhsRate => rkhs_rate(&c, &records, &mut ctx)?,
    }
    if c.plots {
        let name = format!("plot_{}.py", c.experiment.as_str().replace('-', "_"));
        let files: Vec<&str> = ctx.artifacts.iter().map(|a| a.file.as_str()).collect();
        let script = plot_script(c.experiment, &files);
        let path = c.out.join(&name);
        fs::write(&path, script).map_err(|e| Error::io(&path, e))?;
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: c.clone(),
        direction_numbers: std::env::var(DIRECTION_NUMBERS_ENV).unwrap_or_else(|_| "builtin".into()),
        artifacts: ctx.artifacts,
        checks: ctx.checks,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let path = c.out.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

struct RunContext<'a> {
    out: &'a Path,
    artifacts: Vec<Artifact>,
    checks: Vec<String>,
}

impl RunContext<'_> {
    fn create(&self, file: &str) -> Result<BufWriter<File>> {
        let path = self.out.join(file);
        File::create(&path)
            .map(BufWriter::new)
            .map_err(|e| Error::io(&path, e))
    }

    fn trace(
        &mut self,
        file: String,
        seq: &Sequence,
        f: &IntegrandSpec,
        n_max: u64,
        scaling: Scaling,
    ) -> Result<RecordSet> {
        let mut w = TraceCsvWriter::new(self.create(&file)?, scaling)?;
        let mut ns = Vec::new();
        for e in RunningTrace::new(seq, f, n_max, Arithmetic::Auto)? {
            let e = e?;
            if w.write(&e)? {
                ns.push(e.n);
            }
        }
        let mut inner = w.finish()?;
        inner.flush().map_err(|e| Error::io(self.out.join(&file), e))?;
        let scale = match scaling {
            Scaling::N => "n|err|",
            Scaling::NOverLog => "n|err|/log n",
        };
        self.artifacts.push(Artifact {
            file,
            rows: n_max as usize,
            description: format!("{f} on {}, records of {scale}", seq_label(seq)),
            records: Some(ns.clone()),
        });
        Ok(RecordSet { scaling, ns })
    }
}

fn seq_label(seq: &Sequence) -> &'static str {
    match seq {
        Sequence::VanDerCorput { .. } => "van der Corput",
        Sequence::Halton { .. } => "Halton",
        Sequence::Sobol(_) => "Sobol'",
    }
}

fn fig1(c: &ExperimentConfig, ctx: &mut RunContext) -> Result<()> {
    let n_max = c.n_max.expect("resolved");
    let seq = Sequence::VanDerCorput { base: 2 };
    let linear = ctx.trace(
        "fig1_vdc_linear.csv".into(),
        &seq,
        &IntegrandSpec::linear(),
        n_max,
        Scaling::N,
    )?;
    let mut l = 0;
    while let Ok(n) = errorlab::n_l(l) {
        if n > n_max as u128 {
            break;
        }
        if !linear.contains(n as u64) {
            return Err(Error::CheckFailed(format!("n_{l} = {n} is not a record")));
        }
        l += 1;
    }
    ctx.checks.push(format!("n_L is a record of the f(x) = x trace for L < {l}"));
    let alpha = thresholds(c.alpha.as_deref().expect("resolved"), 1)?;
    ctx.trace(
        "fig1_vdc_indicator.csv".into(),
        &seq,
        &IntegrandSpec::box_indicator(alpha)?,
        n_max,
        Scaling::N,
    )?;
    Ok(())
}

fn fig2(c: &ExperimentConfig, records: &[DirectionNumberRecord], ctx: &mut RunContext) -> Result<()> {
    let (d, n_max) = (c.d.expect("resolved"), c.n_max.expect("resolved"));
    let f = IntegrandSpec::centered_product(d)?;
    for kind in c.sequences(&[SequenceKind::Halton, SequenceKind::Sobol]) {
        let seq = Sequence::build(kind, d, n_max, records)?;
        ctx.trace(format!("fig2_product_{kind}.csv"), &seq, &f, n_max, Scaling::N)?;
    }
    Ok(())
}

/// Halton thresholds alternate 2/3 and 3/5 so that none terminates in the
/// base of its coordinate.
fn default_indicator(kind: SequenceKind, d: usize) -> Result<Vec<Threshold>> {
    (0..d)
        .map(|j| match (kind, j % 2) {
            (SequenceKind::Halton, 1) => Threshold::rational(3, 5),
            _ => Threshold::rational(2, 3),
        })
        .collect()
}

fn fig3(c: &ExperimentConfig, records: &[DirectionNumberRecord], ctx: &mut RunContext) -> Result<()> {
    let (d, n_max) = (c.d.expect("resolved"), c.n_max.expect("resolved"));
    for kind in c.sequences(&[SequenceKind::Sobol, SequenceKind::Halton]) {
        let seq = Sequence::build(kind, d, n_max, records)?;
        let alpha = match &c.alpha {
            Some(a) => thresholds(a, d)?,
            None => default_indicator(kind, d)?,
        };
        let f = IntegrandSpec::centered_indicator(alpha)?;
        ctx.trace(format!("fig3_indicator_{kind}.csv"), &seq, &f, n_max, Scaling::NOverLog)?;
        if let Some(theta) = &c.theta {
            let f = IntegrandSpec::centered_indicator(thresholds(theta, d)?)?;
            ctx.trace(format!("fig3_badly_{kind}.csv"), &seq, &f, n_max, Scaling::NOverLog)?;
        }
    }
    Ok(())
}

fn fig4(c: &ExperimentConfig, records: &[DirectionNumberRecord], ctx: &mut RunContext) -> Result<()> {
    let n_max = c.n_max.expect("resolved");
    for kind in c.sequences(&[SequenceKind::Sobol, SequenceKind::Halton]) {
        let seq = Sequence::build(kind, 2, n_max, records)?;
        let f = IntegrandSpec::simplex();
        ctx.trace(format!("fig4_simplex_{kind}.csv"), &seq, &f, n_max, Scaling::NOverLog)?;
        if let Some(theta) = &c.theta {
            let f = IntegrandSpec::power_product(Threshold::parse(theta)?.value(), 2)?;
            ctx.trace(format!("fig4_power_{kind}.csv"), &seq, &f, n_max, Scaling::NOverLog)?;
        }
    }
    Ok(())
}

fn fig5(c: &ExperimentConfig, records: &[DirectionNumberRecord], ctx: &mut RunContext) -> Result<()> {
    let d = c.d.expect("resolved");
    let range = c.m_range.expect("resolved");
    let alpha = parse_alpha(c.alpha.as_deref().expect("resolved"))?;
    let gens = sobol_generator_set(records, d, range.end)?;
    let file = format!("fig5_bigm_d{d}.csv");
    let opts = CountOptions {
        workers: c.workers,
        ..CountOptions::default()
    };
    let rows = write_bigm_checkpointed(&ctx.out.join(&file), &gens, d, range, &alpha, opts)?;
    ctx.checks.push(format!(
        "fig5 d = {d}: counts within [0, 2^m], brute-force agreement for m <= {}",
        BRUTE_FORCE_MAX_M.min(range.end)
    ));
    ctx.artifacts.push(Artifact {
        file,
        rows,
        description: format!("signed n(mu_hat - mu) for 1{{x < {alpha}}}^{d} on Sobol' nets, m = {range}"),
        records: None,
    });
    Ok(())
}

/// Powers of two from 2 up to `n_max`.
fn doubling_sizes(n_max: u64) -> Vec<usize> {
    std::iter::successors(Some(2usize), |n| Some(n * 2))
        .take_while(|&n| n as u64 <= n_max)
        .collect()
}

fn rkhs_rate(c: &ExperimentConfig, records: &[DirectionNumberRecord], ctx: &mut RunContext) -> Result<()> {
    let (d, n_max) = (c.d.expect("resolved"), c.n_max.expect("resolved"));
    let sources = match c.seq {
        Some(k) => vec![PointSource::Sequence(k)],
        None => vec![
            PointSource::Sequence(SequenceKind::Sobol),
            PointSource::Sequence(SequenceKind::Halton),
            PointSource::Random { seed: 0 },
        ],
    };
    let ns = doubling_sizes(n_max);
    for src in sources {
        let rows = rkhs_rows(src, d, &ns, c.weights, true, records)?;
        let file = format!("rkhs_rate_{}.csv", src.label());
        write_rkhs_csv(ctx.create(&file)?, &rows)?;
        ctx.artifacts.push(Artifact {
            file,
            rows: rows.len(),
            description: format!("{} weights on {src} points, d = {d}, with certificates", c.weights),
            records: None,
        });
    }
    Ok(())
}

/// Worst-case error of one point set, with its lower-bound certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct RkhsRow {
    pub n: usize,
    pub d: usize,
    pub source: PointSource,
    pub weights: WeightScheme,
    pub wce: f64,
    /// `wce n / log(n)^((d-1)/2)`.
    pub normalized: Option<f64>,
    pub certificate: Option<BoundCertificate>,
}

pub const RKHS_CSV_HEADER: [&str; 13] = [
    "n",
    "d",
    "points",
    "weights",
    "wce",
    "normalized",
    "m",
    "first_bound",
    "cauchy_schwarz_bound",
    "minmax_floor",
    "lower_bound",
    "per_point_floor_holds",
    "chain_holds",
];

/// Nested prefixes of one point set, one row per size in `ns`.
pub fn rkhs_rows(
    source: PointSource,
    d: usize,
    ns: &[usize],
    weights: WeightScheme,
    with_certificate: bool,
    records: &[DirectionNumberRecord],
) -> Result<Vec<RkhsRow>> {
    let n_max = ns.iter().copied().max().ok_or(Error::EmptyPoints)?;
    let points = source.points(d, n_max, records)?;
    ns.iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::EmptyPoints);
            }
            let pts = &points[..n];
            let (a, wce) = match weights {
                WeightScheme::Equal => {
                    let a = rkhs::equal_weights(n);
                    let e = rkhs::wce(pts, &a)?;
                    (a, e)
                }
                WeightScheme::Optimal => rkhs::optimal_weights(pts)?,
            };
            let log = (n as f64).ln();
            let normalized = (d == 1 || log > 0.0)
                .then(|| wce * n as f64 / log.powf((d as f64 - 1.0) / 2.0));
            let certificate = with_certificate
                .then(|| rkhs::certificate(pts, &a))
                .transpose()?;
            Ok(RkhsRow {
                n,
                d,
                source,
                weights,
                wce,
                normalized,
                certificate,
            })
        })
        .collect()
}

impl RkhsRow {
    pub fn to_record(&self) -> [String; 13] {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let cert = self.certificate.as_ref();
        [
            self.n.to_string(),
            self.d.to_string(),
            self.source.to_string(),
            self.weights.to_string(),
            self.wce.to_string(),
            opt(self.normalized.map(|v| v.to_string())),
            opt(cert.map(|c| c.m.to_string())),
            opt(cert.map(|c| c.first_bound.to_string())),
            opt(cert.map(|c| c.cauchy_schwarz_bound.to_string())),
            opt(cert.map(|c| c.minmax_floor.to_string())),
            opt(cert.map(|c| c.lower_bound.to_string())),
            opt(cert.map(|c| u8::from(c.per_point_floor_holds).to_string())),
            opt(cert.map(|c| u8::from(c.steps.iter().all(|s| s.holds)).to_string())),
        ]
    }
}

pub fn write_rkhs_csv<W: Write>(writer: W, rows: &[RkhsRow]) -> Result<W> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RKHS_CSV_HEADER)?;
    for r in rows {
        w.write_record(r.to_record())?;
    }
    w.into_inner()
        .map_err(|e| Error::InvalidArgument(format!("flushing csv: {e}")))
}

/// Parses `16,32,64`, `1..8` or the doubling shorthand `16,32,...,256`.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad size list '{s}'"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if let Some((a, b)) = s.split_once("..").filter(|_| !s.contains("...")) {
        let (a, b) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
        return if a == 0 || a > b { Err(bad()) } else { Ok((a..=b).collect()) };
    }
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let mut out = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        if *p != "..." {
            out.push(num(p)?);
            continue;
        }
        let (&[.., a, b], Some(end)) = (out.as_slice(), parts.get(i + 1)) else {
            return Err(bad());
        };
        let end = num(end)?;
        if b <= a || end <= b {
            return Err(bad());
        }
        // Doubling-style lists are geometric when that lands on the end.
        let ratio = b / a;
        let mut geometric = b % a == 0 && ratio > 1;
        if geometric {
            let mut x = b;
            while x < end {
                x = x.saturating_mul(ratio);
            }
            geometric = x == end;
        }
        let step = |x: usize| if geometric { x * ratio } else { x + (b - a) };
        let mut x = step(b);
        while x < end {
            out.push(x);
            x = step(x);
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err(bad());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(id.as_str().parse::<ExperimentId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{id}\""));
        }
        assert!("fig9".parse::<ExperimentId>().is_err());
    }

    #[test]
    fn m_ranges() {
        assert_eq!("1..100".parse::<MRange>().unwrap(), MRange { start: 1, end: 100 });
        assert_eq!("3..=5".parse::<MRange>().unwrap(), MRange { start: 3, end: 5 });
        assert_eq!("7".parse::<MRange>().unwrap(), MRange { start: 7, end: 7 });
        assert!("0..4".parse::<MRange>().is_err());
        assert!("5..4".parse::<MRange>().is_err());
    }

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("16,32,...,256").unwrap(), [16, 32, 64, 128, 256]);
        assert_eq!(parse_sizes("10,20,...,50").unwrap(), [10, 20, 30, 40, 50]);
        assert_eq!(parse_sizes("8, 9").unwrap(), [8, 9]);
        assert_eq!(parse_sizes("2..4").unwrap(), [2, 3, 4]);
        assert!(parse_sizes("...,4").is_err());
        assert!(parse_sizes("0").is_err());
    }

    #[test]
    fn point_sources() {
        assert_eq!("random:7".parse::<PointSource>().unwrap(), PointSource::Random { seed: 7 });
        assert_eq!(
            "halton".parse::<PointSource>().unwrap(),
            PointSource::Sequence(SequenceKind::Halton)
        );
        let a = PointSource::Random { seed: 3 }.points(2, 5, &[]).unwrap();
        let b = PointSource::Random { seed: 3 }.points(2, 5, &[]).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn defaults_resolve() {
        let c = ExperimentConfig::new(ExperimentId::Fig5Bigm, "x").resolved().unwrap();
        assert_eq!(c.d, Some(2));
        assert_eq!(c.m_range, Some(MRange { start: 1, end: 100 }));
        let mut c4 = ExperimentConfig::new(ExperimentId::Fig5Bigm, "x");
        c4.d = Some(4);
        assert_eq!(c4.resolved().unwrap().m_range.unwrap().end, 50);
        c4.m_range = Some(MRange { start: 1, end: 60 });
        assert!(c4.resolved().is_err());
        let c1 = ExperimentConfig::new(ExperimentId::Fig1Vdc, "x").resolved().unwrap();
        assert_eq!(c1.n_max, Some(1 << 14));
        let mut bad = ExperimentConfig::new(ExperimentId::Fig1Vdc, "x");
        bad.seq = Some(SequenceKind::Sobol);
        assert!(bad.resolved().is_err());
        let mut bad = ExperimentConfig::new(ExperimentId::Fig2Product, "x");
        bad.workers = 0;
        assert!(bad.resolved().is_err());
    }

    #[test]
    fn halton_indicator_defaults() {
        let t = default_indicator(SequenceKind::Halton, 2).unwrap();
        assert_eq!(t[0].to_string(), "2/3");
        assert_eq!(t[1].to_string(), "3/5");
        assert!(default_indicator(SequenceKind::Sobol, 3)
            .unwrap()
            .iter()
            .all(|t| t.to_string() == "2/3"));
    }

    #[test]
    fn config_serializes() {
        let c = ExperimentConfig::new(ExperimentId::RkhsRate, "out").resolved().unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn small_runs_write_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ExperimentConfig::new(ExperimentId::Fig1Vdc, dir.path());
        c.n_max = Some(400);
        let m = run(&c).unwrap();
        assert_eq!(m.artifacts.len(), 2);
        let recs = m.artifacts[0].records.as_ref().unwrap();
        for n in [1, 5, 21, 85, 341] {
            assert!(recs.contains(&n));
        }
        let text = fs::read_to_string(dir.path().join("fig1_vdc_linear.csv")).unwrap();
        assert_eq!(text.lines().count(), 401);
        assert!(dir.path().join("plot_fig1_vdc.py").exists());
        assert!(dir.path().join(MANIFEST_FILE).exists());
    }

    #[test]
    fn rkhs_rows_carry_certificates() {
        let rows = rkhs_rows(
            PointSource::Sequence(SequenceKind::Sobol),
            2,
            &[8, 16],
            WeightScheme::Optimal,
            true,
            &crate::sequences::builtin_direction_numbers(),
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            let rec = r.to_record();
            assert_eq!(rec[12], "1");
            assert_eq!(rec[3], "optimal");
        }
    }
}
