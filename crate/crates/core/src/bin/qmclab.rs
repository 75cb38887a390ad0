use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qmclab::experiments::{
    self, parse_sizes, write_bigm_checkpointed, write_bigm_stream, write_rkhs_csv,
    ExperimentConfig, ExperimentId, MRange, PointSource, VerifyConfig, WeightScheme,
};
use qmclab::integrands::Threshold;
use qmclab::netcount::CountOptions;
use qmclab::sequences::{direction_numbers_from_env, sobol_generator_set, SequenceKind};
use qmclab::{Error, Result};

/// Exact error-rate experiments for quasi-Monte Carlo.
///
/// Sobol' direction numbers are read from the file named by
/// QMCLAB_DIRECTION_NUMBERS when it is set.
#[derive(Parser)]
#[command(name = "qmclab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one figure experiment into an output directory.
    Run(RunArgs),
    /// Run the cross-module oracle checks.
    Verify(VerifyArgs),
    /// Exact signed scaled errors of Sobol' nets in [0, alpha)^d.
    Netcount(NetcountArgs),
    /// Worst-case errors and lower-bound certificates in the unanchored space.
    Rkhs(RkhsArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    experiment: ExperimentId,
    #[arg(long)]
    seq: Option<SequenceKind>,
    #[arg(long)]
    d: Option<usize>,
    /// Largest sample size.
    #[arg(long = "N", conflicts_with = "m_range")]
    n_max: Option<u64>,
    /// Exponents for fig5-bigm, e.g. 1..100.
    #[arg(long)]
    m_range: Option<MRange>,
    /// Box threshold(s), e.g. 2/3 or 2/3,3/5.
    #[arg(long)]
    alpha: Option<String>,
    /// Extra threshold (fig3) or power exponent (fig4), e.g. sqrt2-1 or 0.5.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long, default_value = "equal")]
    weights: WeightScheme,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Skip the plot scripts.
    #[arg(long)]
    no_plots: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 12)]
    m: u32,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct NetcountArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value = "1..100")]
    m: MRange,
    #[arg(long, default_value = "2/3")]
    alpha: String,
    /// Output file, resumed if it holds an interrupted table; `-` or `csv`
    /// writes to stdout.
    #[arg(long, default_value = "-")]
    out: String,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct RkhsArgs {
    /// sobol, halton, vdc, random or random:SEED.
    #[arg(long, default_value = "sobol")]
    points: PointSource,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Sizes, e.g. 16,32,...,256.
    #[arg(long, default_value = "16,32,...,256")]
    n: String,
    #[arg(long, default_value = "equal")]
    weights: WeightScheme,
    #[arg(long)]
    certificate: bool,
    #[arg(long, default_value = "-")]
    out: String,
}

fn output(out: &str) -> Result<Box<dyn Write>> {
    if out == "-" || out == "csv" {
        return Ok(Box::new(io::stdout().lock()));
    }
    let f = File::create(out).map_err(|e| Error::Io {
        path: out.into(),
        source: e,
    })?;
    Ok(Box::new(BufWriter::new(f)))
}

fn run(args: RunArgs) -> Result<bool> {
    let config = ExperimentConfig {
        experiment: args.experiment,
        seq: args.seq,
        d: args.d,
        n_max: args.n_max,
        m_range: args.m_range,
        alpha: args.alpha,
        theta: args.theta,
        weights: args.weights,
        workers: args.workers,
        out: args.out,
        plots: !args.no_plots,
    };
    let manifest = experiments::run(&config)?;
    for a in &manifest.artifacts {
        println!("{}  {} rows  {}", a.file, a.rows, a.description);
    }
    for c in &manifest.checks {
        println!("check: {c}");
    }
    println!("{:.2}s", manifest.wall_time_seconds);
    Ok(true)
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let report = experiments::verify(&VerifyConfig {
        d: args.d,
        m: args.m,
        workers: args.workers,
    });
    println!("{report}");
    Ok(report.passed())
}

fn netcount(args: NetcountArgs) -> Result<bool> {
    let alpha = match Threshold::parse(&args.alpha)? {
        Threshold::Rational(r) => r,
        other => return Err(Error::InvalidArgument(format!("alpha {other} is not rational"))),
    };
    let gens = sobol_generator_set(&direction_numbers_from_env()?, args.d, args.m.end)?;
    let opts = CountOptions {
        workers: args.workers,
        ..CountOptions::default()
    };
    if args.out == "-" || args.out == "csv" {
        let _ = write_bigm_stream(io::stdout().lock(), &gens, args.d, args.m, &alpha, opts)?;
    } else {
        write_bigm_checkpointed(args.out.as_ref(), &gens, args.d, args.m, &alpha, opts)?;
    }
    Ok(true)
}

fn rkhs(args: RkhsArgs) -> Result<bool> {
    let ns = parse_sizes(&args.n)?;
    let records = direction_numbers_from_env()?;
    let rows = experiments::rkhs_rows(args.points, args.d, &ns, args.weights, args.certificate, &records)?;
    let mut w = write_rkhs_csv(output(&args.out)?, &rows)?;
    w.flush().map_err(|e| Error::Io {
        path: args.out.into(),
        source: e,
    })?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Verify(a) => verify(a),
        Command::Netcount(a) => netcount(a),
        Command::Rkhs(a) => rkhs(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
