// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `pcid` command line tool.
//!
//! Exit codes: 0 on success, 1 on I/O or input parse failures, 2 on invalid
//! flags or configuration.

use crate::bench::{full_plan, run_scenario, write_rows, Method, Scenario, TableId};
use crate::calibration::{embedded_table, estimate_type1};
use crate::circular::AngularSeries;
use crate::dependent::{detect_correlated, SubsampleConfig};
use crate::engine::{pcid_windowed, PcidConfig, Significance};
use crate::error::{PcidError, Result};
use crate::io::{parse_series, write_fit_csv, write_series, Column, ResultDocument, Units};
use crate::metrics::evaluate;
use crate::permutation::b_from_alpha;
use crate::synth::{builtin_signal, generate, NoiseSpec, SignalId, SignalSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "pcid",
    version,
    about = "Change-point detection in the mean direction of angular series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect change-points in a CSV series and print a JSON report.
    Detect(DetectArgs),
    /// Generate a synthetic series as CSV, one angle per line.
    Simulate(SimulateArgs),
    /// Estimate the Type-I error on constant signals.
    Calibrate(CalibrateArgs),
    /// Run simulation scenarios and print result tables.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SignificanceArgs {
    /// Target Type-I error; alpha is taken from the calibration grid.
    #[arg(long, conflicts_with = "alpha")]
    pub gamma: Option<f64>,
    /// Per-test significance level.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Permutation budget; defaults to 10^(decimals of alpha).
    #[arg(long = "B", alias = "permutations", requires = "alpha")]
    pub permutations: Option<u64>,
    /// Keep calibration-grid alphas below 0.001 instead of flooring them.
    #[arg(long)]
    pub allow_sub_milli_alpha: bool,
}

impl SignificanceArgs {
    fn significance(&self, default_gamma: f64) -> Result<Significance> {
        match (self.gamma, self.alpha) {
            (_, Some(alpha)) => Ok(Significance::Explicit {
                alpha,
                permutations: match self.permutations {
                    Some(b) => b,
                    None => b_from_alpha(alpha)?,
                },
            }),
            (Some(gamma), None) => Ok(Significance::Target { gamma }),
            (None, None) => Ok(Significance::Target { gamma: default_gamma }),
        }
    }
}

#[derive(Debug, Args)]
pub struct SubsampleArgs {
    /// Number of interleaved subsequences for correlated noise.
    #[arg(long)]
    pub nu: Option<usize>,
    /// Votes needed to accept a change-point (default: a majority of nu).
    #[arg(long, requires = "nu")]
    pub eta: Option<usize>,
    /// Matching radius for votes, in subsequence positions.
    #[arg(long, requires = "nu", default_value_t = 2)]
    pub delta: usize,
}

impl SubsampleArgs {
    fn config(&self) -> Result<Option<SubsampleConfig>> {
        self.nu
            .map(|nu| SubsampleConfig::new(nu, self.eta.unwrap_or(nu / 2 + 1), self.delta))
            .transpose()
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Input CSV, or `-` for standard input.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = UnitsArg::Radians)]
    pub units: UnitsArg,
    /// Column holding the angles: 1-based position or header name.
    #[arg(long, default_value = "1")]
    pub column: String,
    /// The first row is a header.
    #[arg(long)]
    pub header: bool,
    #[command(flatten)]
    pub significance: SignificanceArgs,
    #[arg(long, default_value_t = 5)]
    pub lambda: usize,
    /// Longest window analysed in one piece.
    #[arg(long, default_value_t = 500)]
    pub window: usize,
    #[arg(long, env = "PCID_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub subsample: SubsampleArgs,
    /// Include the tested-interval log in the report.
    #[arg(long)]
    pub audit: bool,
    /// Also write `t, theta, fitted` as CSV to this path.
    #[arg(long)]
    pub emit_fit: Option<PathBuf>,
    /// Known change-points, comma separated, to score the estimate against.
    #[arg(long, value_delimiter = ',')]
    pub truth: Option<Vec<usize>>,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UnitsArg {
    Radians,
    Degrees,
}

impl From<UnitsArg> for Units {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Radians => Units::Radians,
            UnitsArg::Degrees => Units::Degrees,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseFamily {
    /// von Mises, `--kappa`.
    Vm,
    /// Wrapped Cauchy, `--rho`.
    Wc,
    /// Wrapped Normal, `--beta`.
    Wn,
    /// Circular AR(1), `--phi` and `--innovation-kappa`.
    Ar1,
    None,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long, value_enum, default_value_t = NoiseFamily::Vm)]
    pub noise: NoiseFamily,
    #[arg(long, default_value_t = 4.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.86)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.86)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.3)]
    pub phi: f64,
    #[arg(long, default_value_t = 1.7)]
    pub innovation_kappa: f64,
}

impl NoiseArgs {
    fn spec(&self) -> Result<NoiseSpec> {
        let spec = match self.noise {
            NoiseFamily::Vm => NoiseSpec::VonMises { kappa: self.kappa },
            NoiseFamily::Wc => NoiseSpec::WrappedCauchy { rho: self.rho },
            NoiseFamily::Wn => NoiseSpec::WrappedNormal { beta: self.beta },
            NoiseFamily::Ar1 => NoiseSpec::Ar1Circular {
                phi: self.phi,
                innovation_kappa: self.innovation_kappa,
            },
            NoiseFamily::None => NoiseSpec::Noiseless,
        };
        spec.validate().map_err(|e| PcidError::config(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in signal S1..S11.
    #[arg(long, conflicts_with_all = ["length", "changepoints", "levels"])]
    pub signal: Option<String>,
    /// Length of a custom signal.
    #[arg(long, requires = "levels")]
    pub length: Option<usize>,
    /// Change-points of a custom signal, comma separated.
    #[arg(long, value_delimiter = ',', requires = "length")]
    pub changepoints: Option<Vec<usize>>,
    /// Levels of a custom signal in radians, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "length")]
    pub levels: Option<Vec<f64>>,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, env = "PCID_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Sequence lengths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub lengths: Vec<usize>,
    /// Per-test levels, comma separated (default: the grid's values for each length).
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long = "B", alias = "permutations", default_value_t = 10_000)]
    pub permutations: u64,
    #[arg(long, default_value_t = 5)]
    pub lambda: usize,
    /// Replicates per cell.
    #[arg(long, default_value_t = 300)]
    pub sims: usize,
    /// von Mises concentration of the null noise.
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,
    #[arg(long, env = "PCID_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Whole grid at 1000 replicates; about half an hour on one core.
    #[arg(long)]
    pub full: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Plain,
    Windowed,
    Subsampled,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Regenerate every reference table at 100 replicates (163 rows, a few minutes).
    #[arg(long, conflicts_with = "table")]
    pub full: bool,
    /// Regenerate one table: window, vonmises, wrapped_cauchy, wrapped_normal, dependent or lambda.
    #[arg(long)]
    pub table: Option<String>,
    #[arg(long, default_value = "S4")]
    pub signal: String,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    pub significance: SignificanceArgs,
    #[arg(long, default_value_t = 5)]
    pub lambda: usize,
    #[arg(long, default_value_t = 500)]
    pub window: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Windowed)]
    pub method: MethodArg,
    #[command(flatten)]
    pub subsample: SubsampleArgs,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, env = "PCID_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Print `-` for run times so that output is reproducible.
    #[arg(long)]
    pub no_time: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| PcidError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_input(args: &DetectArgs) -> Result<AngularSeries> {
    let column: Column = args.column.parse()?;
    let units = args.units.into();
    if args.input.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        parse_series(buf.as_slice(), units, &column, args.header)
    } else {
        let file = File::open(&args.input).map_err(|e| PcidError::Io(format!("{}: {e}", args.input.display())))?;
        parse_series(file, units, &column, args.header)
    }
}

pub fn run_detect(args: &DetectArgs) -> Result<ResultDocument> {
    let cfg = PcidConfig {
        lambda: args.lambda,
        significance: args.significance.significance(0.05)?,
        window: args.window,
        allow_sub_milli_alpha: args.significance.allow_sub_milli_alpha,
        seed: args.seed,
    };
    cfg.validate()?;
    let subsample = args.subsample.config()?;
    let series = read_input(args)?;
    let result = match &subsample {
        Some(sub) => detect_correlated(&series, sub, &cfg)?,
        None => pcid_windowed(&series, &cfg)?,
    };
    if let Some(path) = &args.emit_fit {
        write_fit_csv(path, &series, &result)?;
    }
    let mut doc = ResultDocument::new(series.len(), &result, &cfg, subsample, args.audit);
    if let Some(truth) = &args.truth {
        doc.metrics = Some(evaluate(truth, &result.changepoints, series.len(), 0.0)?);
    }
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "{}", doc.to_json()?)?;
    out.flush()?;
    Ok(doc)
}

pub fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let signal = match (&args.signal, args.length) {
        (Some(id), _) => builtin_signal(id.parse::<SignalId>()?),
        (None, Some(length)) => SignalSpec::new(
            length,
            args.changepoints.clone().unwrap_or_default(),
            args.levels.clone().unwrap_or_default(),
        )
        .map_err(|e| PcidError::config(e.to_string()))?,
        (None, None) => return Err(PcidError::config("give --signal or --length with --levels")),
    };
    let series = generate(&signal, &args.noise.spec()?, args.seed)?;
    write_series(open_output(args.output.as_deref())?, &series)
}

pub fn run_calibrate(args: &CalibrateArgs) -> Result<()> {
    let noise = NoiseSpec::VonMises { kappa: args.kappa };
    let (lengths, sims) = if args.full {
        (embedded_table().lengths(), 1000)
    } else {
        (args.lengths.clone(), args.sims)
    };
    let mut w = csv::Writer::from_writer(open_output(args.output.as_deref())?);
    let io = |e: csv::Error| PcidError::Io(e.to_string());
    w.write_record(["T", "alpha", "B", "n_sims", "gamma_hat", "se"])
        .map_err(io)?;
    for length in lengths {
        let alphas = match (&args.alphas, args.full) {
            (Some(a), false) => a.clone(),
            _ => {
                let column = embedded_table().nearest_length(length).unwrap_or(length);
                embedded_table().column(column).map(|e| e.alpha).collect()
            }
        };
        for alpha in alphas {
            let est = estimate_type1(length, alpha, args.permutations, args.lambda, sims, &noise, args.seed)?;
            w.write_record([
                length.to_string(),
                alpha.to_string(),
                args.permutations.to_string(),
                sims.to_string(),
                format!("{:.4}", est.gamma_hat),
                format!("{:.4}", est.se),
            ])
            .map_err(io)?;
            w.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run_bench(args: &BenchArgs) -> Result<()> {
    let plans: Vec<Scenario> = if args.full {
        TableId::ALL
            .into_iter()
            .flat_map(|t| full_plan(t, args.replicates, args.seed))
            .collect()
    } else if let Some(table) = &args.table {
        full_plan(table.parse()?, args.replicates, args.seed)
    } else {
        let method = match args.method {
            MethodArg::Plain => Method::Plain,
            MethodArg::Windowed => Method::Windowed,
            MethodArg::Subsampled => Method::Subsampled(args.subsample.config()?.unwrap_or_default()),
        };
        vec![Scenario {
            table: "custom".to_string(),
            signal: args.signal.parse()?,
            noise: args.noise.spec()?,
            significance: args.significance.significance(0.05)?,
            lambda: args.lambda,
            window: args.window,
            method,
            replicates: args.replicates,
            seed: args.seed,
        }]
    };
    let mut rows = Vec::with_capacity(plans.len());
    for scenario in &plans {
        scenario.config(0).validate()?;
        rows.push(run_scenario(scenario)?);
    }
    write_rows(open_output(args.output.as_deref())?, &rows, !args.no_time)
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Detect(a) => run_detect(a).map(|_| ()),
        Command::Simulate(a) => run_simulate(a),
        Command::Calibrate(a) => run_calibrate(a),
        Command::Bench(a) => run_bench(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("pcid: {e}");
            e.exit_code()
        }
    }
}
