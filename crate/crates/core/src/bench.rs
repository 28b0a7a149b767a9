// SPDX-License-Identifier: MIT OR Apache-2.0

//! Simulation harness: run a detector on seeded replicates of a built-in
//! signal and summarise `N̂ − N`, `d_H`, ARI and run time.

use crate::dependent::{detect_correlated, SubsampleConfig};
use crate::engine::{pcid_detect, pcid_windowed, IntervalCache, PcidConfig, Significance};
use crate::error::{PcidError, Result};
use crate::metrics::{evaluate, NDiffHistogram, SegmentationMetrics};
use crate::rng::replicate_seed;
use crate::synth::{builtin_signal, generate, NoiseSpec, SignalId};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Recursive detection over the whole series.
    Plain,
    /// Windowed detection with boundary stitching.
    Windowed,
    /// Subsampling and majority vote.
    Subsampled(SubsampleConfig),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Plain => f.write_str("PCID"),
            Method::Windowed => f.write_str("PCID_W"),
            Method::Subsampled(c) => write!(f, "PCID_sub(nu={},eta={},delta={})", c.nu, c.eta, c.delta),
        }
    }
}

/// One line of a results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub table: String,
    pub signal: SignalId,
    pub noise: NoiseSpec,
    pub significance: Significance,
    pub lambda: usize,
    pub window: usize,
    pub method: Method,
    pub replicates: usize,
    pub seed: u64,
}

impl Scenario {
    /// Table-driven `γ`, `λ = 5`, `w = 500`, windowed detection.
    pub fn new(table: &str, signal: SignalId, noise: NoiseSpec, gamma: f64, replicates: usize, seed: u64) -> Self {
        Self {
            table: table.to_string(),
            signal,
            noise,
            significance: Significance::Target { gamma },
            lambda: 5,
            window: 500,
            method: Method::Windowed,
            replicates,
            seed,
        }
    }

    pub fn config(&self, seed: u64) -> PcidConfig {
        PcidConfig {
            lambda: self.lambda,
            significance: self.significance,
            window: self.window,
            allow_sub_milli_alpha: false,
            seed,
        }
    }
}

/// Aggregated replicate results: one table row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scenario: Scenario,
    pub histogram: NDiffHistogram,
    /// Mean over replicates where `d_H` is defined.
    pub d_h: Option<f64>,
    pub ari: Option<f64>,
    pub time_seconds: f64,
    pub replicates: Vec<SegmentationMetrics>,
}

impl BenchRow {
    /// Share of replicates with `N̂ = N`.
    pub fn exact_fraction(&self) -> f64 {
        self.histogram.exact() as f64 / self.histogram.total().max(1) as f64
    }
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Runs every replicate of `scenario`.
///
/// Replicate `i` uses `replicate_seed(seed, i)` for both the data and the
/// permutations.
pub fn run_scenario(scenario: &Scenario) -> Result<BenchRow> {
    if scenario.replicates == 0 {
        return Err(PcidError::config("need at least one replicate"));
    }
    let signal = builtin_signal(scenario.signal);
    let truth = signal.changepoints().to_vec();
    let length = signal.length();
    let metrics = (0..scenario.replicates)
        .into_par_iter()
        .map(|i| {
            let seed = replicate_seed(scenario.seed, i as u64);
            let series = generate(&signal, &scenario.noise, seed)?;
            let cfg = scenario.config(seed);
            let started = Instant::now();
            let result = match scenario.method {
                Method::Plain => pcid_detect(&series, 1, length, &cfg, &mut IntervalCache::new())?,
                Method::Windowed => pcid_windowed(&series, &cfg)?,
                Method::Subsampled(sub) => detect_correlated(&series, &sub, &cfg)?,
            };
            let elapsed = started.elapsed().as_secs_f64();
            evaluate(&truth, &result.changepoints, length, elapsed)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut histogram = NDiffHistogram::default();
    for m in &metrics {
        histogram.add(m.n_diff);
    }
    Ok(BenchRow {
        scenario: scenario.clone(),
        histogram,
        d_h: mean_defined(metrics.iter().map(|m| m.d_h)),
        ari: mean_defined(metrics.iter().map(|m| m.ari)),
        time_seconds: metrics.iter().map(|m| m.runtime_seconds).sum::<f64>() / metrics.len() as f64,
        replicates: metrics,
    })
}

/// Reference result tables that [`full_plan`] can regenerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableId {
    /// Windowed against plain detection on long series.
    Window,
    VonMises,
    WrappedCauchy,
    WrappedNormal,
    /// Serially correlated noise.
    Dependent,
    /// Sensitivity to the expansion step.
    Lambda,
}

impl TableId {
    pub const ALL: [TableId; 6] = [
        TableId::Window,
        TableId::VonMises,
        TableId::WrappedCauchy,
        TableId::WrappedNormal,
        TableId::Dependent,
        TableId::Lambda,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TableId::Window => "window",
            TableId::VonMises => "vonmises",
            TableId::WrappedCauchy => "wrapped_cauchy",
            TableId::WrappedNormal => "wrapped_normal",
            TableId::Dependent => "dependent",
            TableId::Lambda => "lambda",
        }
    }
}

impl FromStr for TableId {
    type Err = PcidError;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| PcidError::config(format!("unknown table '{s}'")))
    }
}

const CHANGE_SIGNALS: [SignalId; 5] = [SignalId::S4, SignalId::S5, SignalId::S6, SignalId::S7, SignalId::S8];
const KAPPAS: [f64; 4] = [8.0, 4.0, 2.0, 1.0];
const MATCHED: [f64; 4] = [0.94, 0.86, 0.70, 0.45];

fn robustness(
    table: TableId,
    noise: fn(f64) -> NoiseSpec,
    levels: &[f64; 4],
    null: f64,
    reps: usize,
    seed: u64,
) -> Vec<Scenario> {
    let mut out = Vec::new();
    for gamma in [0.01, 0.05] {
        out.push(Scenario::new(
            table.name(),
            SignalId::S3,
            noise(null),
            gamma,
            reps,
            seed,
        ));
    }
    for signal in CHANGE_SIGNALS {
        for gamma in [0.01, 0.05] {
            for &c in levels {
                out.push(Scenario::new(table.name(), signal, noise(c), gamma, reps, seed));
            }
        }
    }
    out
}

/// Every scenario of `table` at `replicates` replicates.
pub fn full_plan(table: TableId, replicates: usize, seed: u64) -> Vec<Scenario> {
    let explicit = Significance::Explicit {
        alpha: 0.001,
        permutations: 1000,
    };
    match table {
        TableId::Window => {
            let mut out = Vec::new();
            for (signal, kappa) in [(SignalId::S1, 2.0), (SignalId::S2, 4.0)] {
                for method in [Method::Windowed, Method::Plain] {
                    let mut s = Scenario::new(
                        table.name(),
                        signal,
                        NoiseSpec::VonMises { kappa },
                        0.05,
                        replicates,
                        seed,
                    );
                    s.significance = explicit;
                    s.method = method;
                    out.push(s);
                }
            }
            out
        }
        TableId::VonMises => robustness(
            table,
            |kappa| NoiseSpec::VonMises { kappa },
            &KAPPAS,
            2.0,
            replicates,
            seed,
        ),
        TableId::WrappedCauchy => robustness(
            table,
            |rho| NoiseSpec::WrappedCauchy { rho },
            &MATCHED,
            0.86,
            replicates,
            seed,
        ),
        TableId::WrappedNormal => robustness(
            table,
            |beta| NoiseSpec::WrappedNormal { beta },
            &MATCHED,
            0.86,
            replicates,
            seed,
        ),
        TableId::Dependent => {
            let mut out = Vec::new();
            for signal in [SignalId::S3, SignalId::S4] {
                for phi in [0.3, 0.5, 0.7] {
                    let noise = NoiseSpec::Ar1Circular {
                        phi,
                        innovation_kappa: 1.7,
                    };
                    let mut s = Scenario::new(table.name(), signal, noise, 0.05, replicates, seed);
                    s.method = Method::Subsampled(SubsampleConfig::default());
                    out.push(s);
                }
            }
            out
        }
        TableId::Lambda => {
            let mut out = Vec::new();
            for (signal, alpha) in [(SignalId::S9, 0.001), (SignalId::S10, 0.001), (SignalId::S11, 0.003)] {
                for lambda in [2, 3, 4, 5, 10, 20, 30, 40, 50] {
                    let mut s = Scenario::new(
                        table.name(),
                        signal,
                        NoiseSpec::VonMises { kappa: 4.0 },
                        0.05,
                        replicates,
                        seed,
                    );
                    s.significance = Significance::Explicit {
                        alpha,
                        permutations: 1000,
                    };
                    s.lambda = lambda;
                    s.window = s.window.max(2 * lambda);
                    out.push(s);
                }
            }
            out
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

pub const CSV_HEADER: [&str; 20] = [
    "table",
    "signal",
    "method",
    "gamma",
    "alpha",
    "B",
    "noise",
    "parameter",
    "lambda",
    "replicates",
    "le_m3",
    "m2",
    "m1",
    "zero",
    "p1",
    "p2",
    "ge_p3",
    "d_h",
    "ari",
    "time_s",
];

/// Writes rows as CSV. Run times vary between runs; `with_time = false`
/// prints `-` instead so that output is byte-reproducible.
pub fn write_rows<W: Write>(out: W, rows: &[BenchRow], with_time: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| PcidError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for row in rows {
        let s = &row.scenario;
        let (gamma, alpha, b) = match s.significance {
            Significance::Target { gamma } => (gamma.to_string(), "-".to_string(), "-".to_string()),
            Significance::Explicit { alpha, permutations } => {
                ("-".to_string(), alpha.to_string(), permutations.to_string())
            }
        };
        let mut record = vec![
            s.table.clone(),
            s.signal.to_string(),
            s.method.to_string(),
            gamma,
            alpha,
            b,
            s.noise.family().to_string(),
            s.noise.parameter().map_or_else(|| "-".to_string(), |p| p.to_string()),
            s.lambda.to_string(),
            s.replicates.to_string(),
        ];
        record.extend(row.histogram.counts.iter().map(u64::to_string));
        record.push(opt(row.d_h));
        record.push(opt(row.ari));
        record.push(if with_time {
            format!("{:.4}", row.time_seconds)
        } else {
            "-".to_string()
        });
        w.write_record(&record).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_sizes() {
        assert_eq!(full_plan(TableId::Window, 100, 0).len(), 4);
        assert_eq!(full_plan(TableId::VonMises, 100, 0).len(), 2 + 5 * 8);
        assert_eq!(full_plan(TableId::WrappedCauchy, 100, 0).len(), 42);
        assert_eq!(full_plan(TableId::Dependent, 100, 0).len(), 6);
        assert_eq!(full_plan(TableId::Lambda, 100, 0).len(), 27);
        for t in TableId::ALL {
            assert_eq!(t.name().parse::<TableId>().unwrap(), t);
        }
    }

    #[test]
    fn small_run_is_reproducible() {
        let s = Scenario::new("test", SignalId::S4, NoiseSpec::VonMises { kappa: 8.0 }, 0.05, 4, 1);
        let a = run_scenario(&s).unwrap();
        let b = run_scenario(&s).unwrap();
        assert_eq!(a.histogram, b.histogram);
        assert_eq!(a.d_h, b.d_h);
        assert_eq!(a.histogram.total(), 4);
        let mut x = Vec::new();
        let mut y = Vec::new();
        write_rows(&mut x, &[a], false).unwrap();
        write_rows(&mut y, &[b], false).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with("table,signal,method"));
        assert_eq!(text.lines().count(), 2);
    }
}
