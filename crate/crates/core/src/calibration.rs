// SPDX-License-Identifier: MIT OR Apache-2.0

//! Whole-procedure Type-I error: the default `(T, α) → γ̂` grid and Monte
//! Carlo re-estimation under a constant signal.

use crate::engine::{pcid_detect, IntervalCache, PcidConfig};
use crate::error::{PcidError, Result};
use crate::rng::replicate_seed;
use crate::synth::{generate, NoiseSpec, SignalSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::OnceLock;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub length: usize,
    pub alpha: f64,
    pub gamma_hat: f64,
}

/// `(T, α) → γ̂` grid, kept sorted by `T` then decreasing `α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    entries: Vec<CalibrationEntry>,
}

/// `(T, [(α, γ̂), …])`, 1000 null replicates each with `λ = 5`, `B = 10⁴`.
const DEFAULT_GRID: &[(usize, &[(f64, f64)])] = &[
    (
        50,
        &[
            (0.01, 0.083),
            (0.009, 0.078),
            (0.008, 0.066),
            (0.007, 0.058),
            (0.006, 0.046),
            (0.005, 0.041),
            (0.004, 0.035),
            (0.003, 0.029),
            (0.002, 0.008),
            (0.001, 0.006),
            (0.0005, 0.002),
            (0.0001, 0.000),
        ],
    ),
    (
        100,
        &[
            (0.01, 0.149),
            (0.005, 0.083),
            (0.004, 0.069),
            (0.003, 0.051),
            (0.002, 0.037),
            (0.001, 0.011),
            (0.0005, 0.005),
            (0.0001, 0.001),
        ],
    ),
    (
        150,
        &[
            (0.005, 0.097),
            (0.003, 0.055),
            (0.002, 0.032),
            (0.001, 0.017),
            (0.0005, 0.010),
            (0.0001, 0.003),
        ],
    ),
    (
        200,
        &[
            (0.005, 0.131),
            (0.002, 0.057),
            (0.001, 0.037),
            (0.0005, 0.017),
            (0.0003, 0.013),
            (0.0002, 0.004),
            (0.0001, 0.003),
        ],
    ),
    (
        250,
        &[
            (0.002, 0.056),
            (0.001, 0.034),
            (0.0005, 0.019),
            (0.0004, 0.014),
            (0.0003, 0.012),
            (0.0002, 0.010),
            (0.0001, 0.002),
        ],
    ),
    (
        300,
        &[
            (0.002, 0.070),
            (0.001, 0.041),
            (0.0005, 0.021),
            (0.0004, 0.017),
            (0.0003, 0.013),
            (0.0002, 0.009),
            (0.0001, 0.003),
        ],
    ),
    (
        350,
        &[
            (0.002, 0.068),
            (0.001, 0.044),
            (0.0005, 0.019),
            (0.0004, 0.018),
            (0.0003, 0.013),
            (0.0002, 0.008),
            (0.0001, 0.007),
        ],
    ),
    (
        400,
        &[
            (0.002, 0.076),
            (0.001, 0.045),
            (0.0005, 0.025),
            (0.0004, 0.021),
            (0.0003, 0.013),
            (0.0002, 0.006),
            (0.0001, 0.003),
        ],
    ),
    (
        450,
        &[
            (0.002, 0.081),
            (0.001, 0.048),
            (0.0005, 0.020),
            (0.0004, 0.025),
            (0.0003, 0.013),
            (0.0002, 0.009),
            (0.0001, 0.005),
        ],
    ),
    (
        500,
        &[
            (0.002, 0.096),
            (0.001, 0.057),
            (0.0005, 0.031),
            (0.0004, 0.028),
            (0.0003, 0.020),
            (0.0002, 0.009),
            (0.0001, 0.002),
        ],
    ),
];

impl CalibrationTable {
    /// Validated table: `γ̂ ∈ [0, 1]`, `α ∈ (0, 1)`, no duplicate cells, and
    /// `γ̂` non-decreasing in `α` within each `T`.
    pub fn new(entries: Vec<CalibrationEntry>) -> Result<Self> {
        let table = Self::from_entries_unchecked(entries)?;
        if let Some((t, lo, hi)) = table.monotonicity_violations().first() {
            return Err(PcidError::config(format!(
                "gamma_hat decreases with alpha at T={t}: alpha {lo} vs {hi}"
            )));
        }
        Ok(table)
    }

    fn from_entries_unchecked(mut entries: Vec<CalibrationEntry>) -> Result<Self> {
        for e in &entries {
            if e.length < 1 || !(e.alpha > 0.0 && e.alpha < 1.0) || !(0.0..=1.0).contains(&e.gamma_hat) {
                return Err(PcidError::config(format!("invalid calibration entry {e:?}")));
            }
        }
        entries.sort_by(|a, b| a.length.cmp(&b.length).then(b.alpha.total_cmp(&a.alpha)));
        if entries
            .windows(2)
            .any(|w| w[0].length == w[1].length && w[0].alpha == w[1].alpha)
        {
            return Err(PcidError::config("duplicate (T, alpha) calibration cell"));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[CalibrationEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Grid lengths in increasing order.
    pub fn lengths(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.entries.iter().map(|e| e.length).collect();
        out.dedup();
        out
    }

    /// Grid length closest to `length` (smaller one on ties).
    pub fn nearest_length(&self, length: usize) -> Option<usize> {
        self.lengths().into_iter().min_by_key(|&t| (t.abs_diff(length), t))
    }

    /// Entries of column `T`, by decreasing `α`.
    pub fn column(&self, length: usize) -> impl Iterator<Item = &CalibrationEntry> {
        self.entries.iter().filter(move |e| e.length == length)
    }

    pub fn lookup(&self, length: usize, alpha: f64) -> Option<f64> {
        self.column(length)
            .find(|e| (e.alpha - alpha).abs() <= 1e-12 * alpha)
            .map(|e| e.gamma_hat)
    }

    /// `(T, smaller α, larger α)` pairs where `γ̂` drops as `α` grows.
    pub fn monotonicity_violations(&self) -> Vec<(usize, f64, f64)> {
        self.entries
            .windows(2)
            .filter(|w| w[0].length == w[1].length && w[1].gamma_hat > w[0].gamma_hat)
            .map(|w| (w[0].length, w[1].alpha, w[0].alpha))
            .collect()
    }
}

/// The default calibration grid.
///
/// Loaded without the monotonicity check: the `T = 450` column has
/// `γ̂(0.0004) = 0.025 > γ̂(0.0005) = 0.020`, and the values are kept as is.
pub fn embedded_table() -> &'static CalibrationTable {
    static TABLE: OnceLock<CalibrationTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let entries = DEFAULT_GRID
            .iter()
            .flat_map(|&(length, cells)| {
                cells.iter().map(move |&(alpha, gamma_hat)| CalibrationEntry {
                    length,
                    alpha,
                    gamma_hat,
                })
            })
            .collect();
        CalibrationTable::from_entries_unchecked(entries).expect("default grid is well formed")
    })
}

/// A Monte Carlo estimate of `γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Type1Estimate {
    pub length: usize,
    pub alpha: f64,
    pub permutations: u64,
    pub lambda: usize,
    pub n_sims: usize,
    /// Replicates with at least one detection.
    pub rejections: usize,
    pub gamma_hat: f64,
    /// Binomial standard error `√(γ̂(1 − γ̂)/n)`.
    pub se: f64,
    /// Number of replicates by detected count `N̂`.
    pub counts: BTreeMap<usize, usize>,
}

impl Type1Estimate {
    /// Binomial standard error at a reference rate `p`.
    pub fn se_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.n_sims as f64).sqrt()
    }
}

/// Runs PCID on `n_sims` constant-signal replicates of `noise` and reports the
/// share with at least one detection.
///
/// Replicate `i` draws its data and its permutations from
/// `replicate_seed(seed, i)`, so the estimate does not depend on the number
/// of worker threads.
#[allow(clippy::too_many_arguments)]
pub fn estimate_type1(
    length: usize,
    alpha: f64,
    permutations: u64,
    lambda: usize,
    n_sims: usize,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<Type1Estimate> {
    if n_sims == 0 {
        return Err(PcidError::config("need at least one replicate"));
    }
    if length < 2 {
        return Err(PcidError::config("sequence length must be >= 2"));
    }
    noise.validate()?;
    let cfg = PcidConfig::default()
        .with_lambda(lambda)
        .with_alpha(alpha, permutations)
        .with_window(length.max(2 * lambda));
    cfg.validate()?;
    let signal = SignalSpec::constant(length, 0.0)?;
    let found: Vec<usize> = (0..n_sims)
        .into_par_iter()
        .map(|i| {
            let rs = replicate_seed(seed, i as u64);
            let series = generate(&signal, noise, rs)?;
            let r = pcid_detect(&series, 1, length, &cfg.with_seed(rs), &mut IntervalCache::new())?;
            Ok(r.n_hat)
        })
        .collect::<Result<_>>()?;
    let mut counts = BTreeMap::new();
    for &n in &found {
        *counts.entry(n).or_insert(0) += 1;
    }
    let rejections = found.iter().filter(|&&n| n > 0).count();
    let gamma_hat = rejections as f64 / n_sims as f64;
    Ok(Type1Estimate {
        length,
        alpha,
        permutations,
        lambda,
        n_sims,
        rejections,
        gamma_hat,
        se: (gamma_hat * (1.0 - gamma_hat) / n_sims as f64).sqrt(),
        counts,
    })
}
