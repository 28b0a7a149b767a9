// SPDX-License-Identifier: MIT OR Apache-2.0

//! Isolate-detect engine: expansion schedules, the recursive detector, the
//! windowed variant for long series and significance-level selection.

mod alpha;
mod detect;
mod schedule;
mod window;

pub use alpha::{
    choose_alpha, choose_alpha_with, grid_length, sidak_gamma, AlphaChoice, ALPHA_FLOOR, FLOOR_PERMUTATIONS,
};
pub use detect::{
    detect_with, pcid_detect, segment_means, AuditEntry, DetectionResult, IntervalCache, PermutationTester,
    SegmentTester, TestRecord, WindowParams,
};
pub use schedule::{build_schedule, Expansion, ExpansionSchedule, Interval, ScheduledInterval};
pub use window::{pcid_windowed, stitch_interval, windows};

use crate::error::{PcidError, Result};
use crate::permutation::{b_from_alpha, PermTestConfig};
use serde::{Deserialize, Serialize};

/// How the per-test significance level `α` and budget `B` are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Significance {
    /// Look up `α` for a target whole-procedure Type-I error `γ`.
    Target { gamma: f64 },
    /// Use the given `α` and `B` as is.
    Explicit { alpha: f64, permutations: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcidConfig {
    /// Expansion step `λ_T`.
    pub lambda: usize,
    pub significance: Significance,
    /// Maximum window length `w` of the windowed variant.
    pub window: usize,
    /// Keep table values of `α` below 0.001 instead of flooring them.
    pub allow_sub_milli_alpha: bool,
    pub seed: u64,
}

impl Default for PcidConfig {
    fn default() -> Self {
        Self {
            lambda: 5,
            significance: Significance::Target { gamma: 0.05 },
            window: 500,
            allow_sub_milli_alpha: false,
            seed: 0,
        }
    }
}

impl PcidConfig {
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.significance = Significance::Target { gamma };
        self
    }

    pub fn with_alpha(mut self, alpha: f64, permutations: u64) -> Self {
        self.significance = Significance::Explicit { alpha, permutations };
        self
    }

    pub fn with_lambda(mut self, lambda: usize) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 1 {
            return Err(PcidError::config("lambda must be >= 1"));
        }
        if self.window < 2 * self.lambda {
            return Err(PcidError::config(format!(
                "window {} must be at least 2 * lambda = {}",
                self.window,
                2 * self.lambda
            )));
        }
        match self.significance {
            Significance::Target { gamma } => {
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(PcidError::config(format!("gamma must lie in (0, 1), got {gamma}")));
                }
            }
            Significance::Explicit { alpha, permutations } => {
                PermTestConfig::new(permutations, alpha, self.seed)?;
            }
        }
        Ok(())
    }

    /// `(α, B)` for a sequence of `length` points, optionally with a per-window
    /// target `γ_i` replacing the configured `γ`.
    pub fn resolve(&self, length: usize, gamma_override: Option<f64>) -> Result<WindowParams> {
        self.validate()?;
        match self.significance {
            Significance::Target { gamma } => {
                let gamma = gamma_override.unwrap_or(gamma);
                let choice = choose_alpha_with(
                    crate::calibration::embedded_table(),
                    gamma,
                    length,
                    self.allow_sub_milli_alpha,
                )?;
                Ok(WindowParams {
                    interval: Interval::new(1, length.max(1)),
                    gamma: Some(gamma),
                    alpha: choice.alpha,
                    permutations: choice.permutations,
                })
            }
            Significance::Explicit { alpha, permutations } => Ok(WindowParams {
                interval: Interval::new(1, length.max(1)),
                gamma: None,
                alpha,
                permutations,
            }),
        }
    }
}

/// Builds the permutation configuration for explicit `α` with `B = 10^d`.
pub fn explicit_from_alpha(alpha: f64) -> Result<Significance> {
    Ok(Significance::Explicit {
        alpha,
        permutations: b_from_alpha(alpha)?,
    })
}
