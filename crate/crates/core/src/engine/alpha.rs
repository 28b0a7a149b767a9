// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::calibration::{embedded_table, CalibrationTable};
use crate::error::{PcidError, Result};
use crate::permutation::b_from_alpha;
use serde::{Deserialize, Serialize};

/// Smallest `α` used unless explicitly overridden.
pub const ALPHA_FLOOR: f64 = 0.001;
/// Budget paired with [`ALPHA_FLOOR`].
pub const FLOOR_PERMUTATIONS: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaChoice {
    pub alpha: f64,
    pub permutations: u64,
    /// Grid column the lookup used.
    pub table_length: usize,
    /// Table value before flooring.
    pub table_alpha: f64,
    pub table_gamma_hat: f64,
    pub floored: bool,
}

/// Per-window level `γ_i = 1 − (1 − γ)^{1/k_w}`.
pub fn sidak_gamma(gamma: f64, windows: usize) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(PcidError::domain(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if windows < 1 {
        return Err(PcidError::domain("need at least one window"));
    }
    if windows == 1 {
        return Ok(gamma);
    }
    Ok(-((1.0 / windows as f64) * (-gamma).ln_1p()).exp_m1())
}

/// `T` rounded to the nearest multiple of 50 (halves up), clamped to the
/// grid range `[50, 500]`.
pub fn grid_length(length: usize) -> usize {
    (((length + 25) / 50) * 50).clamp(50, 500)
}

/// `(α, B)` for target `γ` and sequence length `T`, using the embedded grid
/// and the 0.001 floor.
pub fn choose_alpha(gamma: f64, length: usize) -> Result<AlphaChoice> {
    choose_alpha_with(embedded_table(), gamma, length, false)
}

pub fn choose_alpha_with(
    table: &CalibrationTable,
    gamma: f64,
    length: usize,
    allow_sub_milli_alpha: bool,
) -> Result<AlphaChoice> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(PcidError::config(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if length < 1 {
        return Err(PcidError::config("sequence length must be >= 1"));
    }
    let column_length = table
        .nearest_length(grid_length(length))
        .ok_or_else(|| PcidError::config("calibration table is empty"))?;
    let mut best: Option<(f64, f64, f64)> = None;
    for entry in table.column(column_length) {
        let distance = (entry.gamma_hat - gamma).abs();
        let better = match best {
            None => true,
            Some((d, a, _)) => distance < d - 1e-12 || ((distance - d).abs() <= 1e-12 && entry.alpha < a),
        };
        if better {
            best = Some((distance, entry.alpha, entry.gamma_hat));
        }
    }
    let (_, table_alpha, table_gamma_hat) =
        best.ok_or_else(|| PcidError::config(format!("calibration table has no entries for T={column_length}")))?;
    let floored = table_alpha < ALPHA_FLOOR && !allow_sub_milli_alpha;
    let (alpha, permutations) = if floored {
        (ALPHA_FLOOR, FLOOR_PERMUTATIONS)
    } else {
        (table_alpha, b_from_alpha(table_alpha)?)
    };
    Ok(AlphaChoice {
        alpha,
        permutations,
        table_length: column_length,
        table_alpha,
        table_gamma_hat,
        floored,
    })
}
