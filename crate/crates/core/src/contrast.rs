// SPDX-License-Identifier: MIT OR Apache-2.0

//! The circular contrast statistic
//!
//! ```text
//! C^b_{s,e} = | ‖v_{s,b}‖ + ‖v_{b+1,e}‖ − ‖v_{s,e}‖ |,   v_{a,z} = Σ_{i=a}^{z} (cos Θ_i, sin Θ_i)
//! ```
//!
//! which is maximised over `b` at the same point as the von Mises
//! log-likelihood ratio for a single mean-direction change in `[s, e]`.

use crate::circular::AngularSeries;
use crate::error::{PcidError, Result};
use serde::{Deserialize, Serialize};

/// Running sums of `cos Θ_i` and `sin Θ_i`, with `cumcos[0] = cumsin[0] = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPrefix {
    cumcos: Vec<f64>,
    cumsin: Vec<f64>,
}

/// Maximiser of the contrast over `b ∈ [s, e − 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContrastResult {
    pub argmax_b: usize,
    pub value: f64,
}

impl TrigPrefix {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(PcidError::domain("cannot build prefix sums of an empty series"));
        }
        let mut cumcos = Vec::with_capacity(values.len() + 1);
        let mut cumsin = Vec::with_capacity(values.len() + 1);
        let (mut c, mut s) = (0.0, 0.0);
        cumcos.push(c);
        cumsin.push(s);
        for &v in values {
            let (sin, cos) = v.sin_cos();
            c += cos;
            s += sin;
            cumcos.push(c);
            cumsin.push(s);
        }
        Ok(Self { cumcos, cumsin })
    }

    /// Series length `T`.
    pub fn len(&self) -> usize {
        self.cumcos.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cumcos(&self) -> &[f64] {
        &self.cumcos
    }

    pub fn cumsin(&self) -> &[f64] {
        &self.cumsin
    }

    /// Resultant vector `(Σ cos, Σ sin)` over the 1-based interval `[s, e]`.
    pub fn segment_sums(&self, s: usize, e: usize) -> Result<(f64, f64)> {
        crate::circular::check_range(s, e, self.len())?;
        Ok(self.sums_unchecked(s, e))
    }

    #[inline]
    fn sums_unchecked(&self, s: usize, e: usize) -> (f64, f64) {
        (self.cumcos[e] - self.cumcos[s - 1], self.cumsin[e] - self.cumsin[s - 1])
    }

    #[inline]
    fn norm_unchecked(&self, s: usize, e: usize) -> f64 {
        let (c, sn) = self.sums_unchecked(s, e);
        (c * c + sn * sn).sqrt()
    }
}

/// Prefix sums of a whole series.
pub fn build_prefix(series: &AngularSeries) -> Result<TrigPrefix> {
    TrigPrefix::new(series.values())
}

fn check_split(prefix: &TrigPrefix, s: usize, e: usize) -> Result<()> {
    if s < 1 || e > prefix.len() || s > e {
        return Err(PcidError::index(format!(
            "interval [{s}, {e}] is not within [1, {}]",
            prefix.len()
        )));
    }
    if e - s < 1 {
        return Err(PcidError::domain(format!(
            "interval [{s}, {e}] has fewer than two points"
        )));
    }
    Ok(())
}

/// `C^b_{s,e}` evaluated in O(1) from prefix sums. Requires `s <= b < e`.
pub fn contrast_at(prefix: &TrigPrefix, s: usize, e: usize, b: usize) -> Result<f64> {
    check_split(prefix, s, e)?;
    if b < s || b >= e {
        return Err(PcidError::index(format!("split {b} is not within [{s}, {})", e)));
    }
    let whole = prefix.norm_unchecked(s, e);
    Ok((prefix.norm_unchecked(s, b) + prefix.norm_unchecked(b + 1, e) - whole).abs())
}

/// The smallest `b` attaining `max_{b ∈ [s, e−1]} C^b_{s,e}`.
pub fn argmax_contrast(prefix: &TrigPrefix, s: usize, e: usize) -> Result<ContrastResult> {
    check_split(prefix, s, e)?;
    let whole = prefix.norm_unchecked(s, e);
    let mut best = ContrastResult {
        argmax_b: s,
        value: f64::NEG_INFINITY,
    };
    for b in s..e {
        let value = (prefix.norm_unchecked(s, b) + prefix.norm_unchecked(b + 1, e) - whole).abs();
        if value > best.value {
            best = ContrastResult { argmax_b: b, value };
        }
    }
    Ok(best)
}

/// Unit vectors `(cos Θ_i, sin Θ_i)` of a segment.
pub(crate) fn unit_vectors(values: &[f64]) -> Vec<(f64, f64)> {
    values
        .iter()
        .map(|v| {
            let (s, c) = v.sin_cos();
            (c, s)
        })
        .collect()
}

/// Maximum contrast over all splits of a segment given as unit vectors.
///
/// Returns the number of points left of the best split (in `1..n`) and the
/// maximum. This single routine scores both observed and permuted segments,
/// so that identical arrangements produce bitwise identical statistics.
#[inline]
pub(crate) fn scan_max(units: &[(f64, f64)]) -> (usize, f64) {
    let (tc, ts) = units.iter().fold((0.0, 0.0), |(c, s), &(uc, us)| (c + uc, s + us));
    let whole = (tc * tc + ts * ts).sqrt();
    let (mut lc, mut ls) = (0.0, 0.0);
    let mut best_split = 1;
    let mut best = f64::NEG_INFINITY;
    for (k, &(uc, us)) in units[..units.len() - 1].iter().enumerate() {
        lc += uc;
        ls += us;
        let (rc, rs) = (tc - lc, ts - ls);
        let value = ((lc * lc + ls * ls).sqrt() + (rc * rc + rs * rs).sqrt() - whole).abs();
        if value > best {
            best = value;
            best_split = k + 1;
        }
    }
    (best_split, best)
}
