// SPDX-License-Identifier: MIT OR Apache-2.0

//! Segmentation quality: `N̂ − N`, the Adjusted Rand Index and the scaled
//! Hausdorff distance.

use crate::error::{PcidError, Result};
use serde::{Deserialize, Serialize};

fn check_changepoints(cps: &[usize], length: usize) -> Result<()> {
    let mut prev = 0;
    for &r in cps {
        if r <= prev || r >= length {
            return Err(PcidError::index(format!(
                "change-points must be strictly increasing in [1, {}]",
                length.saturating_sub(1)
            )));
        }
        prev = r;
    }
    Ok(())
}

/// Segment lengths of `[1, T]` cut after each change-point.
fn segment_lengths(cps: &[usize], length: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(cps.len() + 1);
    let mut prev = 0;
    for &r in cps.iter().chain(std::iter::once(&length)) {
        out.push(r - prev);
        prev = r;
    }
    out
}

fn pairs(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Hubert–Arabie Adjusted Rand Index between the labelings induced by two
/// change-point sets on `1..=T`.
///
/// When the chance-corrected denominator vanishes (both labelings a single
/// block, or both all singletons) the index is 1 for identical partitions
/// and 0 otherwise.
pub fn ari(truth: &[usize], estimate: &[usize], length: usize) -> Result<f64> {
    if length < 1 {
        return Err(PcidError::domain("sequence length must be >= 1"));
    }
    check_changepoints(truth, length)?;
    check_changepoints(estimate, length)?;
    let a = segment_lengths(truth, length);
    let b = segment_lengths(estimate, length);

    // overlaps of consecutive segments, merged like sorted interval lists
    let mut index = 0.0;
    let (mut i, mut j) = (0, 0);
    let (mut end_a, mut end_b) = (a[0], b[0]);
    let mut pos = 0;
    while i < a.len() && j < b.len() {
        let end = end_a.min(end_b);
        index += pairs(end - pos);
        pos = end;
        if end_a == end {
            i += 1;
            if i < a.len() {
                end_a += a[i];
            }
        }
        if end_b == end {
            j += 1;
            if j < b.len() {
                end_b += b[j];
            }
        }
    }
    let sum_a: f64 = a.iter().map(|&n| pairs(n)).sum();
    let sum_b: f64 = b.iter().map(|&n| pairs(n)).sum();
    let total = pairs(length);
    let expected = if total > 0.0 { sum_a * sum_b / total } else { 0.0 };
    let max_index = 0.5 * (sum_a + sum_b);
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(if truth == estimate { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / denom)
}

/// `d_H = n_s⁻¹ max{max_j min_k |r_j − r̂_k|, max_k min_j |r_j − r̂_k|}`, with
/// `n_s` the longest segment of the true signal. `None` if either set is
/// empty.
pub fn hausdorff_scaled(truth: &[usize], estimate: &[usize], length: usize) -> Result<Option<f64>> {
    check_changepoints(truth, length)?;
    check_changepoints(estimate, length)?;
    if truth.is_empty() || estimate.is_empty() {
        return Ok(None);
    }
    let directed = |from: &[usize], to: &[usize]| {
        from.iter()
            .map(|&x| to.iter().map(|&y| x.abs_diff(y)).min().unwrap_or(0))
            .max()
            .unwrap_or(0)
    };
    let sup = directed(truth, estimate).max(directed(estimate, truth));
    let n_s = segment_lengths(truth, length).into_iter().max().unwrap_or(length);
    Ok(Some(sup as f64 / n_s as f64))
}

/// Counts of `N̂ − N` over the bins `≤−3, −2, −1, 0, 1, 2, ≥3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NDiffHistogram {
    pub counts: [u64; 7],
}

impl NDiffHistogram {
    pub const LABELS: [&'static str; 7] = ["<=-3", "-2", "-1", "0", "1", "2", ">=3"];

    pub fn bin(diff: i64) -> usize {
        (diff.clamp(-3, 3) + 3) as usize
    }

    pub fn add(&mut self, diff: i64) {
        self.counts[Self::bin(diff)] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Count in the `N̂ = N` bin.
    pub fn exact(&self) -> u64 {
        self.counts[3]
    }
}

pub fn n_diff_histogram<I: IntoIterator<Item = i64>>(diffs: I) -> NDiffHistogram {
    let mut h = NDiffHistogram::default();
    for d in diffs {
        h.add(d);
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationMetrics {
    pub n_diff: i64,
    /// `None` when the truth has no change-points.
    pub ari: Option<f64>,
    pub d_h: Option<f64>,
    pub runtime_seconds: f64,
}

/// All metrics for one replicate.
pub fn evaluate(
    truth: &[usize],
    estimate: &[usize],
    length: usize,
    runtime_seconds: f64,
) -> Result<SegmentationMetrics> {
    Ok(SegmentationMetrics {
        n_diff: estimate.len() as i64 - truth.len() as i64,
        ari: if truth.is_empty() {
            None
        } else {
            Some(ari(truth, estimate, length)?)
        },
        d_h: hausdorff_scaled(truth, estimate, length)?,
        runtime_seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ari_examples() {
        assert_eq!(ari(&[50], &[50], 100).unwrap(), 1.0);
        assert_eq!(ari(&[2], &[2], 4).unwrap(), 1.0);
        assert_eq!(ari(&[], &[], 10).unwrap(), 1.0);
        // one true split against none: every pair agrees only within segments
        assert_eq!(ari(&[50], &[], 100).unwrap(), 0.0);
        assert!(ari(&[50], &[45], 100).unwrap() < 1.0);
        assert!(ari(&[0], &[], 10).is_err());
        assert!(ari(&[5, 3], &[], 10).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff_scaled(&[50], &[50], 100).unwrap(), Some(0.0));
        assert_eq!(hausdorff_scaled(&[50], &[45], 100).unwrap(), Some(0.1));
        assert_eq!(hausdorff_scaled(&[], &[17], 100).unwrap(), None);
        assert_eq!(hausdorff_scaled(&[17], &[], 100).unwrap(), None);
        // n_s includes the boundary segments: longest is (30, 100]
        let d = hausdorff_scaled(&[10, 30], &[10], 100).unwrap().unwrap();
        assert!((d - 20.0 / 70.0).abs() < 1e-15);
    }

    #[test]
    fn histogram_bins() {
        let h = n_diff_histogram(std::iter::repeat_n(0, 100));
        assert_eq!(h.counts, [0, 0, 0, 100, 0, 0, 0]);
        let h = n_diff_histogram([-2].into_iter().chain(std::iter::repeat_n(0, 98)).chain([1]));
        assert_eq!(h.counts, [0, 1, 0, 98, 1, 0, 0]);
        assert_eq!(NDiffHistogram::bin(-7), 0);
        assert_eq!(NDiffHistogram::bin(12), 6);
    }

    #[test]
    fn evaluate_no_change_truth() {
        let m = evaluate(&[], &[17], 100, 0.5).unwrap();
        assert_eq!((m.n_diff, m.ari, m.d_h), (1, None, None));
        let m = evaluate(&[50], &[50], 100, 0.0).unwrap();
        assert_eq!((m.n_diff, m.ari, m.d_h), (0, Some(1.0), Some(0.0)));
    }
}
