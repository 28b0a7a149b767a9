// SPDX-License-Identifier: MIT OR Apache-2.0

use super::alpha::sidak_gamma;
use super::detect::AuditEntry;
use super::detect::{detect_with, pcid_detect, DetectionResult, IntervalCache, PermutationTester, SegmentTester};
use super::schedule::{Expansion, Interval};
use super::{PcidConfig, Significance};
use crate::circular::AngularSeries;
use crate::error::{PcidError, Result};

/// Disjoint windows `J_i = [w(i−1)+1, min(wi, T)]`, `i = 1..⌈T/w⌉`.
pub fn windows(length: usize, w: usize) -> Result<Vec<Interval>> {
    if w < 1 {
        return Err(PcidError::config("window length must be >= 1"));
    }
    Ok((0..length.div_ceil(w))
        .map(|i| Interval::new(i * w + 1, ((i + 1) * w).min(length)))
        .collect())
}

/// Interval tested across the boundary `b` between two windows.
///
/// Spans `b ± ⌊w/2⌋`, shrunk so that it starts after the last estimate of the
/// left window and ends at the first estimate of the right window. `None`
/// when fewer than two points remain.
pub fn stitch_interval(
    boundary: usize,
    w: usize,
    left_last: Option<usize>,
    right_first: Option<usize>,
    length: usize,
) -> Option<Interval> {
    let half = w / 2;
    let lo = (left_last.map_or(1, |r| r + 1))
        .max(boundary.saturating_sub(half))
        .max(1);
    let hi = right_first
        .map_or(boundary + half, |r| r.min(boundary + half))
        .min(length);
    (hi > lo).then_some(Interval::new(lo, hi))
}

/// Windowed PCID for long series.
///
/// Series no longer than `w` are handed to [`pcid_detect`] unchanged. Longer
/// ones are cut into windows, each analysed with its own `(α, B)` (from the
/// Šidák-corrected target when table-driven), and one extra permutation test
/// is run across every window boundary.
pub fn pcid_windowed(series: &AngularSeries, cfg: &PcidConfig) -> Result<DetectionResult> {
    cfg.validate()?;
    let length = series.len();
    if length < 2 {
        return Err(PcidError::domain("windowed detection needs at least two observations"));
    }
    if length <= cfg.window {
        return pcid_detect(series, 1, length, cfg, &mut IntervalCache::new());
    }
    let parts = windows(length, cfg.window)?;
    let gamma_i = match cfg.significance {
        Significance::Target { gamma } => Some(sidak_gamma(gamma, parts.len())?),
        Significance::Explicit { .. } => None,
    };

    let mut params = Vec::with_capacity(parts.len());
    let mut testers = Vec::with_capacity(parts.len());
    let mut per_window = Vec::with_capacity(parts.len());
    let mut audit = Vec::new();
    for part in &parts {
        let mut p = cfg.resolve(part.len(), gamma_i)?;
        p.interval = *part;
        let mut tester = PermutationTester::new(p.alpha, p.permutations, cfg.seed)?;
        let (mut cps, log) = detect_with(
            series,
            part.start,
            part.end,
            cfg.lambda,
            &mut tester,
            &mut IntervalCache::new(),
        )?;
        cps.sort_unstable();
        audit.extend(log);
        per_window.push(cps);
        params.push(p);
        testers.push(tester);
    }

    let mut changepoints: Vec<usize> = per_window.iter().flatten().copied().collect();
    for i in 0..parts.len() - 1 {
        let Some(interval) = stitch_interval(
            parts[i].end,
            cfg.window,
            per_window[i].last().copied(),
            per_window[i + 1].first().copied(),
            length,
        ) else {
            continue;
        };
        let record = testers[i].test(series, interval)?;
        audit.push(AuditEntry {
            scope: interval,
            interval,
            tag: Expansion::Stitch,
            argmax: record.argmax,
            contrast: record.contrast,
            outcome: record.outcome,
        });
        if record.outcome.detected {
            changepoints.push(record.argmax);
        }
    }
    DetectionResult::assemble(series, Interval::new(1, length), changepoints, audit, params)
}
