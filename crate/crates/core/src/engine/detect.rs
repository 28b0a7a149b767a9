// SPDX-License-Identifier: MIT OR Apache-2.0

use super::schedule::{build_schedule, Expansion, Interval};
use super::{PcidConfig, Significance};
use crate::circular::{slice_mean, Angle, AngularSeries};
use crate::error::{PcidError, Result};
use crate::permutation::{permutation_test_prepared, PermTestConfig, PermTestOutcome, PreparedSegment};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Intervals whose permutation test already came out negative during the
/// current top-level detection.
pub type IntervalCache = HashSet<Interval>;

/// Result of scoring and testing one interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    /// Global index `b̃` maximising the contrast in the interval.
    pub argmax: usize,
    pub contrast: f64,
    pub outcome: PermTestOutcome,
}

/// Decides whether an interval contains a change-point.
///
/// The engine only needs this hook; [`PermutationTester`] is the real test.
pub trait SegmentTester {
    fn test(&mut self, series: &AngularSeries, interval: Interval) -> Result<TestRecord>;
}

/// The seeded permutation test with a fixed `(α, B)`.
#[derive(Clone, Copy, Debug)]
pub struct PermutationTester {
    cfg: PermTestConfig,
}

impl PermutationTester {
    pub fn new(alpha: f64, permutations: u64, seed: u64) -> Result<Self> {
        Ok(Self {
            cfg: PermTestConfig::new(permutations, alpha, seed)?,
        })
    }
}

impl SegmentTester for PermutationTester {
    fn test(&mut self, series: &AngularSeries, interval: Interval) -> Result<TestRecord> {
        let values = series.segment(interval.start, interval.end)?;
        if values.len() < 2 {
            return Ok(TestRecord {
                argmax: interval.start,
                contrast: 0.0,
                outcome: PermTestOutcome {
                    detected: false,
                    permutations_run: 0,
                    exceedances: 0,
                },
            });
        }
        let prepared = PreparedSegment::new(values)?;
        let (split, contrast) = prepared.observed();
        let cfg = self.cfg.for_interval(interval.start, interval.end);
        Ok(TestRecord {
            argmax: interval.start + split - 1,
            contrast,
            outcome: permutation_test_prepared(&prepared, &cfg, contrast),
        })
    }
}

/// One tested interval, in visitation order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    /// The `[s, e]` of the recursive call that scheduled this interval.
    pub scope: Interval,
    pub interval: Interval,
    pub tag: Expansion,
    pub argmax: usize,
    pub contrast: f64,
    pub outcome: PermTestOutcome,
}

/// Significance parameters used on one stretch of the data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowParams {
    pub interval: Interval,
    /// Target Type-I error for this stretch, when it was table-driven.
    pub gamma: Option<f64>,
    pub alpha: f64,
    pub permutations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    /// Sorted estimates `r̂_1 < … < r̂_N̂`; `r̂` ends a segment.
    pub changepoints: Vec<usize>,
    pub n_hat: usize,
    /// Circular mean of each of the `N̂ + 1` estimated segments.
    pub segment_means: Vec<Angle>,
    pub audit: Vec<AuditEntry>,
    pub windows: Vec<WindowParams>,
}

impl DetectionResult {
    pub(crate) fn assemble(
        series: &AngularSeries,
        scope: Interval,
        mut changepoints: Vec<usize>,
        audit: Vec<AuditEntry>,
        windows: Vec<WindowParams>,
    ) -> Result<Self> {
        changepoints.sort_unstable();
        changepoints.dedup();
        let segment_means = segment_means(series, scope, &changepoints)?;
        Ok(Self {
            n_hat: changepoints.len(),
            changepoints,
            segment_means,
            audit,
            windows,
        })
    }
}

/// Circular means of the segments of `scope` cut after each change-point.
pub fn segment_means(series: &AngularSeries, scope: Interval, changepoints: &[usize]) -> Result<Vec<Angle>> {
    let mut means = Vec::with_capacity(changepoints.len() + 1);
    let mut start = scope.start;
    for &cp in changepoints {
        if cp < start || cp >= scope.end {
            return Err(PcidError::index(format!(
                "change-point {cp} outside {scope} or out of order"
            )));
        }
        means.push(slice_mean(series.segment(start, cp)?));
        start = cp + 1;
    }
    means.push(slice_mean(series.segment(start, scope.end)?));
    Ok(means)
}

/// Recursive detection on `[s, e]` with an arbitrary tester.
///
/// Walks the expansion schedule, skipping intervals cached as negative. On
/// the first detection at `b̃` the walk stops; a right-expanding hit recurses
/// on `[b̃ + 1, e]` and a left-expanding hit on `[s, b̃]`. Returns the
/// change-points in detection order and the audit log.
pub fn detect_with<T: SegmentTester + ?Sized>(
    series: &AngularSeries,
    s: usize,
    e: usize,
    lambda: usize,
    tester: &mut T,
    cache: &mut IntervalCache,
) -> Result<(Vec<usize>, Vec<AuditEntry>)> {
    if s < 1 || e > series.len() {
        return Err(PcidError::index(format!(
            "range [{s}, {e}] outside series of length {}",
            series.len()
        )));
    }
    let mut changepoints = Vec::new();
    let mut audit = Vec::new();
    let mut stack = vec![(s, e)];
    // explicit stack: each call ends with at most one tail recursion
    while let Some((s, e)) = stack.pop() {
        if e <= s {
            continue;
        }
        let schedule = build_schedule(s, e, lambda)?;
        let scope = schedule.scope;
        for item in schedule.iter() {
            if cache.contains(&item.interval) {
                continue;
            }
            let record = tester.test(series, item.interval)?;
            audit.push(AuditEntry {
                scope,
                interval: item.interval,
                tag: item.tag,
                argmax: record.argmax,
                contrast: record.contrast,
                outcome: record.outcome,
            });
            if record.outcome.detected {
                let b = record.argmax;
                if b < item.interval.start || b >= item.interval.end {
                    return Err(PcidError::index(format!(
                        "tester returned split {b} outside {}",
                        item.interval
                    )));
                }
                changepoints.push(b);
                match item.tag {
                    Expansion::Left => stack.push((s, b)),
                    _ => stack.push((b + 1, e)),
                }
                break;
            }
            cache.insert(item.interval);
        }
    }
    Ok((changepoints, audit))
}

/// PCID on `[s, e]` of `series`.
///
/// A table-driven configuration picks `(α, B)` from the length `e − s + 1`.
pub fn pcid_detect(
    series: &AngularSeries,
    s: usize,
    e: usize,
    cfg: &PcidConfig,
    cache: &mut IntervalCache,
) -> Result<DetectionResult> {
    cfg.validate()?;
    if s < 1 || s > e || e > series.len() {
        return Err(PcidError::index(format!(
            "range [{s}, {e}] outside series of length {}",
            series.len()
        )));
    }
    let scope = Interval::new(s, e);
    let mut params = cfg.resolve(scope.len(), None)?;
    params.interval = scope;
    let mut tester = PermutationTester::new(params.alpha, params.permutations, cfg.seed)?;
    let (cps, audit) = detect_with(series, s, e, cfg.lambda, &mut tester, cache)?;
    DetectionResult::assemble(series, scope, cps, audit, vec![params])
}

impl Significance {
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            Significance::Target { gamma } => Some(gamma),
            Significance::Explicit { .. } => None,
        }
    }
}
