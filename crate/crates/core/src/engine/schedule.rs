// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::error::{PcidError, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;

/// 1-based inclusive index interval `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub const fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start <= t && t <= self.end
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// Which end-point of the scope an interval grows from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expansion {
    /// `[s, c^r_j]`: left end fixed, grows rightwards.
    Right,
    /// `[c^l_j, e]`: right end fixed, grows leftwards.
    Left,
    /// Boundary interval tested between two windows.
    Stitch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledInterval {
    pub interval: Interval,
    pub tag: Expansion,
}

/// Ordered intervals `R_1, L_1, R_2, L_2, …, R_K, L_K` over a scope `[s, e]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSchedule {
    pub scope: Interval,
    pub lambda: usize,
    pub intervals: Vec<ScheduledInterval>,
}

impl ExpansionSchedule {
    pub fn iter(&self) -> impl Iterator<Item = &ScheduledInterval> {
        self.intervals.iter()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Builds the interleaved expansion schedule over `[s, e]` with step `λ`.
///
/// With `K = ⌈(e − s + 1)/λ⌉`, the j-th right interval is
/// `[s, min(s + jλ − 1, e)]` and the j-th left interval is
/// `[max(e − jλ + 1, s), e]`. Exact duplicates (only ever the full scope)
/// are kept at their first occurrence.
pub fn build_schedule(s: usize, e: usize, lambda: usize) -> Result<ExpansionSchedule> {
    if s < 1 || s >= e {
        return Err(PcidError::domain(format!(
            "schedule needs 1 <= s < e, got s={s}, e={e}"
        )));
    }
    if lambda < 1 {
        return Err(PcidError::domain("expansion parameter must be >= 1"));
    }
    let n = e - s + 1;
    let k_max = n.div_ceil(lambda);
    let mut seen = HashSet::with_capacity(2 * k_max);
    let mut intervals = Vec::with_capacity(2 * k_max);
    for j in 1..=k_max {
        let step = j * lambda;
        let right = Interval::new(s, (s + step - 1).min(e));
        let left = Interval::new(if step > e - s { s } else { e + 1 - step }, e);
        for (interval, tag) in [(right, Expansion::Right), (left, Expansion::Left)] {
            if seen.insert(interval) {
                intervals.push(ScheduledInterval { interval, tag });
            }
        }
    }
    Ok(ExpansionSchedule {
        scope: Interval::new(s, e),
        lambda,
        intervals,
    })
}
