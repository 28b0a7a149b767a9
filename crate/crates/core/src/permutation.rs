// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded permutation test for a single change in mean direction.
//!
//! Permutation `i` of a segment is a Fisher–Yates shuffle driven by the
//! substream `(seed, stream, i)`. A permuted maximum contrast at least as
//! large as the observed one counts as an exceedance; the test stops as soon
//! as the exceedance count reaches the cutoff `c = B·α` and reports a
//! change-point iff fewer than `c` exceedances were seen.

use crate::contrast::{scan_max, unit_vectors};
use crate::error::{PcidError, Result};
use crate::rng::{interval_stream, substream};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Permutation budget, significance level and stream identity of one test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermTestConfig {
    permutations: u64,
    alpha: f64,
    cutoff: u64,
    seed: u64,
    stream: u64,
}

impl PermTestConfig {
    /// Fails unless `α ∈ (0, 1)` and `B·α` is a positive integer.
    pub fn new(permutations: u64, alpha: f64, seed: u64) -> Result<Self> {
        if permutations == 0 {
            return Err(PcidError::config("permutation budget B must be >= 1"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(PcidError::config(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let product = permutations as f64 * alpha;
        let cutoff = product.round();
        if (product - cutoff).abs() > 1e-9 * product.max(1.0) || cutoff < 1.0 {
            return Err(PcidError::config(format!(
                "B * alpha = {permutations} * {alpha} = {product} is not a positive integer"
            )));
        }
        Ok(Self {
            permutations,
            alpha,
            cutoff: cutoff as u64,
            seed,
            stream: 0,
        })
    }

    /// Same parameters, bound to the substream of interval `[start, end]`.
    pub fn for_interval(self, start: usize, end: usize) -> Self {
        self.with_stream(interval_stream(start, end))
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn permutations(&self) -> u64 {
        self.permutations
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `c = B·α`.
    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermTestOutcome {
    pub detected: bool,
    pub permutations_run: u64,
    pub exceedances: u64,
}

impl PermTestOutcome {
    const SKIPPED: Self = Self {
        detected: false,
        permutations_run: 0,
        exceedances: 0,
    };
}

/// True iff `n! < B`, i.e. the segment has too few distinct orderings for the
/// budget and no permutations are run.
pub fn permutation_count_guard(n: usize, budget: u64) -> bool {
    let mut factorial: u64 = 1;
    for k in 2..=n as u64 {
        factorial = factorial.saturating_mul(k);
        if factorial >= budget {
            return false;
        }
    }
    factorial < budget
}

/// `B = 10^d` where `d` is the number of decimals of `α`.
pub fn b_from_alpha(alpha: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(PcidError::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    // shortest round-trip decimal representation, never scientific
    let repr = format!("{alpha}");
    let decimals = repr.split_once('.').map_or(0, |(_, frac)| frac.len());
    if decimals > 18 {
        return Err(PcidError::domain(format!(
            "alpha {alpha} has {decimals} decimals; B = 10^{decimals} does not fit"
        )));
    }
    Ok(10u64.pow(decimals as u32))
}

/// Segment prepared for repeated permutation scoring.
#[derive(Clone, Debug)]
pub struct PreparedSegment {
    units: Vec<(f64, f64)>,
}

impl PreparedSegment {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(PcidError::domain("a segment needs at least two points"));
        }
        Ok(Self {
            units: unit_vectors(values),
        })
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Observed statistic: `(split, max contrast)` where `split` is the number
    /// of points left of the maximising cut.
    pub fn observed(&self) -> (usize, f64) {
        scan_max(&self.units)
    }

    /// Maximum contrast of permutation `index` (0-based) under `cfg`, writing
    /// the shuffled segment into `scratch`.
    pub fn permuted_statistic(&self, cfg: &PermTestConfig, index: u64, scratch: &mut Vec<(f64, f64)>) -> f64 {
        scratch.clear();
        scratch.extend_from_slice(&self.units);
        let mut rng = substream(cfg.seed, cfg.stream, index);
        for i in (1..scratch.len()).rev() {
            let j = rng.random_range(0..=i);
            scratch.swap(i, j);
        }
        scan_max(scratch).1
    }
}

/// Early-stopping permutation test of `segment` against the observed
/// statistic `c_obs`.
pub fn permutation_test(segment: &[f64], cfg: &PermTestConfig, c_obs: f64) -> Result<PermTestOutcome> {
    let prepared = PreparedSegment::new(segment)?;
    Ok(permutation_test_prepared(&prepared, cfg, c_obs))
}

pub fn permutation_test_prepared(segment: &PreparedSegment, cfg: &PermTestConfig, c_obs: f64) -> PermTestOutcome {
    if permutation_count_guard(segment.len(), cfg.permutations) {
        return PermTestOutcome::SKIPPED;
    }
    let mut scratch = Vec::with_capacity(segment.len());
    let mut exceedances = 0;
    let mut run = 0;
    while run < cfg.permutations && exceedances < cfg.cutoff {
        if segment.permuted_statistic(cfg, run, &mut scratch) >= c_obs {
            exceedances += 1;
        }
        run += 1;
    }
    PermTestOutcome {
        detected: exceedances < cfg.cutoff,
        permutations_run: run,
        exceedances,
    }
}

/// Runs all `B` permutations without early stopping and returns the total
/// exceedance count (or `None` when the factorial guard fires).
pub fn full_exceedance_count(segment: &PreparedSegment, cfg: &PermTestConfig, c_obs: f64) -> Option<u64> {
    if permutation_count_guard(segment.len(), cfg.permutations) {
        return None;
    }
    let mut scratch = Vec::with_capacity(segment.len());
    Some(
        (0..cfg.permutations)
            .filter(|&i| segment.permuted_statistic(cfg, i, &mut scratch) >= c_obs)
            .count() as u64,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn binom(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn guard_examples() {
        assert!(permutation_count_guard(5, 1000));
        assert!(!permutation_count_guard(7, 1000));
        assert!(!permutation_count_guard(25, 10_000_000_000));
        assert!(!permutation_count_guard(21, 1 << 63));
        assert!(permutation_count_guard(1, 2));
        assert!(!permutation_count_guard(1, 1));
        assert!(!permutation_count_guard(6, 720));
        assert!(permutation_count_guard(6, 721));
    }

    #[test]
    fn b_from_alpha_examples() {
        assert_eq!(b_from_alpha(0.003).unwrap(), 1000);
        assert_eq!(b_from_alpha(0.0001).unwrap(), 10_000);
        assert_eq!(b_from_alpha(0.05).unwrap(), 100);
        assert_eq!(b_from_alpha(0.5).unwrap(), 10);
        assert!(b_from_alpha(0.0).is_err());
        assert!(b_from_alpha(1.0).is_err());
        assert!(b_from_alpha(f64::NAN).is_err());
        for alpha in [0.01, 0.002, 0.0005, 0.0003] {
            let b = b_from_alpha(alpha).unwrap();
            assert!(PermTestConfig::new(b, alpha, 0).is_ok());
        }
    }

    #[test]
    fn config_requires_integral_cutoff() {
        assert_eq!(PermTestConfig::new(1000, 0.003, 0).unwrap().cutoff(), 3);
        assert!(PermTestConfig::new(1000, 0.0005, 0).is_err());
        assert!(PermTestConfig::new(100, 0.001, 0).is_err());
        assert!(PermTestConfig::new(0, 0.5, 0).is_err());
        assert!(PermTestConfig::new(10, 1.5, 0).is_err());
    }

    #[test]
    fn constant_segment_never_detects() {
        let cfg = PermTestConfig::new(1000, 0.001, 5).unwrap().for_interval(1, 20);
        let seg = PreparedSegment::new(&[2.5; 20]).unwrap();
        let (_, c_obs) = seg.observed();
        let out = permutation_test_prepared(&seg, &cfg, c_obs);
        assert!(!out.detected);
        assert_eq!(out.exceedances, cfg.cutoff());
        assert_eq!(out.permutations_run, cfg.cutoff());
    }

    #[test]
    fn short_segment_skips() {
        let cfg = PermTestConfig::new(1000, 0.001, 5).unwrap();
        let out = permutation_test(&[0.0, 1.0, 2.0, 3.0, 4.0], &cfg, 0.0).unwrap();
        assert_eq!(
            out,
            PermTestOutcome {
                detected: false,
                permutations_run: 0,
                exceedances: 0
            }
        );
        assert!(permutation_test(&[1.0], &cfg, 0.0).is_err());
    }

    #[test]
    fn clean_step_detected_across_seeds() {
        // only the identity-type arrangements tie the maximal statistic:
        // P(tie) = 2 / C(20, 10), so 1000 permutations exceed with prob < 2e-2
        let tie = 2.0 / binom(20, 10);
        assert!(1000.0 * tie < 0.02);
        let mut values = vec![0.0; 10];
        values.extend(vec![PI; 10]);
        let seg = PreparedSegment::new(&values).unwrap();
        let (split, c_obs) = seg.observed();
        assert_eq!(split, 10);
        let mut detected = 0;
        for seed in 0..100 {
            let cfg = PermTestConfig::new(1000, 0.001, seed).unwrap().for_interval(1, 20);
            if permutation_test_prepared(&seg, &cfg, c_obs).detected {
                detected += 1;
            }
        }
        assert!(detected >= 98, "detected {detected}/100");
    }

    #[test]
    fn deterministic_and_order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let values: Vec<f64> = (0..30).map(|_| rng.random_range(0.0..TAU)).collect();
        let seg = PreparedSegment::new(&values).unwrap();
        let (_, c_obs) = seg.observed();
        let cfg = PermTestConfig::new(1000, 0.01, 42).unwrap().for_interval(3, 32);
        let a = permutation_test_prepared(&seg, &cfg, c_obs);
        let b = permutation_test_prepared(&seg, &cfg, c_obs);
        assert_eq!(a, b);
        // evaluating permutations in reverse gives the same per-index statistics
        let mut scratch = Vec::new();
        let forward: Vec<f64> = (0..50).map(|i| seg.permuted_statistic(&cfg, i, &mut scratch)).collect();
        let mut backward: Vec<f64> = (0..50)
            .rev()
            .map(|i| seg.permuted_statistic(&cfg, i, &mut scratch))
            .collect();
        backward.reverse();
        assert_eq!(forward, backward);
    }

    #[test]
    fn early_stop_matches_full_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for case in 0..100u64 {
            let n = rng.random_range(8..40);
            let shift = if case % 2 == 0 { 0.0 } else { rng.random_range(0.0..2.0) };
            let cut = rng.random_range(1..n);
            let values: Vec<f64> = (0..n)
                .map(|i| rng.random_range(-1.2..1.2) + if i >= cut { shift } else { 0.0 })
                .collect();
            let seg = PreparedSegment::new(&values).unwrap();
            let (_, c_obs) = seg.observed();
            let cfg = PermTestConfig::new(200, 0.05, case).unwrap().for_interval(1, n);
            let early = permutation_test_prepared(&seg, &cfg, c_obs);
            let full = full_exceedance_count(&seg, &cfg, c_obs).unwrap();
            assert_eq!(early.detected, full < cfg.cutoff(), "case {case}");
            if early.detected {
                assert!(early.exceedances < cfg.cutoff());
                assert_eq!(early.permutations_run, cfg.permutations());
            }
        }
    }
}
