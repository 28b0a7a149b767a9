// SPDX-License-Identifier: MIT OR Apache-2.0

//! Detection under serially correlated noise by subsampling every `ν`-th
//! observation and voting across the subsequences.

use crate::circular::AngularSeries;
use crate::engine::{pcid_detect, DetectionResult, Interval, IntervalCache, PcidConfig};
use crate::error::{PcidError, Result};
use crate::rng::derive_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsampleConfig {
    /// Number of interleaved subsequences `ν`.
    pub nu: usize,
    /// Votes `η` needed to accept a location.
    pub eta: usize,
    /// Matching radius `δ` in subsequence positions.
    pub delta: usize,
}

impl SubsampleConfig {
    pub fn new(nu: usize, eta: usize, delta: usize) -> Result<Self> {
        if nu < 1 || eta < 1 || eta > nu {
            return Err(PcidError::config(format!(
                "need 1 <= eta <= nu, got nu={nu}, eta={eta}"
            )));
        }
        Ok(Self { nu, eta, delta })
    }
}

impl Default for SubsampleConfig {
    fn default() -> Self {
        Self {
            nu: 5,
            eta: 3,
            delta: 2,
        }
    }
}

/// `Y_i = (Θ_i, Θ_{i+ν}, …, Θ_{i+M_iν})` for `i = 1..ν`, `M_i = ⌊(T−i)/ν⌋`.
pub fn subsample(series: &AngularSeries, nu: usize) -> Result<Vec<AngularSeries>> {
    if nu < 1 || series.len() < nu {
        return Err(PcidError::config(format!(
            "cannot split a series of length {} into {nu} subsequences",
            series.len()
        )));
    }
    (0..nu)
        .map(|offset| AngularSeries::new(series.values().iter().skip(offset).step_by(nu).copied().collect()))
        .collect()
}

/// Original index of the `j`-th element (1-based) of subsequence `i`.
pub fn original_index(subsequence: usize, position: usize, nu: usize) -> usize {
    (position - 1) * nu + subsequence
}

/// A detection at `position` of subsequence `subsequence`, mapped back to
/// `index` in the original series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Candidate {
    pub position: usize,
    pub index: usize,
    pub subsequence: usize,
}

impl Candidate {
    pub fn new(subsequence: usize, position: usize, nu: usize) -> Self {
        Self {
            position,
            index: original_index(subsequence, position, nu),
            subsequence,
        }
    }
}

/// Majority vote over mapped detections.
///
/// Candidates are swept in increasing subsequence position; a candidate joins
/// the open cluster when its position lies within `δ` of the cluster's latest
/// member. A cluster is accepted when at least `η` distinct subsequences
/// contributed to it, and is reported by the lower median of its members'
/// original indices.
pub fn vote(candidates: &[Candidate], cfg: &SubsampleConfig) -> Vec<usize> {
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    let mut accepted = Vec::new();
    let mut cluster: Vec<Candidate> = Vec::new();
    let mut flush = |cluster: &mut Vec<Candidate>| {
        if cluster.is_empty() {
            return;
        }
        let mut voters: Vec<usize> = cluster.iter().map(|c| c.subsequence).collect();
        voters.sort_unstable();
        voters.dedup();
        if voters.len() >= cfg.eta {
            let mut indices: Vec<usize> = cluster.iter().map(|c| c.index).collect();
            indices.sort_unstable();
            accepted.push(indices[(indices.len() - 1) / 2]);
        }
        cluster.clear();
    };
    for c in sorted {
        if let Some(last) = cluster.last() {
            if c.position - last.position > cfg.delta {
                flush(&mut cluster);
            }
        }
        cluster.push(c);
    }
    flush(&mut cluster);
    accepted
}

/// Seed for subsequence `i` (1-based): the base seed for the first one.
pub fn subsequence_seed(seed: u64, subsequence: usize) -> u64 {
    if subsequence == 1 {
        seed
    } else {
        derive_seed(&[seed, subsequence as u64])
    }
}

/// PCID on each subsequence followed by [`vote`].
///
/// Significance is resolved per subsequence from its own length. The audit
/// log of the result is empty; per-subsequence parameters are listed in
/// `windows`, with intervals in subsequence coordinates.
pub fn detect_correlated(
    series: &AngularSeries,
    cfg: &SubsampleConfig,
    pcid_cfg: &PcidConfig,
) -> Result<DetectionResult> {
    SubsampleConfig::new(cfg.nu, cfg.eta, cfg.delta)?;
    pcid_cfg.validate()?;
    if series.len() < cfg.nu * 2 * pcid_cfg.lambda {
        return Err(PcidError::config(format!(
            "series of length {} is too short for nu={} with lambda={} (needs {})",
            series.len(),
            cfg.nu,
            pcid_cfg.lambda,
            cfg.nu * 2 * pcid_cfg.lambda
        )));
    }
    let subs = subsample(series, cfg.nu)?;
    let runs = subs
        .par_iter()
        .enumerate()
        .map(|(k, sub)| {
            let i = k + 1;
            let local = pcid_cfg.with_seed(subsequence_seed(pcid_cfg.seed, i));
            pcid_detect(sub, 1, sub.len(), &local, &mut IntervalCache::new()).map(|r| (i, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut candidates = Vec::new();
    let mut windows = Vec::new();
    for (i, r) in runs {
        candidates.extend(r.changepoints.iter().map(|&j| Candidate::new(i, j, cfg.nu)));
        windows.extend(r.windows);
    }
    let changepoints = vote(&candidates, cfg)
        .into_iter()
        .filter(|&r| r >= 1 && r < series.len())
        .collect();
    DetectionResult::assemble(
        series,
        Interval::new(1, series.len()),
        changepoints,
        Vec::new(),
        windows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn subsample_layout() {
        let series = AngularSeries::new((1..=10).map(|t| t as f64 * 0.1).collect()).unwrap();
        let subs = subsample(&series, 5).unwrap();
        assert_eq!(subs.len(), 5);
        for (k, sub) in subs.iter().enumerate() {
            let i = k + 1;
            assert_eq!(sub.len(), (10 - i) / 5 + 1);
            for j in 1..=sub.len() {
                let t = original_index(i, j, 5);
                assert_eq!(sub.get(j), series.get(t));
            }
        }
        assert_eq!(subs[0].values(), &[series.values()[0], series.values()[5]]);
        assert_eq!(subsample(&series, 1).unwrap()[0], series);
        assert!(subsample(&series, 11).is_err());
    }

    #[test]
    fn voting_rules() {
        let cfg = SubsampleConfig::new(5, 3, 2).unwrap();
        // mapped indices 49, 50, 52
        let spread = [
            Candidate::new(4, 10, 5),
            Candidate::new(5, 10, 5),
            Candidate::new(2, 11, 5),
        ];
        assert_eq!(spread.map(|c| c.index), [49, 50, 52]);
        assert_eq!(vote(&spread, &cfg), vec![50]);
        let reversed = [spread[2], spread[0], spread[1]];
        assert_eq!(vote(&reversed, &cfg), vec![50]);
        // votes from one subsequence count once
        let repeated = [
            Candidate::new(4, 10, 5),
            Candidate::new(4, 11, 5),
            Candidate::new(2, 11, 5),
        ];
        assert!(vote(&repeated, &cfg).is_empty());
        let unanimous = SubsampleConfig::new(5, 5, 0).unwrap();
        let all: Vec<_> = (1..=5).map(|i| Candidate::new(i, 10, 5)).collect();
        assert_eq!(vote(&all, &unanimous), vec![48]);
        // δ chains through the latest member
        let loose = SubsampleConfig::new(3, 2, 2).unwrap();
        let chain = [
            Candidate::new(1, 10, 3),
            Candidate::new(2, 12, 3),
            Candidate::new(1, 30, 3),
            Candidate::new(3, 31, 3),
        ];
        assert_eq!(vote(&chain, &loose), vec![28, 88]);
        // positions further apart than δ split even when indices are close
        let tight = SubsampleConfig::new(5, 2, 0).unwrap();
        assert!(vote(&[Candidate::new(5, 9, 5), Candidate::new(1, 10, 5)], &tight).is_empty());
    }

    #[test]
    fn config_errors() {
        assert!(SubsampleConfig::new(3, 4, 0).is_err());
        assert!(SubsampleConfig::new(0, 0, 0).is_err());
        let series = AngularSeries::new(vec![0.0; 40]).unwrap();
        let err = detect_correlated(&series, &SubsampleConfig::default(), &PcidConfig::default());
        assert!(matches!(err, Err(PcidError::Config(_))));
    }

    #[test]
    fn single_subsequence_matches_plain() {
        let values: Vec<f64> = (1..=120).map(|t| if t <= 70 { 0.5 } else { 0.5 + PI }).collect();
        let series = AngularSeries::new(values).unwrap();
        let cfg = PcidConfig::default().with_seed(4);
        let plain = pcid_detect(&series, 1, 120, &cfg, &mut IntervalCache::new()).unwrap();
        let wrapped = detect_correlated(&series, &SubsampleConfig::new(1, 1, 0).unwrap(), &cfg).unwrap();
        assert_eq!(plain.changepoints, wrapped.changepoints);
        assert_eq!(plain.segment_means, wrapped.segment_means);
    }

    #[test]
    fn noiseless_step_survives_subsampling() {
        let values: Vec<f64> = (1..=100).map(|t| if t <= 50 { 0.0 } else { PI }).collect();
        let series = AngularSeries::new(values).unwrap();
        let r = detect_correlated(&series, &SubsampleConfig::default(), &PcidConfig::default()).unwrap();
        assert_eq!(r.n_hat, 1);
        assert!(r.changepoints[0].abs_diff(50) <= 2);
    }
}
