// SPDX-License-Identifier: MIT OR Apache-2.0

//! Offline multiple change-point detection in the mean direction of angular
//! time series.
//!
//! The detector scans deterministic left- and right-expanding intervals so
//! that every change-point is isolated in at least one of them, scores each
//! interval with a circular CUSUM-type contrast, and accepts a split only when
//! a seeded permutation test rejects the no-change hypothesis.
//!
//! Module map:
//!
//! - [`circular`] and [`bessel`]: angle arithmetic, circular summaries, modified
//!   Bessel functions and concentration matching.
//! - [`contrast`]: prefix sums and the contrast statistic.
//! - [`permutation`]: the early-stopping permutation test.
//! - [`engine`]: interval schedules, the recursive detector, the windowed
//!   variant and significance selection.
//! - [`calibration`]: Monte Carlo Type-I error estimation and the default
//!   calibration grid.
//! - [`synth`]: built-in signals and noise samplers.
//! - [`dependent`]: subsampling with majority voting for serially correlated
//!   noise.
//! - [`metrics`]: segmentation quality measures.
//! - [`bench`], [`io`] and [`cli`]: experiment harness, file formats and the
//!   command line front end.

#![forbid(unsafe_code)]

pub mod bench;
pub mod bessel;
pub mod calibration;
pub mod circular;
pub mod cli;
pub mod contrast;
pub mod dependent;
pub mod engine;
pub mod error;
pub mod io;
pub mod metrics;
pub mod permutation;
pub mod rng;
pub mod synth;

pub use circular::{Angle, AngularSeries};
pub use engine::{
    build_schedule, choose_alpha, pcid_detect, pcid_windowed, sidak_gamma, DetectionResult, Expansion, Interval,
    IntervalCache, PcidConfig, Significance,
};
pub use error::{PcidError, Result};
