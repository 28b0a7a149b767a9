// SPDX-License-Identifier: MIT OR Apache-2.0

//! Built-in piecewise-constant signals and circular noise samplers.

use crate::circular::{signed_unchecked, wrap_unchecked, Angle, AngularSeries};
use crate::error::{PcidError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

/// Steps discarded before an AR(1) noise path is emitted.
pub const AR_BURN_IN: usize = 500;

/// Piecewise-constant mean direction `f_t = μ_j` for `r_{j−1} < t ≤ r_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    length: usize,
    changepoints: Vec<usize>,
    levels: Vec<f64>,
}

impl SignalSpec {
    pub fn new(length: usize, changepoints: Vec<usize>, levels: Vec<f64>) -> Result<Self> {
        if length < 1 {
            return Err(PcidError::domain("signal length must be >= 1"));
        }
        if levels.len() != changepoints.len() + 1 {
            return Err(PcidError::domain(format!(
                "{} change-points need {} levels, got {}",
                changepoints.len(),
                changepoints.len() + 1,
                levels.len()
            )));
        }
        let mut prev = 0;
        for &r in &changepoints {
            if r <= prev || r >= length {
                return Err(PcidError::domain(format!(
                    "change-points must satisfy 0 < r_1 < ... < r_N < T={length}"
                )));
            }
            prev = r;
        }
        if levels.iter().any(|l| !l.is_finite()) {
            return Err(PcidError::domain("levels must be finite"));
        }
        if levels.windows(2).any(|w| wrap_unchecked(w[0]) == wrap_unchecked(w[1])) {
            return Err(PcidError::domain("adjacent levels must differ"));
        }
        Ok(Self {
            length,
            changepoints,
            levels,
        })
    }

    /// Signal without change-points.
    pub fn constant(length: usize, level: f64) -> Result<Self> {
        Self::new(length, Vec::new(), vec![level])
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn changepoints(&self) -> &[usize] {
        &self.changepoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `f_1, …, f_T`.
    pub fn mean_function(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.length);
        let mut start = 0;
        for (j, &level) in self.levels.iter().enumerate() {
            let end = self.changepoints.get(j).copied().unwrap_or(self.length);
            out.extend(std::iter::repeat_n(level, end - start));
            start = end;
        }
        out
    }

    /// Every level shifted by `c`.
    pub fn rotated(&self, c: f64) -> Result<Self> {
        Self::new(
            self.length,
            self.changepoints.clone(),
            self.levels.iter().map(|l| l + c).collect(),
        )
    }
}

/// Identifiers of the built-in benchmark signals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SignalId {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    S8,
    S9,
    S10,
    S11,
}

impl SignalId {
    pub const ALL: [SignalId; 11] = [
        SignalId::S1,
        SignalId::S2,
        SignalId::S3,
        SignalId::S4,
        SignalId::S5,
        SignalId::S6,
        SignalId::S7,
        SignalId::S8,
        SignalId::S9,
        SignalId::S10,
        SignalId::S11,
    ];
}

impl fmt::Display for SignalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for SignalId {
    type Err = PcidError;

    fn from_str(s: &str) -> Result<Self> {
        SignalId::ALL
            .into_iter()
            .find(|id| id.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| PcidError::config(format!("unknown signal '{s}' (expected S1..S11)")))
    }
}

fn alternating(length: usize, step: usize, count: usize, high: f64) -> SignalSpec {
    let cps: Vec<usize> = (1..=count).map(|k| k * step).collect();
    let levels = (0..=count).map(|k| if k % 2 == 0 { 0.0 } else { high }).collect();
    SignalSpec::new(length, cps, levels).expect("built-in signal is valid")
}

/// The built-in signal `id`.
pub fn builtin_signal(id: SignalId) -> SignalSpec {
    let spec = |t, cps: &[usize], levels: &[f64]| {
        SignalSpec::new(t, cps.to_vec(), levels.to_vec()).expect("built-in signal is valid")
    };
    match id {
        SignalId::S1 => spec(1000, &[], &[0.0]),
        SignalId::S2 => alternating(1000, 200, 4, 3.0),
        SignalId::S3 => spec(200, &[], &[0.0]),
        SignalId::S4 => spec(100, &[50], &[0.0, PI]),
        SignalId::S5 => spec(200, &[50, 100], &[0.0, PI, 1.0]),
        SignalId::S6 => spec(210, &[30, 60, 90, 120, 150, 180], &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
        SignalId::S7 => spec(150, &[60, 100, 130], &[1.5, 3.3, 5.2, 1.5]),
        SignalId::S8 => spec(600, &[150, 300, 500], &[1.0, 4.0, 2.0, 5.0]),
        SignalId::S9 => spec(500, &[], &[0.0]),
        SignalId::S10 => alternating(500, 50, 9, 1.5),
        SignalId::S11 => alternating(100, 10, 9, 2.0),
    }
}

/// Noise distribution `ε_t`, centred at 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// `vM(0, κ)`.
    VonMises { kappa: f64 },
    /// `wC(0, ρ)`.
    WrappedCauchy { rho: f64 },
    /// `wN(0, β)` with `β = e^{−σ²/2}`.
    WrappedNormal { beta: f64 },
    /// `ε_t = φ ε_{t−1} + ε'_t` with `ε'_t ~ vM(0, κ')`.
    Ar1Circular { phi: f64, innovation_kappa: f64 },
    /// `ε_t = 0`.
    Noiseless,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseSpec::VonMises { kappa } => kappa >= 0.0 && kappa.is_finite(),
            NoiseSpec::WrappedCauchy { rho } => rho > 0.0 && rho < 1.0,
            NoiseSpec::WrappedNormal { beta } => (0.0..=1.0).contains(&beta),
            NoiseSpec::Ar1Circular { phi, innovation_kappa } => {
                phi.abs() < 1.0 && innovation_kappa >= 0.0 && innovation_kappa.is_finite()
            }
            NoiseSpec::Noiseless => true,
        };
        if ok {
            Ok(())
        } else {
            Err(PcidError::domain(format!("invalid noise parameters {self:?}")))
        }
    }

    /// Short family name used in tables.
    pub fn family(&self) -> &'static str {
        match self {
            NoiseSpec::VonMises { .. } => "vM",
            NoiseSpec::WrappedCauchy { .. } => "wC",
            NoiseSpec::WrappedNormal { .. } => "wN",
            NoiseSpec::Ar1Circular { .. } => "AR1",
            NoiseSpec::Noiseless => "none",
        }
    }

    /// `κ`, `ρ`, `β` or `φ`, whichever parametrises the family.
    pub fn parameter(&self) -> Option<f64> {
        match *self {
            NoiseSpec::VonMises { kappa } => Some(kappa),
            NoiseSpec::WrappedCauchy { rho } => Some(rho),
            NoiseSpec::WrappedNormal { beta } => Some(beta),
            NoiseSpec::Ar1Circular { phi, .. } => Some(phi),
            NoiseSpec::Noiseless => None,
        }
    }

    /// `n` draws in `[0, 2π)` from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<f64>> {
        self.validate()?;
        let mut out = Vec::with_capacity(n);
        match *self {
            NoiseSpec::VonMises { kappa } => {
                let vm = VonMises::new(kappa);
                out.extend((0..n).map(|_| vm.draw(rng)));
            }
            NoiseSpec::WrappedCauchy { rho } => {
                let cauchy =
                    Cauchy::new(0.0, -rho.ln()).map_err(|e| PcidError::domain(format!("wrapped Cauchy: {e}")))?;
                out.extend((0..n).map(|_| wrap_unchecked(cauchy.sample(rng))));
            }
            NoiseSpec::WrappedNormal { beta } => {
                if beta == 0.0 {
                    out.extend((0..n).map(|_| rng.random::<f64>() * TAU));
                } else {
                    let sigma = (-2.0 * beta.ln()).sqrt();
                    let normal =
                        Normal::new(0.0, sigma).map_err(|e| PcidError::domain(format!("wrapped Normal: {e}")))?;
                    out.extend((0..n).map(|_| wrap_unchecked(normal.sample(rng))));
                }
            }
            NoiseSpec::Ar1Circular { phi, innovation_kappa } => {
                let vm = VonMises::new(innovation_kappa);
                let mut eps = 0.0;
                for step in 0..AR_BURN_IN + n {
                    eps = wrap_unchecked(phi * signed_unchecked(eps) + vm.draw(rng));
                    if step >= AR_BURN_IN {
                        out.push(eps);
                    }
                }
            }
            NoiseSpec::Noiseless => out.resize(n, 0.0),
        }
        Ok(out)
    }
}

/// Best–Fisher rejection sampler for `vM(0, κ)`.
#[derive(Clone, Copy, Debug)]
struct VonMises {
    kappa: f64,
    r: f64,
}

impl VonMises {
    fn new(kappa: f64) -> Self {
        let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
        let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
        Self {
            kappa,
            r: (1.0 + rho * rho) / (2.0 * rho),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.kappa < 1e-8 {
            return rng.random::<f64>() * TAU;
        }
        loop {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let u3: f64 = rng.random();
            let z = (PI * u1).cos();
            let f = (1.0 + self.r * z) / (self.r + z);
            let c = self.kappa * (self.r - f);
            if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
                let theta = f.clamp(-1.0, 1.0).acos();
                return wrap_unchecked(if u3 > 0.5 { theta } else { -theta });
            }
        }
    }
}

/// `n` i.i.d. noise draws for `seed`.
pub fn sample_noise(spec: &NoiseSpec, n: usize, seed: u64) -> Result<Vec<Angle>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    spec.sample(n, &mut rng)?.into_iter().map(Angle::new).collect()
}

/// `Θ_t = f_t + ε_t mod 2π`.
pub fn generate(signal: &SignalSpec, noise: &NoiseSpec, seed: u64) -> Result<AngularSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = noise.sample(signal.length(), &mut rng)?;
    let values = signal
        .mean_function()
        .into_iter()
        .zip(eps)
        .map(|(f, e)| wrap_unchecked(f + e))
        .collect();
    AngularSeries::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_ratio;
    use crate::circular::{circular_distance, circular_mean, slice_resultant_length};

    #[test]
    fn builtin_examples() {
        let s4 = builtin_signal(SignalId::S4);
        assert_eq!((s4.length(), s4.changepoints()), (100, &[50][..]));
        assert_eq!(s4.levels(), &[0.0, PI]);
        let s2 = builtin_signal(SignalId::S2);
        assert_eq!(s2.changepoints(), &[200, 400, 600, 800]);
        assert_eq!(s2.levels(), &[0.0, 3.0, 0.0, 3.0, 0.0]);
        let s11 = builtin_signal(SignalId::S11);
        assert_eq!(s11.changepoints(), &[10, 20, 30, 40, 50, 60, 70, 80, 90]);
        assert_eq!(s11.levels().len(), 10);
        assert_eq!(s11.levels()[9], 2.0);
        for id in SignalId::ALL {
            let s = builtin_signal(id);
            assert_eq!(s.mean_function().len(), s.length());
            assert_eq!(id.to_string().parse::<SignalId>().unwrap(), id);
        }
        assert!("S12".parse::<SignalId>().is_err());
    }

    #[test]
    fn signal_validation() {
        assert!(SignalSpec::new(10, vec![10], vec![0.0, 1.0]).is_err());
        assert!(SignalSpec::new(10, vec![5, 5], vec![0.0, 1.0, 0.0]).is_err());
        assert!(SignalSpec::new(10, vec![5], vec![0.0]).is_err());
        assert!(SignalSpec::new(10, vec![5], vec![1.0, 1.0]).is_err());
        let f = SignalSpec::new(4, vec![2], vec![0.0, 1.0]).unwrap().mean_function();
        assert_eq!(f, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseSpec::VonMises { kappa: -1.0 }.validate().is_err());
        assert!(NoiseSpec::WrappedCauchy { rho: 1.0 }.validate().is_err());
        assert!(NoiseSpec::WrappedNormal { beta: 1.5 }.validate().is_err());
        assert!(NoiseSpec::Ar1Circular {
            phi: 1.0,
            innovation_kappa: 1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn zero_noise_returns_signal() {
        let s = builtin_signal(SignalId::S7);
        let a = generate(&s, &NoiseSpec::Noiseless, 3).unwrap();
        let b = generate(&s, &NoiseSpec::WrappedNormal { beta: 1.0 }, 3).unwrap();
        assert_eq!(a.values(), &s.mean_function()[..]);
        assert_eq!(a, b);
    }

    #[test]
    fn generation_is_reproducible() {
        let s = builtin_signal(SignalId::S3);
        let noise = NoiseSpec::VonMises { kappa: 2.0 };
        assert_eq!(generate(&s, &noise, 11).unwrap(), generate(&s, &noise, 11).unwrap());
        assert_ne!(generate(&s, &noise, 11).unwrap(), generate(&s, &noise, 12).unwrap());
    }

    #[test]
    fn segment_means_track_levels() {
        // sample mean direction of n vM(0, κ) draws has asymptotic variance
        // (1 − A_2) / (2 n A_1²), with A_2 = 1 − 2 A_1 / κ
        let kappa = 8.0;
        let a1 = bessel_ratio(kappa).unwrap();
        let a2 = 1.0 - 2.0 * a1 / kappa;
        let sd = ((1.0 - a2) / (2.0 * 50.0 * a1 * a1)).sqrt();
        assert!(sd > 0.05 && sd < 0.053);
        let s = builtin_signal(SignalId::S4);
        let reps = 400;
        let mut sq = 0.0;
        for seed in 0..reps {
            let series = generate(&s, &NoiseSpec::VonMises { kappa }, seed).unwrap();
            let e1 = circular_distance(circular_mean(&series, 1, 50).unwrap().value(), 0.0);
            let e2 = circular_distance(circular_mean(&series, 51, 100).unwrap().value(), PI);
            assert!(e1 < 5.0 * sd && e2 < 5.0 * sd);
            sq += e1 * e1 + e2 * e2;
        }
        let rms = (sq / (2.0 * reps as f64)).sqrt();
        assert!((rms / sd - 1.0).abs() < 0.1, "rms={rms} sd={sd}");
    }

    #[test]
    fn location_equivariance() {
        let s = builtin_signal(SignalId::S5);
        let noise = NoiseSpec::WrappedCauchy { rho: 0.7 };
        for c in [0.3, -2.0, 5.5] {
            let a = generate(&s, &noise, 9).unwrap();
            let b = generate(&s.rotated(c).unwrap(), &noise, 9).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(circular_distance(x + c, *y) < 1e-12);
            }
        }
    }

    #[test]
    fn von_mises_short_moment() {
        let draws: Vec<f64> = sample_noise(&NoiseSpec::VonMises { kappa: 2.0 }, 20_000, 1)
            .unwrap()
            .into_iter()
            .map(f64::from)
            .collect();
        let r = slice_resultant_length(&draws);
        assert!((r - bessel_ratio(2.0).unwrap()).abs() < 0.02);
    }
}
