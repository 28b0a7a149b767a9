// SPDX-License-Identifier: MIT OR Apache-2.0

//! Modified Bessel functions of the first kind and von Mises concentration
//! matching.
//!
//! [`bessel_i`] returns the standard `I_p(κ) = (1/2π) ∫₀^{2π} cos(pθ) e^{κ cos θ} dθ`,
//! so that `I_0(0) = 1` and the von Mises density `e^{κ cos(θ−μ)} / (2π I_0(κ))`
//! integrates to one. The bare integral without the `1/2π` prefactor is
//! available as [`bessel_integral`]; it differs by the constant factor 2π,
//! which cancels in every ratio `I_1/I_0` used by the rest of the crate.

use crate::error::{PcidError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Above this argument the asymptotic expansion replaces the power series.
const SERIES_LIMIT: f64 = 25.0;

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa < 0.0 || !kappa.is_finite() {
        return Err(PcidError::domain(format!(
            "concentration must be finite and >= 0, got {kappa}"
        )));
    }
    Ok(())
}

/// Power series `Σ_k (x/2)^{2k+p} / (k! (k+p)!)`. All terms are positive, so
/// summation is stable for moderate `x`.
fn series(p: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for j in 1..=p {
        term *= half / j as f64;
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + p as f64));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// `e^{-x} I_p(x) ≈ (2πx)^{-1/2} Σ_k (-1)^k a_k(p) / x^k`, truncated at the
/// smallest term.
fn asymptotic_scaled(p: u32, x: f64) -> f64 {
    let mu = 4.0 * (p as f64) * (p as f64);
    let mut term: f64 = 1.0;
    let mut sum: f64 = 1.0;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (k * 8.0 * x);
        if next.abs() >= term.abs() || next.abs() <= sum.abs() * 1e-17 {
            sum += next;
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
        if k > 200.0 {
            break;
        }
    }
    sum / (TAU * x).sqrt()
}

/// Standard modified Bessel function `I_p(κ)`.
///
/// Overflows to `+∞` for κ beyond roughly 709; use [`bessel_i_scaled`] there.
pub fn bessel_i(p: u32, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if kappa <= SERIES_LIMIT {
        Ok(series(p, kappa))
    } else {
        Ok(asymptotic_scaled(p, kappa) * kappa.exp())
    }
}

/// Exponentially scaled `e^{-κ} I_p(κ)`, finite for all κ ≥ 0.
pub fn bessel_i_scaled(p: u32, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if kappa <= SERIES_LIMIT {
        Ok(series(p, kappa) * (-kappa).exp())
    } else {
        Ok(asymptotic_scaled(p, kappa))
    }
}

/// `∫₀^{2π} cos(pθ) e^{κ cos θ} dθ = 2π I_p(κ)`.
pub fn bessel_integral(p: u32, kappa: f64) -> Result<f64> {
    Ok(TAU * bessel_i(p, kappa)?)
}

/// `A_1(κ) = I_1(κ) / I_0(κ)`, the population mean resultant length of
/// `vM(μ, κ)`.
pub fn bessel_ratio(kappa: f64) -> Result<f64> {
    if kappa == 0.0 {
        return Ok(0.0);
    }
    Ok(bessel_i_scaled(1, kappa)? / bessel_i_scaled(0, kappa)?)
}

/// Von Mises density `f(θ; μ, κ)`.
pub fn von_mises_density(theta: f64, mu: f64, kappa: f64) -> Result<f64> {
    let scaled = bessel_i_scaled(0, kappa)?;
    Ok((kappa * ((theta - mu).cos() - 1.0)).exp() / (TAU * scaled))
}

/// Wrapped Cauchy and wrapped Normal concentrations whose circular variance
/// matches `vM(0, κ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationMatch {
    pub kappa: f64,
    pub rho: f64,
    pub beta: f64,
    pub variance: f64,
}

/// Matches `ρ = β = I_1(κ)/I_0(κ)` and `V = 1 − ρ`.
pub fn match_concentration(kappa: f64) -> Result<ConcentrationMatch> {
    let ratio = bessel_ratio(kappa)?;
    Ok(ConcentrationMatch {
        kappa,
        rho: ratio,
        beta: ratio,
        variance: 1.0 - ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Simpson quadrature, independent of the series code paths.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                return left + right + delta / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    fn quadrature_integral(p: u32, kappa: f64) -> f64 {
        let f = move |t: f64| (p as f64 * t).cos() * (kappa * t.cos()).exp();
        // scale tolerance to the integrand magnitude
        let tol = 1e-14 * (kappa.exp() + 1.0);
        adaptive_simpson(&f, 0.0, TAU, tol)
    }

    #[test]
    fn normalisation_at_zero() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert!((bessel_integral(0, 0.0).unwrap() - TAU).abs() < 1e-15);
        assert_eq!(bessel_ratio(0.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_kappa_rejected() {
        assert!(bessel_i(0, -1.0).is_err());
        assert!(bessel_i_scaled(1, f64::NAN).is_err());
        assert!(match_concentration(-0.5).is_err());
    }

    #[test]
    fn matches_quadrature() {
        for &kappa in &[0.1, 1.0, 2.0, 4.0, 8.0, 20.0] {
            for p in 0..=1 {
                let quad = quadrature_integral(p, kappa);
                let ours = bessel_integral(p, kappa).unwrap();
                let rel = ((ours - quad) / quad).abs();
                assert!(rel < 1e-10, "p={p} kappa={kappa} ours={ours} quad={quad} rel={rel}");
            }
        }
    }

    #[test]
    fn ratio_at_two_matches_quadrature() {
        let quad = quadrature_integral(1, 2.0) / quadrature_integral(0, 2.0);
        let ours = bessel_ratio(2.0).unwrap();
        assert!((ours - quad).abs() < 1e-12);
        assert!((ours - 0.6978).abs() < 5e-5);
    }

    #[test]
    fn asymptotic_branch_is_continuous() {
        for p in 0..=1 {
            let below = series(p, SERIES_LIMIT) * (-SERIES_LIMIT).exp();
            let above = asymptotic_scaled(p, SERIES_LIMIT);
            assert!(((below - above) / below).abs() < 1e-12, "p={p}");
            let quad = quadrature_integral(p, 40.0) / TAU;
            let ours = bessel_i(p, 40.0).unwrap();
            assert!(((ours - quad) / quad).abs() < 1e-10);
        }
        let big = bessel_ratio(1e6).unwrap();
        assert!(big < 1.0 && big > 0.9999994);
    }

    #[test]
    fn density_integrates_to_one() {
        for &kappa in &[0.0, 0.5, 2.0, 8.0, 30.0] {
            let f = move |t: f64| von_mises_density(t, 1.0, kappa).unwrap();
            let total = adaptive_simpson(&f, 0.0, TAU, 1e-12);
            assert!((total - 1.0).abs() < 1e-9, "kappa={kappa} total={total}");
        }
    }

    #[test]
    fn concentration_pairs() {
        let expected = [(8.0, 0.94), (4.0, 0.86), (2.0, 0.70), (1.0, 0.45)];
        for (kappa, rho) in expected {
            let m = match_concentration(kappa).unwrap();
            assert!(
                ((m.rho * 100.0).round() / 100.0 - rho).abs() < 1e-9,
                "kappa={kappa} rho={}",
                m.rho
            );
            assert_eq!(m.rho, m.beta);
            assert!((m.variance - (1.0 - m.rho)).abs() < 1e-15);
        }
        let uniform = match_concentration(0.0).unwrap();
        assert_eq!((uniform.rho, uniform.beta, uniform.variance), (0.0, 0.0, 1.0));
    }

    #[test]
    fn innovation_kappa_variance() {
        // κ = 1.7 matches the wrapped N(0, 1) variance 1 − e^{−1/2} to one decimal
        let v = match_concentration(1.7).unwrap().variance;
        let wrapped_normal = 1.0 - (-0.5f64).exp();
        assert_eq!((v * 10.0).round() / 10.0, 0.4, "v={v}");
        assert_eq!((wrapped_normal * 10.0).round() / 10.0, 0.4);
        assert!((v - 0.3582).abs() < 1e-4, "v={v}");
    }
}
