// SPDX-License-Identifier: MIT OR Apache-2.0

//! Angle arithmetic and circular summary statistics.
//!
//! All angles are canonicalised to `[0, 2π)`. Series indices in the public
//! API are 1-based and inclusive, `1 <= s <= e <= T`.

use crate::error::{PcidError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

/// An angle in radians, always in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Wraps `x` onto the circle.
    pub fn new(x: f64) -> Result<Self> {
        wrap_angle(x)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Representative in `[-π, π)`, for display.
    pub fn signed(self) -> f64 {
        if self.0 >= PI {
            self.0 - TAU
        } else {
            self.0
        }
    }

    /// Rotates by `c` radians.
    pub fn rotate(self, c: f64) -> Result<Self> {
        wrap_angle(self.0 + c)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

/// Reduces `x` modulo 2π into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> Result<Angle> {
    if !x.is_finite() {
        return Err(PcidError::domain(format!("cannot wrap non-finite angle {x}")));
    }
    Ok(Angle(wrap_unchecked(x)))
}

#[inline]
pub(crate) fn wrap_unchecked(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed representative of `x` in `[-π, π)`.
#[inline]
pub(crate) fn signed_unchecked(x: f64) -> f64 {
    let r = wrap_unchecked(x);
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// Four-case arctangent of `x / y` (note the argument order: `x` is the sine
/// component, `y` the cosine component), wrapped into `[0, 2π)`.
///
/// `atan2c(0, 0)` is defined as 0.
pub fn atan2c(x: f64, y: f64) -> Angle {
    let raw = if y > 0.0 {
        (x / y).atan()
    } else if y < 0.0 {
        (x / y).atan() + PI
    } else if x != 0.0 {
        FRAC_PI_2 * x.signum()
    } else {
        0.0
    };
    Angle(wrap_unchecked(raw))
}

/// Observed angular sequence `Θ_1, …, Θ_T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AngularSeries {
    values: Vec<f64>,
}

impl AngularSeries {
    /// Builds a series from raw radians, wrapping every value into `[0, 2π)`.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let mut values = values;
        for (i, v) in values.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(PcidError::domain(format!("observation {} is not finite ({v})", i + 1)));
            }
            *v = wrap_unchecked(*v);
        }
        Ok(Self { values })
    }

    pub fn from_angles(angles: &[Angle]) -> Self {
        Self {
            values: angles.iter().map(|a| a.0).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Observation `Θ_t` (1-based).
    pub fn get(&self, t: usize) -> Option<Angle> {
        t.checked_sub(1).and_then(|i| self.values.get(i)).map(|&v| Angle(v))
    }

    /// `Θ_s, …, Θ_e` as a slice, after bounds checking.
    pub fn segment(&self, s: usize, e: usize) -> Result<&[f64]> {
        check_range(s, e, self.len())?;
        Ok(&self.values[s - 1..e])
    }

    /// Rotates every observation by `c`.
    pub fn rotated(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v + c).collect())
    }
}

impl TryFrom<Vec<f64>> for AngularSeries {
    type Error = PcidError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<AngularSeries> for Vec<f64> {
    fn from(series: AngularSeries) -> Vec<f64> {
        series.values
    }
}

pub(crate) fn check_range(s: usize, e: usize, len: usize) -> Result<()> {
    if s < 1 || s > e || e > len {
        return Err(PcidError::index(format!(
            "interval [{s}, {e}] is not within [1, {len}]"
        )));
    }
    Ok(())
}

/// Sum of `(cos Θ_i, sin Θ_i)` over a slice.
pub(crate) fn resultant(values: &[f64]) -> (f64, f64) {
    values.iter().fold((0.0, 0.0), |(c, s), &v| {
        let (sin, cos) = v.sin_cos();
        (c + cos, s + sin)
    })
}

/// Mean resultant lengths at or below this are treated as an exact zero
/// resultant, whose mean direction is 0.
pub const DEGENERATE_RESULTANT: f64 = 1e-12;

fn mean_direction(c: f64, s: f64, n: usize) -> Angle {
    let bound = DEGENERATE_RESULTANT * n as f64;
    if c * c + s * s <= bound * bound {
        return Angle::ZERO;
    }
    atan2c(s, c)
}

/// Circular sample mean `atan2c(Σ sin Θ_i, Σ cos Θ_i)` over `[s, e]`.
///
/// A resultant that cancels to within [`DEGENERATE_RESULTANT`] (for example
/// two antipodal angles, where `sin π` leaves a 1e-16 residue) yields 0.
pub fn circular_mean(series: &AngularSeries, s: usize, e: usize) -> Result<Angle> {
    Ok(slice_mean(series.segment(s, e)?))
}

/// Mean resultant length `R̄_{s,e}` in `[0, 1]`.
pub fn mean_resultant_length(series: &AngularSeries, s: usize, e: usize) -> Result<f64> {
    let seg = series.segment(s, e)?;
    let (c, sn) = resultant(seg);
    Ok(((c * c + sn * sn).sqrt() / seg.len() as f64).min(1.0))
}

/// Circular mean of an arbitrary slice of angles.
pub fn slice_mean(values: &[f64]) -> Angle {
    let (c, s) = resultant(values);
    mean_direction(c, s, values.len())
}

/// Mean resultant length of an arbitrary non-empty slice.
pub fn slice_resultant_length(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let (c, s) = resultant(values);
    ((c * c + s * s).sqrt() / values.len() as f64).min(1.0)
}

/// Shortest arc length between two angles, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    signed_unchecked(a - b).abs().min(PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn series(v: &[f64]) -> AngularSeries {
        AngularSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn wrap_examples() {
        assert!((wrap_angle(TAU + 0.5).unwrap().value() - 0.5).abs() < 1e-12);
        assert!((wrap_angle(-0.1).unwrap().value() - (TAU - 0.1)).abs() < 1e-12);
        assert_eq!(wrap_angle(0.0).unwrap().value(), 0.0);
        assert_eq!(wrap_angle(-1e-300).unwrap().value(), 0.0);
        assert!(wrap_angle(f64::NAN).is_err());
        assert!(wrap_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn wrap_is_periodic() {
        for &x in &[0.3, 2.0, 5.9, -4.4, 100.25] {
            let base = wrap_angle(x).unwrap().value();
            for k in -3..=3 {
                let w = wrap_angle(x + TAU * k as f64).unwrap().value();
                assert!(circular_distance(w, base) < 1e-12, "x={x} k={k}");
                assert!((0.0..TAU).contains(&w));
            }
        }
    }

    #[test]
    fn atan2c_cases() {
        assert_eq!(atan2c(0.0, 0.0).value(), 0.0);
        assert!((atan2c(1.0, 0.0).value() - FRAC_PI_2).abs() < 1e-15);
        assert!((atan2c(-1.0, 0.0).value() - 3.0 * FRAC_PI_2).abs() < 1e-15);
        assert!((atan2c(0.0, -1.0).value() - PI).abs() < 1e-15);
        assert!((atan2c(1.0, 1.0).value() - FRAC_PI_4).abs() < 1e-15);
        assert!((atan2c(-1.0, 1.0).value() - (TAU - FRAC_PI_4)).abs() < 1e-15);
        // agrees with the library atan2 away from the special cases
        for &(x, y) in &[(0.3, -2.0), (-0.7, -0.1), (2.5, 0.4), (-3.0, 1.0)] {
            let expected = wrap_unchecked(f64::atan2(x, y));
            assert!((atan2c(x, y).value() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn mean_examples() {
        assert_eq!(circular_mean(&series(&[0.0, 0.0, 0.0]), 1, 3).unwrap().value(), 0.0);
        assert!((circular_mean(&series(&[0.0, FRAC_PI_2]), 1, 2).unwrap().value() - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(circular_mean(&series(&[0.0, PI]), 1, 2).unwrap().value(), 0.0);
        assert!(circular_mean(&series(&[0.0]), 1, 2).is_err());
        assert!(circular_mean(&series(&[0.0]), 0, 1).is_err());
    }

    #[test]
    fn exact_zero_resultant_gives_zero_mean() {
        assert_eq!(slice_mean(&[]).value(), 0.0);
        assert_eq!(atan2c(0.0, 0.0), Angle::ZERO);
    }

    #[test]
    fn resultant_length_examples() {
        assert!((mean_resultant_length(&series(&[1.3; 7]), 1, 7).unwrap() - 1.0).abs() < 1e-12);
        assert!(mean_resultant_length(&series(&[0.0, PI]), 1, 2).unwrap() < 1e-12);
        let r = mean_resultant_length(&series(&[0.0, FRAC_PI_2]), 1, 2).unwrap();
        assert!((r - 2f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn series_wraps_on_ingest() {
        let s = series(&[-0.1, 7.0, TAU]);
        assert!((s.values()[0] - (TAU - 0.1)).abs() < 1e-12);
        assert!((s.values()[1] - (7.0 - TAU)).abs() < 1e-12);
        assert_eq!(s.values()[2], 0.0);
        assert!(AngularSeries::new(vec![1.0, f64::NAN]).is_err());
        assert_eq!(s.get(0), None);
        assert!(s.get(3).is_some());
    }

    #[test]
    fn signed_representative() {
        assert!((Angle::new(3.0 * FRAC_PI_2).unwrap().signed() + FRAC_PI_2).abs() < 1e-12);
        assert_eq!(Angle::new(PI).unwrap().signed(), -PI);
        assert_eq!(Angle::new(1.0).unwrap().signed(), 1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn angles() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(0.0..TAU, 1..40)
        }

        proptest! {
            #[test]
            fn mean_is_rotation_equivariant(v in angles(), c in -10.0..10.0f64) {
                let s = series(&v);
                let r = mean_resultant_length(&s, 1, v.len()).unwrap();
                prop_assume!(r * v.len() as f64 > 1e-6);
                let m = circular_mean(&s, 1, v.len()).unwrap();
                let rotated = circular_mean(&s.rotated(c).unwrap(), 1, v.len()).unwrap();
                let expected = m.rotate(c).unwrap();
                prop_assert!(circular_distance(rotated.value(), expected.value()) < 1e-8);
            }

            #[test]
            fn resultant_length_rotation_reflection_invariant(v in angles(), c in -10.0..10.0f64) {
                let s = series(&v);
                let n = v.len();
                let base = mean_resultant_length(&s, 1, n).unwrap();
                let rot = mean_resultant_length(&s.rotated(c).unwrap(), 1, n).unwrap();
                let refl = series(&v.iter().map(|x| -x).collect::<Vec<_>>());
                let refl = mean_resultant_length(&refl, 1, n).unwrap();
                prop_assert!((base - rot).abs() < 1e-10);
                prop_assert!((base - refl).abs() < 1e-10);
                prop_assert!((0.0..=1.0).contains(&base));
            }
        }
    }
}
