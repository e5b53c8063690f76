//! Summation of the odd-harmonic cosine series every solution is expanded in:
//!
//! ```text
//! Σ_{n≥0} c_n cos((2n+1)πx/L)
//! ```
//!
//! All coefficient families in this crate have the form `c_n = (-1)^n d_n` with
//! `d_n` smooth in `n`. Writing the harmonic as `Re[e^{iφ} z^n]` with
//! `z = -e^{2iφ}` turns the tail into `Σ d_n z^n` on the unit circle, which the
//! Euler transformation
//!
//! ```text
//! Σ_{n≥N} d_n z^n = z^N/(1-z) Σ_k (z/(1-z))^k Δ^k d_N
//! ```
//!
//! sums from a handful of forward differences. Algebraically decaying
//! coefficients (the mean exit times) converge in tens of modes instead of
//! thousands, and the super-exponentially decaying survival coefficients are
//! unaffected.

use num_complex::Complex;

use crate::error::{EscapeError, Result};
use crate::scalar::{from_usize, lit, to_f64, Scalar};

/// Number of forward differences kept for the tail transform.
const TAIL_ORDER: usize = 10;

/// Truncation policy for every Fourier sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl<T> {
    pub max_modes: usize,
    pub rel_tol: T,
    pub consecutive_small: usize,
}

impl<T: Scalar> SeriesControl<T> {
    pub fn new(max_modes: usize, rel_tol: T, consecutive_small: usize) -> Result<Self> {
        let ctrl = Self {
            max_modes,
            rel_tol,
            consecutive_small,
        };
        ctrl.validate()?;
        Ok(ctrl)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_modes < 1 {
            return Err(EscapeError::domain("max_modes", self.max_modes as f64, "must be at least 1"));
        }
        if !(self.rel_tol > T::zero() && self.rel_tol < T::one()) {
            return Err(EscapeError::domain("rel_tol", to_f64(self.rel_tol), "must lie in (0, 1)"));
        }
        if self.consecutive_small < 1 {
            return Err(EscapeError::domain(
                "consecutive_small",
                self.consecutive_small as f64,
                "must be at least 1",
            ));
        }
        Ok(())
    }

    /// Tolerance handed to the quadratures that produce individual coefficients.
    pub(crate) fn coefficient_tol(&self) -> T {
        (self.rel_tol / lit(10.0)).max(lit::<T>(32.0) * T::epsilon())
    }
}

impl<T: Scalar> Default for SeriesControl<T> {
    fn default() -> Self {
        Self {
            max_modes: 512,
            rel_tol: lit::<T>(1e-10).max(lit::<T>(64.0) * T::epsilon()),
            consecutive_small: 3,
        }
    }
}

/// Value of a truncated series with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum<T> {
    pub value: T,
    pub modes_used: usize,
    /// Size of the last change in the accelerated estimate.
    pub truncation_estimate: T,
}

/// Sums `Σ c_n cos((2n+1)πx/L)` with Euler tail acceleration.
///
/// `coeff(n)` must return the signed coefficient `c_n`. The boundary `|x| = L/2`
/// returns exactly zero without evaluating any coefficient.
pub fn sum_cosine_series<T, F>(x: T, span: T, ctrl: &SeriesControl<T>, mut coeff: F) -> Result<SeriesSum<T>>
where
    T: Scalar,
    F: FnMut(usize) -> Result<T>,
{
    ctrl.validate()?;
    let half = span / lit(2.0);
    if x.abs() >= half {
        return Ok(SeriesSum {
            value: T::zero(),
            modes_used: 0,
            truncation_estimate: T::zero(),
        });
    }
    let phase = T::PI() * x / span;
    let z = Complex::from_polar(T::one(), T::PI() + phase + phase);
    let one = Complex::new(T::one(), T::zero());
    let ratio = z / (one - z);
    let lead = Complex::from_polar(T::one(), phase) / (one - z);

    let mut smooth: Vec<T> = Vec::with_capacity(64);
    let mut partial = T::zero();
    let mut zn = one;
    let mut previous: Option<T> = None;
    let mut small_run = 0;
    let mut last_change = T::infinity();
    let mut largest = T::zero();

    for n in 0..ctrl.max_modes {
        let c = coeff(n)?;
        if !c.is_finite() {
            return Err(EscapeError::NonConvergence {
                what: "cosine series (non-finite coefficient)",
                iterations: n,
                estimate: to_f64(c),
            });
        }
        largest = largest.max(c.abs());
        smooth.push(if n % 2 == 0 { c } else { -c });
        if n < TAIL_ORDER {
            continue;
        }
        // Tail starts at mode N; differences use d_N ..= d_{N+TAIL_ORDER}.
        let start = n - TAIL_ORDER;
        let d_start = smooth[start];
        let harmonic = (from_usize::<T>(2 * start + 1) * phase).cos();
        let tail = euler_tail(&smooth[start..=n], ratio) * lead * zn;
        let estimate = partial + tail.re;
        partial = partial + (if start % 2 == 0 { d_start } else { -d_start }) * harmonic;
        zn = zn * z;

        if let Some(prev) = previous {
            let change = (estimate - prev).abs();
            last_change = change;
            // Below the roundoff of the largest term no further progress is possible.
            let scale = estimate
                .abs()
                .max(lit::<T>(16.0) * T::epsilon() * largest / ctrl.rel_tol)
                .max(T::min_positive_value());
            if change <= ctrl.rel_tol * scale {
                small_run += 1;
                if small_run >= ctrl.consecutive_small {
                    return Ok(SeriesSum {
                        value: estimate,
                        modes_used: n + 1,
                        truncation_estimate: change,
                    });
                }
            } else {
                small_run = 0;
            }
        }
        previous = Some(estimate);
    }
    Err(EscapeError::NonConvergence {
        what: "cosine series",
        iterations: ctrl.max_modes,
        estimate: to_f64(last_change),
    })
}

/// `Σ_k ratio^k Δ^k d_0` over the supplied window, truncated once the terms
/// stop shrinking.
fn euler_tail<T: Scalar>(window: &[T], ratio: Complex<T>) -> Complex<T> {
    let mut diffs: Vec<T> = window.to_vec();
    let mut sum = Complex::new(diffs[0], T::zero());
    let mut power = Complex::new(T::one(), T::zero());
    let mut last_size = diffs[0].abs();
    for order in 1..window.len() {
        for i in 0..window.len() - order {
            diffs[i] = diffs[i + 1] - diffs[i];
        }
        power = power * ratio;
        let term = power * diffs[0];
        let size = term.norm();
        if size > last_size {
            break;
        }
        sum = sum + term;
        last_size = size;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gamma_n(n: usize) -> f64 {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        4.0 * s / (PI * (2 * n + 1) as f64)
    }

    #[test]
    fn boxcar_series_sums_to_one_inside() {
        // Σ γ_n cos((2n+1)πx/L) is the Fourier series of the indicator: slowly
        // convergent without acceleration.
        let ctrl = SeriesControl::default();
        for &x in &[0.0, 0.1, -0.25, 0.4] {
            let s = sum_cosine_series(x, 1.0, &ctrl, |n| Ok(gamma_n(n))).unwrap();
            assert_relative_eq!(s.value, 1.0, max_relative = 1e-9);
            assert!(s.modes_used < 200, "used {} modes at x={x}", s.modes_used);
        }
    }

    #[test]
    fn parabola_series_matches_closed_form() {
        // (L/2)^2 - x^2 = Σ 2γ_n/k_n^2 cos(k_n x), k_n = (2n+1)π/L.
        let span = 0.3;
        let ctrl = SeriesControl::default();
        for &x in &[0.0, 0.05, -0.1, 0.14] {
            let s = sum_cosine_series(x, span, &ctrl, |n| {
                let k = (2 * n + 1) as f64 * PI / span;
                Ok(2.0 * gamma_n(n) / (k * k))
            })
            .unwrap();
            assert_relative_eq!(s.value, (span / 2.0).powi(2) - x * x, max_relative = 1e-9);
        }
    }

    #[test]
    fn boundary_is_exact_zero() {
        let ctrl = SeriesControl::default();
        let s = sum_cosine_series(0.5, 1.0, &ctrl, |_| -> Result<f64> { panic!("no coefficient needed") }).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.modes_used, 0);
    }

    #[test]
    fn reports_non_convergence() {
        let ctrl = SeriesControl::new(16, 1e-14, 3).unwrap();
        let err = sum_cosine_series(0.499_99, 1.0, &ctrl, |n| Ok(gamma_n(n))).unwrap_err();
        assert!(matches!(err, EscapeError::NonConvergence { .. }));
    }

    #[test]
    fn control_validation() {
        assert!(SeriesControl::new(0, 1e-10, 3).is_err());
        assert!(SeriesControl::new(10, 1.5, 3).is_err());
        assert!(SeriesControl::<f64>::new(10, 1e-8, 0).is_err());
    }
}
