//! Constant-volatility (Wiener) escape from the same interval, the reference
//! the Heston results are compared against.

use crate::error::{EscapeError, Result};
use crate::escape2d::{clamp_probability, unit, SurvivalResult};
use crate::model::check_span_and_x;
use crate::scalar::{from_usize, lit, to_f64, Scalar};
use crate::series::{sum_cosine_series, SeriesControl};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WienerParams<T> {
    sigma: T,
}

impl<T: Scalar> WienerParams<T> {
    pub fn new(sigma: T) -> Result<Self> {
        if sigma > T::zero() && sigma.is_finite() {
            Ok(Self { sigma })
        } else {
            Err(EscapeError::domain("sigma", to_f64(sigma), "must be finite and > 0"))
        }
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }
}

/// `S₀(x, t) = (4/π) Σ ((-1)^n/(2n+1)) exp{-[(2n+1)πσ/L]² t/2} cos((2n+1)πx/L)`.
pub fn survival_wiener<T: Scalar>(x: T, t: T, span: T, w: &WienerParams<T>, ctrl: &SeriesControl<T>) -> Result<SurvivalResult<T>> {
    check_span_and_x(x, span)?;
    if !(t >= T::zero()) || t.is_nan() {
        return Err(EscapeError::domain("t", to_f64(t), "must be >= 0"));
    }
    if t == T::zero() && x.abs() < span / lit(2.0) {
        return Ok(unit());
    }
    let base = T::PI() * w.sigma / span;
    let sum = sum_cosine_series(x, span, ctrl, |n| {
        let odd = from_usize::<T>(2 * n + 1);
        let sign = if n % 2 == 0 { T::one() } else { -T::one() };
        let rate = base * odd;
        Ok(sign * lit::<T>(4.0) / (T::PI() * odd) * (-rate * rate * t / lit(2.0)).exp())
    })?;
    Ok(clamp_probability(sum))
}

/// `T₀(x) = ((L/2)² - x²)/σ²`.
pub fn met_wiener<T: Scalar>(x: T, span: T, w: &WienerParams<T>) -> Result<T> {
    check_span_and_x(x, span)?;
    let half = span / lit(2.0);
    Ok((half * half - x * x) / (w.sigma * w.sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_values() {
        let w = WienerParams::new(0.093).unwrap();
        assert_relative_eq!(met_wiener(0.0, 0.01, &w).unwrap(), 0.005f64.powi(2) / 0.093f64.powi(2), max_relative = 1e-15);
        assert!((met_wiener(0.0, 0.01, &w).unwrap() - 2.89e-3).abs() < 1e-5);
        assert_eq!(met_wiener(0.005, 0.01, &w).unwrap(), 0.0);
        let ctrl = SeriesControl::default();
        assert_eq!(survival_wiener(0.001, 0.0, 0.01, &w, &ctrl).unwrap().value, 1.0);
        assert_eq!(survival_wiener(-0.005, 1.0, 0.01, &w, &ctrl).unwrap().value, 0.0);
        assert!(WienerParams::new(0.0).is_err());
    }

    #[test]
    fn parabola_shape() {
        let w = WienerParams::new(0.2).unwrap();
        let c0 = met_wiener(0.0, 0.3, &w).unwrap();
        for &x in &[-0.1, 0.05, 0.12] {
            assert_relative_eq!(met_wiener(x, 0.3, &w).unwrap() + x * x / 0.04, c0, max_relative = 1e-14);
        }
    }

    #[test]
    fn survival_decreases_in_time() {
        let w = WienerParams::new(0.093).unwrap();
        let ctrl = SeriesControl::default();
        let mut last = 1.0;
        for i in 1..20 {
            let s = survival_wiener(0.0, i as f64 * 1e-3, 0.01, &w, &ctrl).unwrap().value;
            assert!(s <= last);
            last = s;
        }
    }
}
