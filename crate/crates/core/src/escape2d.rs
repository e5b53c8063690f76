//! The joint escape problem in `(x, v)`: survival probability, escape-time
//! density and mean escape time, with their asymptotic regimes.
//!
//! Every quantity is a cosine series over the modes of [`crate::modal`]:
//!
//! ```text
//! S(x, v, τ) = Σ γ_n exp(-A_n(τ) - B_n(τ) v) cos((2n+1)πx/L)
//! T(x, v)    = (1/α) Σ T_n(v) cos((2n+1)πx/L),   T_n(v) = γ_n ∫_0^∞ exp(-A_n - B_n v) dτ
//! ```

use crate::error::{EscapeError, Result};
use crate::modal::{mode_coeffs, ModeCoefficients};
use crate::model::{check_span_and_x, ModelParams, ScaledPoint};
use crate::quad::{integrate_breakpoints, QuadOptions};
use crate::scalar::{lit, to_f64, Scalar};
use crate::series::{sum_cosine_series, SeriesControl, SeriesSum};
use crate::specfun::gauss_2f1;

/// Survival probability with its truncation diagnostics.
pub type SurvivalResult<T> = SeriesSum<T>;

pub(crate) fn clamp_probability<T: Scalar>(sum: SeriesSum<T>) -> SeriesSum<T> {
    let clamped = sum.value.max(T::zero()).min(T::one());
    SeriesSum {
        value: clamped,
        modes_used: sum.modes_used,
        truncation_estimate: sum.truncation_estimate + (clamped - sum.value).abs(),
    }
}

pub(crate) fn unit<T: Scalar>() -> SeriesSum<T> {
    SeriesSum {
        value: T::one(),
        modes_used: 0,
        truncation_estimate: T::zero(),
    }
}

/// Exact survival probability `S(x, v, τ)`.
pub fn survival_2d<T: Scalar>(q: &ScaledPoint<T>, params: &ModelParams<T>, ctrl: &SeriesControl<T>) -> Result<SurvivalResult<T>> {
    q.validate()?;
    if q.tau == T::zero() && !q.on_boundary() {
        return Ok(unit());
    }
    let theta = params.theta();
    let sum = sum_cosine_series(q.x, q.span, ctrl, |n| {
        let c = mode_coeffs(n, q.span, params)?;
        Ok(c.gamma * c.survival_factor(q.tau, q.v, theta))
    })?;
    Ok(clamp_probability(sum))
}

/// Long-time form `Σ γ_n (Δ/μ₊)^θ e^{-μ₋(θτ + v)} cos(·)`, meant for `τ ≳ 1`.
pub fn survival_2d_longtime<T: Scalar>(q: &ScaledPoint<T>, params: &ModelParams<T>, ctrl: &SeriesControl<T>) -> Result<SurvivalResult<T>> {
    q.validate()?;
    let theta = params.theta();
    let sum = sum_cosine_series(q.x, q.span, ctrl, |n| {
        let c = mode_coeffs(n, q.span, params)?;
        let exponent = theta * c.ln_delta_over_mu_plus() - c.mu_minus * (theta * q.tau + q.v);
        Ok(c.gamma * exponent.exp())
    })?;
    Ok(clamp_probability(sum))
}

/// Short-time form `Σ γ_n (1 - μ₋τ)^{-θ} exp{-[θμ₋ + (β/2L)² v/(1 - μ₋τ)]τ} cos(·)`.
///
/// Fails with a domain error when `μ₋τ ≥ 1` for a mode that still contributes
/// to the exact sum.
pub fn survival_2d_shorttime<T: Scalar>(q: &ScaledPoint<T>, params: &ModelParams<T>, ctrl: &SeriesControl<T>) -> Result<SurvivalResult<T>> {
    q.validate()?;
    if q.tau == T::zero() && !q.on_boundary() {
        return Ok(unit());
    }
    let theta = params.theta();
    let lead = mode_coeffs(0, q.span, params)?;
    let reference = lead.gamma.abs() * lead.survival_factor(q.tau, q.v, theta);
    let negligible = ctrl.rel_tol * lit(1e-2) * reference;
    let sum = sum_cosine_series(q.x, q.span, ctrl, |n| {
        let c = mode_coeffs(n, q.span, params)?;
        let reach = c.mu_minus * q.tau;
        if reach >= T::one() {
            if c.gamma.abs() * c.survival_factor(q.tau, q.v, theta) <= negligible {
                return Ok(T::zero());
            }
            return Err(EscapeError::domain("tau", to_f64(q.tau), "short-time form requires mu_minus * tau < 1"));
        }
        let gap = T::one() - reach;
        let exponent = -theta * gap.ln() - (theta * c.mu_minus + c.killing * q.v / gap) * q.tau;
        Ok(c.gamma * exponent.exp())
    })?;
    Ok(clamp_probability(sum))
}

/// Escape-time density `f = -∂S/∂τ` in scaled time.
pub fn escape_density<T: Scalar>(q: &ScaledPoint<T>, params: &ModelParams<T>, ctrl: &SeriesControl<T>) -> Result<SeriesSum<T>> {
    q.validate()?;
    if !(q.tau > T::zero()) {
        return Err(EscapeError::domain("tau", to_f64(q.tau), "density requires tau > 0"));
    }
    let theta = params.theta();
    sum_cosine_series(q.x, q.span, ctrl, |n| {
        let c = mode_coeffs(n, q.span, params)?;
        let (da, db) = c.riccati_derivatives(q.tau, theta);
        Ok(c.gamma * (da + db * q.v) * c.survival_factor(q.tau, q.v, theta))
    })
}

/// `∫_0^∞ exp(-A_n(τ) - B_n(τ) v) dτ`.
///
/// Beyond `τ*` the factor `e^{-Δτ}` is below double-precision resolution and
/// the integrand is a pure exponential, so the tail is closed analytically.
pub fn mode_time_integral<T: Scalar>(c: &ModeCoefficients<T>, v: T, theta: T, rel_tol: T) -> Result<T> {
    let rate = theta * c.mu_minus;
    let tau_star = (lit::<T>(36.0) + (T::one() + theta + lit::<T>(2.0) * c.mu_minus * v).ln()) / c.delta;
    let fastest = c.killing * v + rate + c.delta;
    let mut points = vec![T::zero()];
    let mut p = T::one() / fastest;
    while p < tau_star {
        points.push(p);
        p = p + p;
    }
    points.push(tau_star);
    let body = integrate_breakpoints(|s| c.survival_factor(s, v, theta), &points, QuadOptions::relative(rel_tol))?;
    let tail = c.survival_factor(tau_star, v, theta) / rate;
    Ok(body.value + tail)
}

fn check_v<T: Scalar>(v: T) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(EscapeError::domain("v", to_f64(v), "must be finite and >= 0"))
    }
}

/// Mean escape time `T(x, v)` in original time units.
pub fn met_2d<T: Scalar>(x: T, v: T, span: T, params: &ModelParams<T>, ctrl: &SeriesControl<T>) -> Result<SeriesSum<T>> {
    check_span_and_x(x, span)?;
    check_v(v)?;
    let theta = params.theta();
    let tol = ctrl.coefficient_tol();
    let sum = sum_cosine_series(x, span, ctrl, |n| {
        let c = mode_coeffs(n, span, params)?;
        Ok(c.gamma * mode_time_integral(&c, v, theta, tol)?)
    })?;
    Ok(scale_time(sum, params.alpha()))
}

/// `T_n(0) = (γ_n/(θμ₋)) (Δ/μ₊)^θ F(θ, θμ₋/Δ; 1 + θμ₋/Δ; -μ₋/μ₊)`.
pub fn mode_met_zero_vol<T: Scalar>(c: &ModeCoefficients<T>, theta: T) -> Result<T> {
    let b = theta * c.mu_minus / c.delta;
    let f = gauss_2f1(theta, b, T::one() + b, -c.mu_minus / c.mu_plus)?;
    let prefactor = (theta * c.ln_delta_over_mu_plus()).exp();
    Ok(c.gamma / (theta * c.mu_minus) * prefactor * f)
}

/// Mean escape time at zero volatility, `T(x, 0)`, through the hypergeometric
/// closed form of each mode.
pub fn met_2d_zero_vol<T: Scalar>(x: T, span: T, params: &ModelParams<T>, ctrl: &SeriesControl<T>) -> Result<SeriesSum<T>> {
    check_span_and_x(x, span)?;
    let theta = params.theta();
    let sum = sum_cosine_series(x, span, ctrl, |n| mode_met_zero_vol(&mode_coeffs(n, span, params)?, theta))?;
    Ok(scale_time(sum, params.alpha()))
}

/// Large-volatility law `T ≈ (2α/(k²v)) ((L/2)² - x²)`.
pub fn met_2d_large_vol<T: Scalar>(x: T, v: T, span: T, params: &ModelParams<T>) -> Result<T> {
    check_span_and_x(x, span)?;
    if !(v > T::zero()) || !v.is_finite() {
        return Err(EscapeError::domain("v", to_f64(v), "large-volatility law requires v > 0"));
    }
    let k = params.k();
    let half = span / lit(2.0);
    Ok(lit::<T>(2.0) * params.alpha() / (k * k * v) * (half * half - x * x))
}

pub(crate) fn scale_time<T: Scalar>(sum: SeriesSum<T>, alpha: T) -> SeriesSum<T> {
    SeriesSum {
        value: sum.value / alpha,
        modes_used: sum.modes_used,
        truncation_estimate: sum.truncation_estimate / alpha,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use approx::assert_relative_eq;

    fn params() -> ModelParams<f64> {
        ModelParams::from_theta(0.045, 0.093, 1.25).unwrap()
    }

    fn point(x: f64, v: f64, tau: f64, span: f64) -> ScaledPoint<f64> {
        ScaledPoint::new(x, v, tau, span).unwrap()
    }

    #[test]
    fn initial_and_boundary_values() {
        let (p, ctrl) = (params(), SeriesControl::default());
        assert_eq!(survival_2d(&point(0.002, 5.0, 0.0, 0.01), &p, &ctrl).unwrap().value, 1.0);
        assert_eq!(survival_2d(&point(0.005, 5.0, 0.1, 0.01), &p, &ctrl).unwrap().value, 0.0);
        assert_eq!(survival_2d(&point(-0.005, 5.0, 0.0, 0.01), &p, &ctrl).unwrap().value, 0.0);
        assert_eq!(met_2d(0.005, 1.0, 0.01, &p, &ctrl).unwrap().value, 0.0);
        assert_eq!(met_2d_zero_vol(-0.005, 0.01, &p, &ctrl).unwrap().value, 0.0);
        assert_eq!(met_2d_large_vol(0.005, 1.0, 0.01, &p).unwrap(), 0.0);
    }

    #[test]
    fn small_time_survival_is_near_one() {
        let s = survival_2d(&point(0.0, 1.25, 1e-9, 0.01), &params(), &SeriesControl::default()).unwrap();
        assert!((s.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_vol_mode_matches_quadrature() {
        let p = params();
        for n in [0usize, 1, 5, 20] {
            let c = mode_coeffs(n, 0.01, &p).unwrap();
            let closed = mode_met_zero_vol(&c, p.theta()).unwrap();
            let quad = c.gamma * mode_time_integral(&c, 0.0, p.theta(), 1e-12).unwrap();
            assert_relative_eq!(closed, quad, max_relative = 1e-9);
        }
    }

    #[test]
    fn zero_vol_continuity() {
        let (p, ctrl) = (params(), SeriesControl::default());
        let closed = met_2d_zero_vol(0.001, 0.01, &p, &ctrl).unwrap().value;
        let near = met_2d(0.001, 1e-12, 0.01, &p, &ctrl).unwrap().value;
        assert_relative_eq!(closed, near, max_relative = 1e-6);
    }

    #[test]
    fn density_is_minus_time_derivative() {
        let (p, ctrl) = (params(), SeriesControl::default());
        for &(x, v, tau) in &[(0.0, 1.25, 2e-4), (0.002, 0.5, 1e-3), (-0.003, 3.0, 5e-5)] {
            let f = escape_density(&point(x, v, tau, 0.01), &p, &ctrl).unwrap().value;
            let h = tau * 1e-4;
            let up = survival_2d(&point(x, v, tau + h, 0.01), &p, &ctrl).unwrap().value;
            let down = survival_2d(&point(x, v, tau - h, 0.01), &p, &ctrl).unwrap().value;
            assert_relative_eq!(f, (down - up) / (2.0 * h), max_relative = 1e-6);
        }
        assert!(escape_density(&point(0.0, 1.0, 0.0, 0.01), &p, &ctrl).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        let (p, ctrl) = (params(), SeriesControl::default());
        let q = |tau: f64| escape_density(&point(0.001, 1.25, tau, 0.01), &p, &ctrl).unwrap().value;
        let mut points = vec![0.0];
        let mut t = 1e-7;
        while t < 1.0 {
            points.push(t);
            t *= 2.0;
        }
        let total = integrate_breakpoints(q, &points, QuadOptions::relative(1e-10)).unwrap();
        let rest = survival_2d(&point(0.001, 1.25, *points.last().unwrap(), 0.01), &p, &ctrl).unwrap().value;
        assert!((total.value + rest - 1.0).abs() < 1e-6, "{}", total.value);
    }

    #[test]
    fn short_time_rejects_invalid_expansion() {
        let p = params();
        let err = survival_2d_shorttime(&point(0.0, 0.0, 0.5, 0.01), &p, &SeriesControl::default()).unwrap_err();
        assert!(err.is_domain());
    }

    #[test]
    fn long_time_matches_exact_at_large_tau() {
        let p = params();
        let ctrl = SeriesControl::default();
        let q = point(0.1, 2.0, 20.0, 1.0);
        let exact = survival_2d(&q, &p, &ctrl).unwrap().value;
        let long = survival_2d_longtime(&q, &p, &ctrl).unwrap().value;
        assert!(((long - exact) / exact).abs() < 1e-6);
    }

    #[test]
    fn watson_leading_coefficient() {
        let p = params();
        let c = mode_coeffs(0, 0.01, &p).unwrap();
        let v = 1e5;
        let tn = c.gamma * mode_time_integral(&c, v, p.theta(), 1e-12).unwrap();
        let lead = c.gamma * (2.0 * 0.01 / c.beta).powi(2);
        assert_relative_eq!(tn * v, lead, max_relative = 1e-2);
    }

    #[test]
    fn single_precision_survival() {
        let p = ModelParams::from_theta(0.045f32, 0.093, 1.25).unwrap();
        let q = ScaledPoint::new(0.0f32, 1.25, 1e-4, 0.01).unwrap();
        let s32 = survival_2d(&q, &p, &SeriesControl::default()).unwrap().value;
        let s64 = survival_2d(&point(0.0, 1.25, 1e-4, 0.01), &params(), &SeriesControl::default()).unwrap().value;
        assert!((s32 as f64 - s64).abs() < 1e-4);
    }

    #[test]
    fn met_matches_time_integral_of_survival() {
        let (p, ctrl) = (params(), SeriesControl::default());
        let met = met_2d(0.0, 1.25, 0.01, &p, &ctrl).unwrap().value;
        let mut points = vec![0.0];
        let mut t = 1e-7;
        while t < 0.5 {
            points.push(t);
            t *= 2.0;
        }
        let s = |tau: f64| survival_2d(&point(0.0, 1.25, tau, 0.01), &p, &ctrl).unwrap().value;
        let q = integrate(s, 0.0, 1e-7, QuadOptions::relative(1e-10)).unwrap().value
            + integrate_breakpoints(s, &points[1..], QuadOptions::relative(1e-10)).unwrap().value;
        assert_relative_eq!(p.alpha() * met, q, max_relative = 1e-6);
    }
}
