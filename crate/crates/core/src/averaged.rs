//! Escape of the return alone, with the initial volatility drawn from its
//! stationary Gamma law
//!
//! ```text
//! p_st(v) = v^{θ-1} e^{-v} / Γ(θ).
//! ```
//!
//! Averaging the joint solution over `p_st` gives closed forms for the
//! survival probability `S(x, τ)` and the mean escape time `T(x)`; their
//! small- and large-span laws live here as well.

use crate::error::{EscapeError, Result};
use crate::escape2d::{clamp_probability, scale_time, unit, SurvivalResult};
use crate::modal::{mode_coeffs, ModeCoefficients};
use crate::model::{check_span_and_x, ModelParams};
use crate::quad::{integrate, integrate_breakpoints, QuadOptions, QuadResult};
use crate::scalar::{from_usize, lit, to_f64, Scalar};
use crate::series::{sum_cosine_series, SeriesControl, SeriesSum};
use crate::specfun::{gamma, gauss_2f1, ln_gamma};

/// Stationary density of the scaled volatility.
pub fn stationary_density<T: Scalar>(v: T, theta: T) -> Result<T> {
    if !(theta > T::zero()) || !theta.is_finite() {
        return Err(EscapeError::domain("theta", to_f64(theta), "must be finite and > 0"));
    }
    if !(v >= T::zero()) {
        return Err(EscapeError::domain("v", to_f64(v), "must be >= 0"));
    }
    if v == T::zero() {
        return Ok(if theta < T::one() {
            T::infinity()
        } else if theta == T::one() {
            T::one()
        } else {
            T::zero()
        });
    }
    Ok(((theta - T::one()) * v.ln() - v - ln_gamma(theta)?).exp())
}

/// `∫_0^∞ f(v) p_st(v) dv`.
///
/// On `[0, θ]` the substitution `v = w^{1/θ}` absorbs the `v^{θ-1}` factor,
/// on `[θ, ∞)` the substitution `v = θ - ln u` maps the exponential tail onto
/// `(0, 1]`.
pub fn gamma_average<T, F>(theta: T, mut f: F, opts: QuadOptions<T>) -> Result<QuadResult<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if !(theta > T::zero()) || !theta.is_finite() {
        return Err(EscapeError::domain("theta", to_f64(theta), "must be finite and > 0"));
    }
    let head_norm = gamma(theta + T::one())?;
    let head = integrate(
        |w: T| {
            let v = w.powf(theta.recip());
            f(v) * (-v).exp() / head_norm
        },
        T::zero(),
        theta.powf(theta),
        opts,
    )?;
    let ln_norm = ln_gamma(theta)?;
    let tail = integrate(
        |u: T| {
            if u <= T::zero() {
                return T::zero();
            }
            let v = theta - u.ln();
            let weight = ((theta - T::one()) * v.ln() - theta - ln_norm).exp();
            if weight == T::zero() {
                T::zero()
            } else {
                f(v) * weight
            }
        },
        T::zero(),
        T::one(),
        opts,
    )?;
    Ok(QuadResult {
        value: head.value + tail.value,
        abs_error: head.abs_error + tail.abs_error,
        evaluations: head.evaluations + tail.evaluations,
    })
}

/// `ln[(Δ e^{-μ₋τ} / (μ₊² - μ₋² e^{-Δτ}))^θ]`, written as
/// `-θ[μ₋τ + ln(1 + (μ₋²/Δ)(1 - e^{-Δτ}))]`.
fn ln_return_factor<T: Scalar>(c: &ModeCoefficients<T>, tau: T, theta: T) -> T {
    let grown = -(-c.delta * tau).exp_m1();
    -theta * (c.mu_minus * tau + (c.mu_minus * c.mu_minus / c.delta * grown).ln_1p())
}

fn check_tau<T: Scalar>(tau: T) -> Result<()> {
    if tau >= T::zero() && !tau.is_nan() {
        Ok(())
    } else {
        Err(EscapeError::domain("tau", to_f64(tau), "must be >= 0"))
    }
}

/// Exact survival probability of the return, `S(x, τ)`.
pub fn survival_return<T: Scalar>(x: T, tau: T, span: T, params: &ModelParams<T>, ctrl: &SeriesControl<T>) -> Result<SurvivalResult<T>> {
    check_span_and_x(x, span)?;
    check_tau(tau)?;
    if tau == T::zero() && x.abs() < span / lit(2.0) {
        return Ok(unit());
    }
    let theta = params.theta();
    let sum = sum_cosine_series(x, span, ctrl, |n| {
        let c = mode_coeffs(n, span, params)?;
        Ok(c.gamma * ln_return_factor(&c, tau, theta).exp())
    })?;
    Ok(clamp_probability(sum))
}

/// Long-time form `Σ γ_n (Δ/μ₊²)^θ e^{-θμ₋τ} cos(·)`.
pub fn survival_return_longtime<T: Scalar>(
    x: T,
    tau: T,
    span: T,
    params: &ModelParams<T>,
    ctrl: &SeriesControl<T>,
) -> Result<SurvivalResult<T>> {
    check_span_and_x(x, span)?;
    check_tau(tau)?;
    let theta = params.theta();
    let sum = sum_cosine_series(x, span, ctrl, |n| {
        let c = mode_coeffs(n, span, params)?;
        Ok(c.gamma * (theta * (ln_delta_over_mu_plus_sq(&c) - c.mu_minus * tau)).exp())
    })?;
    Ok(clamp_probability(sum))
}

/// Short-time form `Σ γ_n e^{-θμ₋τ} (1 + μ₋²τ)^{-θ} cos(·)`.
pub fn survival_return_shorttime<T: Scalar>(
    x: T,
    tau: T,
    span: T,
    params: &ModelParams<T>,
    ctrl: &SeriesControl<T>,
) -> Result<SurvivalResult<T>> {
    check_span_and_x(x, span)?;
    check_tau(tau)?;
    if tau == T::zero() && x.abs() < span / lit(2.0) {
        return Ok(unit());
    }
    let theta = params.theta();
    let sum = sum_cosine_series(x, span, ctrl, |n| {
        let c = mode_coeffs(n, span, params)?;
        Ok(c.gamma * (-theta * (c.mu_minus * tau + (c.mu_minus * c.mu_minus * tau).ln_1p())).exp())
    })?;
    Ok(clamp_probability(sum))
}

/// `ln(Δ/μ₊²)`.
fn ln_delta_over_mu_plus_sq<T: Scalar>(c: &ModeCoefficients<T>) -> T {
    c.delta.ln() - lit::<T>(2.0) * c.mu_plus.ln()
}

/// `(Δ/μ₊²)^θ F(θ, b; 1 + b; z)` from the Euler integral. Since `1 - z = Δ/μ₊²`,
/// the substitution `s = t^b` folds the prefactor into a bounded integrand, so
/// this stays finite where the prefactor underflows and `F` overflows.
fn scaled_euler_integral<T: Scalar>(c: &ModeCoefficients<T>, theta: T) -> Result<T> {
    let b = theta * c.mu_minus / c.delta;
    let ratio = c.mu_minus / c.mu_plus;
    let z = ratio * ratio;
    let ln_one_minus_z = ln_delta_over_mu_plus_sq(c);
    let integrand = |s: T| (theta * (ln_one_minus_z - (-z * s.powf(b.recip())).ln_1p())).exp();
    let mut points = vec![T::zero()];
    let mut gap = T::one();
    while gap > lit(1e-15) {
        gap = gap / lit(4.0);
        points.push(T::one() - gap);
    }
    points.push(T::one());
    Ok(integrate_breakpoints(integrand, &points, QuadOptions::relative(lit(1e-12)))?.value)
}

/// `α T_n = (γ_n/(θμ₋)) (Δ/μ₊²)^θ F(θ, θμ₋/Δ; 1 + θμ₋/Δ; μ₋²/μ₊²)`.
pub fn mode_met_return<T: Scalar>(c: &ModeCoefficients<T>, theta: T) -> Result<T> {
    let b = theta * c.mu_minus / c.delta;
    let ratio = c.mu_minus / c.mu_plus;
    let z = ratio * ratio;
    let ln_prefactor = theta * ln_delta_over_mu_plus_sq(c);
    let scaled_f = if ln_prefactor > lit(-500.0) {
        ln_prefactor.exp() * gauss_2f1(theta, b, T::one() + b, z)?
    } else {
        scaled_euler_integral(c, theta)?
    };
    Ok(c.gamma / (theta * c.mu_minus) * scaled_f)
}

/// Exact mean escape time of the return, `T(x)`, in original time units.
pub fn met_return<T: Scalar>(x: T, span: T, params: &ModelParams<T>, ctrl: &SeriesControl<T>) -> Result<SeriesSum<T>> {
    check_span_and_x(x, span)?;
    let theta = params.theta();
    let sum = sum_cosine_series(x, span, ctrl, |n| mode_met_return(&mode_coeffs(n, span, params)?, theta))?;
    Ok(scale_time(sum, params.alpha()))
}

/// Which small-span law applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaRegime {
    BelowOne,
    EqualOne,
    AboveOne,
}

impl ThetaRegime {
    pub fn of<T: Scalar>(theta: T) -> Self {
        let tol = lit::<T>(1e-9);
        if (theta - T::one()).abs() <= tol {
            ThetaRegime::EqualOne
        } else if theta < T::one() {
            ThetaRegime::BelowOne
        } else {
            ThetaRegime::AboveOne
        }
    }

    /// Small-span growth exponent of `T(0)` (the `θ = 1` law carries an extra `-ln L`).
    pub fn small_span_exponent<T: Scalar>(&self, theta: T) -> T {
        match self {
            ThetaRegime::BelowOne => theta + T::one(),
            _ => lit(2.0),
        }
    }
}

/// Default upper span for the small-span laws, `10⁻² k/α`.
pub fn small_span_threshold<T: Scalar>(params: &ModelParams<T>) -> T {
    lit::<T>(1e-2) * params.vol_scale()
}

/// Prefactor `N₁` of the `θ < 1` law `T(x) ≈ N₁ L^{θ+1} Σ (-1)^n (2n+1)^{-(θ+2)} cos(·)`.
pub fn small_span_n1<T: Scalar>(params: &ModelParams<T>) -> Result<T> {
    let theta = params.theta();
    let alpha = params.alpha();
    let g = gamma(T::one() + theta / lit(2.0))? * gamma(T::one() - theta)? / gamma(T::one() - theta / lit(2.0))?;
    let pow2 = lit::<T>(2.0).powf(lit::<T>(2.0) * theta + lit(3.0));
    Ok(pow2 / (T::PI() * alpha * theta) * (alpha / (T::PI() * params.k())).powf(theta + T::one()) * g)
}

/// Prefactor `N₂` of the `θ > 1` law `T(x) ≈ N₂ L² Σ (-1)^n (2n+1)^{-3} cos(·)`.
pub fn small_span_n2<T: Scalar>(params: &ModelParams<T>) -> T {
    let k = params.k();
    let pi = T::PI();
    lit::<T>(16.0) * params.alpha() / (pi * pi * pi * k * k * (params.theta() - T::one()))
}

/// Leading small-span approximation of `T(x)`.
///
/// Errors when `L` exceeds [`small_span_threshold`]; use
/// [`met_return_small_span_with_threshold`] to override.
pub fn met_return_small_span<T: Scalar>(x: T, span: T, params: &ModelParams<T>, ctrl: &SeriesControl<T>) -> Result<SeriesSum<T>> {
    met_return_small_span_with_threshold(x, span, params, ctrl, small_span_threshold(params))
}

pub fn met_return_small_span_with_threshold<T: Scalar>(
    x: T,
    span: T,
    params: &ModelParams<T>,
    ctrl: &SeriesControl<T>,
    threshold: T,
) -> Result<SeriesSum<T>> {
    check_span_and_x(x, span)?;
    if span > threshold {
        return Err(EscapeError::domain("L", to_f64(span), "span above the small-span threshold"));
    }
    let theta = params.theta();
    match ThetaRegime::of(theta) {
        ThetaRegime::BelowOne => {
            let n1 = small_span_n1(params)?;
            let sum = sum_cosine_series(x, span, ctrl, |n| {
                let odd = from_usize::<T>(2 * n + 1);
                let sign = if n % 2 == 0 { T::one() } else { -T::one() };
                Ok(sign * odd.powf(-(theta + lit(2.0))))
            })?;
            Ok(scaled_sum(sum, n1 * span.powf(theta + T::one())))
        }
        ThetaRegime::AboveOne => {
            let n2 = small_span_n2(params);
            let sum = sum_cosine_series(x, span, ctrl, |n| {
                let odd = from_usize::<T>(2 * n + 1);
                let sign = if n % 2 == 0 { T::one() } else { -T::one() };
                Ok(sign / (odd * odd * odd))
            })?;
            Ok(scaled_sum(sum, n2 * span * span))
        }
        ThetaRegime::EqualOne => {
            // T(x) ≈ (4L²/α) Σ (γ_n/β_n²) (-ln(L/β_n)) cos(·)
            let sum = sum_cosine_series(x, span, ctrl, |n| {
                let c = mode_coeffs(n, span, params)?;
                Ok(-c.gamma / (c.beta * c.beta) * (span / c.beta).ln())
            })?;
            Ok(scaled_sum(sum, lit::<T>(4.0) * span * span / params.alpha()))
        }
    }
}

fn scaled_sum<T: Scalar>(sum: SeriesSum<T>, factor: T) -> SeriesSum<T> {
    SeriesSum {
        value: sum.value * factor,
        modes_used: sum.modes_used,
        truncation_estimate: sum.truncation_estimate * factor.abs(),
    }
}

/// Least-squares fit `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

pub fn linear_fit<T: Scalar>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(EscapeError::domain("points", xs.len() as f64, "need at least two paired samples"));
    }
    let n = from_usize::<T>(xs.len());
    let mx = xs.iter().fold(T::zero(), |s, &x| s + x) / n;
    let my = ys.iter().fold(T::zero(), |s, &y| s + y) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
        syy = syy + (y - my) * (y - my);
    }
    if !(sxx > T::zero()) || !sxx.is_finite() || !syy.is_finite() {
        return Err(EscapeError::domain("points", to_f64(sxx), "degenerate abscissae"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy > T::zero() { sxy * sxy / (sxx * syy) } else { T::one() };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Scaling of `T(x)` with the span.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanScalingReport<T> {
    pub theta_regime: ThetaRegime,
    /// Slope of `ln T` against `ln L`.
    pub fitted_exponent: T,
    /// `e^{intercept}`, so that `T ≈ prefactor · L^{exponent}`.
    pub prefactor: T,
    pub r_squared: T,
    pub fit_range: (T, T),
    /// `T(x)` at each span.
    pub met: Vec<T>,
    /// `T(x) / T₀` with the outer solution `T₀ = ((L/2)² - x²)/m²`.
    pub outer_ratio: Vec<T>,
}

/// Fits `ln T(x)` against `ln L` over `spans`, with `x = x_frac · L`.
pub fn met_return_large_span_check<T: Scalar>(
    x_frac: T,
    spans: &[T],
    params: &ModelParams<T>,
    ctrl: &SeriesControl<T>,
) -> Result<SpanScalingReport<T>> {
    if spans.len() < 3 {
        return Err(EscapeError::domain("L_list", spans.len() as f64, "need at least three spans"));
    }
    if spans.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(EscapeError::domain("L_list", f64::NAN, "spans must be strictly increasing"));
    }
    if !(x_frac.abs() <= lit(0.5)) {
        return Err(EscapeError::domain("x_frac", to_f64(x_frac), "must satisfy |x/L| <= 1/2"));
    }
    let m2 = params.m() * params.m();
    let mut met = Vec::with_capacity(spans.len());
    let mut outer_ratio = Vec::with_capacity(spans.len());
    for &span in spans {
        let x = x_frac * span;
        let t = met_return(x, span, params, ctrl)?.value;
        let half = span / lit(2.0);
        let outer = (half * half - x * x) / m2;
        met.push(t);
        outer_ratio.push(if outer > T::zero() { t / outer } else { T::zero() });
    }
    let (fitted_exponent, prefactor, r_squared) = if met.iter().all(|&t| t == T::zero()) {
        (T::zero(), T::zero(), T::one())
    } else {
        let xs: Vec<T> = spans.iter().map(|l| l.ln()).collect();
        let ys: Vec<T> = met.iter().map(|t| t.ln()).collect();
        let fit = linear_fit(&xs, &ys)?;
        (fit.slope, fit.intercept.exp(), fit.r_squared)
    };
    Ok(SpanScalingReport {
        theta_regime: ThetaRegime::of(params.theta()),
        fitted_exponent,
        prefactor,
        r_squared,
        fit_range: (spans[0], spans[spans.len() - 1]),
        met,
        outer_ratio,
    })
}
