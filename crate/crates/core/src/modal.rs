//! Per-mode constants and the closed-form solution of the mode Riccati system
//!
//! ```text
//! dB/dτ = -B - B² + (β_n/2L)²,   B(0) = 0,
//! dA/dτ = θ B,                    A(0) = 0,
//! ```
//!
//! which drives every Fourier coefficient of the survival probability through
//! `S_n(v, τ) = γ_n exp(-A_n(τ) - B_n(τ) v)`.
//!
//! Both functions are evaluated in terms of `e^{-Δτ}` only, so they stay finite
//! for arbitrarily large `Δτ`.

use crate::error::{EscapeError, Result};
use crate::model::ModelParams;
use crate::scalar::{from_usize, lit, to_f64, Scalar};

/// Constants of Fourier mode `n` for an interval of width `span`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients<T> {
    pub n: usize,
    /// Fourier amplitude of the unit initial condition, `4(-1)^n / (π(2n+1))`.
    pub gamma: T,
    /// `(k/α)(2n+1)π`.
    pub beta: T,
    /// `√(1 + (β/L)²)`.
    pub delta: T,
    /// `(Δ + 1)/2`.
    pub mu_plus: T,
    /// `(Δ - 1)/2`, computed as `(β/2L)²/μ₊` to avoid cancellation when `β ≪ L`.
    pub mu_minus: T,
    /// `(β/2L)² = μ₊ μ₋`, the killing rate per unit of scaled volatility.
    pub killing: T,
    pub span: T,
}

/// Builds the constants of mode `n`.
pub fn mode_coeffs<T: Scalar>(n: usize, span: T, params: &ModelParams<T>) -> Result<ModeCoefficients<T>> {
    if !(span > T::zero()) || !span.is_finite() {
        return Err(EscapeError::domain("L", to_f64(span), "span must be finite and > 0"));
    }
    let odd = from_usize::<T>(2 * n + 1);
    let sign = if n % 2 == 0 { T::one() } else { -T::one() };
    let gamma = sign * lit::<T>(4.0) / (T::PI() * odd);
    let beta = params.vol_scale() * odd * T::PI();
    let ratio = beta / span;
    let delta = ratio.hypot(T::one());
    let mu_plus = (delta + T::one()) / lit(2.0);
    let half_ratio = ratio / lit(2.0);
    let killing = half_ratio * half_ratio;
    let mu_minus = killing / mu_plus;
    Ok(ModeCoefficients {
        n,
        gamma,
        beta,
        delta,
        mu_plus,
        mu_minus,
        killing,
        span,
    })
}

impl<T: Scalar> ModeCoefficients<T> {
    /// `B_n(τ) = μ₋ (1 - e^{-Δτ}) / (1 + (μ₋/μ₊) e^{-Δτ})`.
    pub fn riccati_b(&self, tau: T) -> T {
        let decay = (-self.delta * tau).exp();
        let grown = -(-self.delta * tau).exp_m1();
        self.mu_minus * grown / (T::one() + self.mu_minus / self.mu_plus * decay)
    }

    /// `A_n(τ) = θ [μ₋τ + ln((μ₊ + μ₋e^{-Δτ})/Δ)]`, with the logarithm written as
    /// `ln(1 - (μ₋/Δ)(1 - e^{-Δτ}))`.
    pub fn riccati_a(&self, tau: T, theta: T) -> T {
        let grown = -(-self.delta * tau).exp_m1();
        theta * (self.mu_minus * tau + (-(self.mu_minus / self.delta) * grown).ln_1p())
    }

    /// `(dA/dτ, dB/dτ)`. The Riccati right-hand side is evaluated through its
    /// factored form `μ₋Δ²e^{-Δτ} / (μ₊(1 + (μ₋/μ₊)e^{-Δτ})²)`.
    pub fn riccati_derivatives(&self, tau: T, theta: T) -> (T, T) {
        let decay = (-self.delta * tau).exp();
        let denom = T::one() + self.mu_minus / self.mu_plus * decay;
        let db = self.mu_minus * self.delta * self.delta * decay / (self.mu_plus * denom * denom);
        (theta * self.riccati_b(tau), db)
    }

    /// `exp(-A_n(τ) - B_n(τ) v)`: the mode's survival factor without `γ_n`.
    pub fn survival_factor(&self, tau: T, v: T, theta: T) -> T {
        (-self.riccati_a(tau, theta) - self.riccati_b(tau) * v).exp()
    }

    /// `ln(Δ/μ₊)`, the constant that `-A_n(τ)/θ + μ₋τ` tends to at long times.
    pub(crate) fn ln_delta_over_mu_plus(&self) -> T {
        // Δ/μ₊ = 1 + μ₋/μ₊
        (self.mu_minus / self.mu_plus).ln_1p()
    }
}

/// See [`ModeCoefficients::riccati_b`].
pub fn riccati_b<T: Scalar>(coeffs: &ModeCoefficients<T>, tau: T) -> T {
    coeffs.riccati_b(tau)
}

/// See [`ModeCoefficients::riccati_a`].
pub fn riccati_a<T: Scalar>(coeffs: &ModeCoefficients<T>, tau: T, theta: T) -> T {
    coeffs.riccati_a(tau, theta)
}

/// See [`ModeCoefficients::riccati_derivatives`].
pub fn riccati_a_b_derivatives<T: Scalar>(coeffs: &ModeCoefficients<T>, tau: T, theta: T) -> (T, T) {
    coeffs.riccati_derivatives(tau, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params() -> ModelParams<f64> {
        ModelParams::from_theta(0.045, 0.093, 1.25).unwrap()
    }

    /// Classical RK4 on the Riccati system, the independent route for B.
    fn rk4_b(c: &ModeCoefficients<f64>, tau: f64, steps: usize) -> f64 {
        let rhs = |b: f64| -b - b * b + c.killing;
        let h = tau / steps as f64;
        let mut b = 0.0;
        for _ in 0..steps {
            let k1 = rhs(b);
            let k2 = rhs(b + 0.5 * h * k1);
            let k3 = rhs(b + 0.5 * h * k2);
            let k4 = rhs(b + h * k3);
            b += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        b
    }

    #[test]
    fn leading_mode_amplitude() {
        let c = mode_coeffs(0, 0.01, &params()).unwrap();
        assert_relative_eq!(c.gamma, 4.0 / PI, max_relative = 1e-15);
        let c1 = mode_coeffs(1, 0.01, &params()).unwrap();
        assert_relative_eq!(c1.gamma, -4.0 / (3.0 * PI), max_relative = 1e-15);
    }

    #[test]
    fn mode_one_record() {
        let p = params();
        let c = mode_coeffs(1, 0.01, &p).unwrap();
        let beta = p.k() / p.alpha() * 3.0 * PI;
        let delta = (1.0 + (beta / 0.01f64).powi(2)).sqrt();
        assert_relative_eq!(c.beta, beta, max_relative = 1e-15);
        assert_relative_eq!(c.delta, delta, max_relative = 1e-14);
        assert_relative_eq!(c.mu_plus, (delta + 1.0) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(c.mu_minus, (delta - 1.0) / 2.0, max_relative = 1e-12);
        assert_relative_eq!(c.mu_plus + c.mu_minus, c.delta, max_relative = 1e-12);
        assert_relative_eq!(c.mu_plus * c.mu_minus, (beta / 0.02).powi(2), max_relative = 1e-12);
    }

    #[test]
    fn b_limits_and_ode_oracle() {
        let c = mode_coeffs(0, 0.1, &params()).unwrap();
        assert_eq!(c.riccati_b(0.0), 0.0);
        assert_relative_eq!(c.riccati_b(1e4), c.mu_minus, max_relative = 1e-15);
        assert!((c.riccati_b(0.5) - rk4_b(&c, 0.5, 20_000)).abs() < 1e-8);
    }

    #[test]
    fn a_is_theta_times_integral_of_b() {
        let theta = 1.25;
        let c = mode_coeffs(0, 0.1, &params()).unwrap();
        assert_eq!(c.riccati_a(0.0, theta), 0.0);
        let q = integrate(|s| c.riccati_b(s), 0.0, 2.0, QuadOptions::relative(1e-13)).unwrap();
        assert!((c.riccati_a(2.0, theta) - theta * q.value).abs() < 1e-8);
    }

    #[test]
    fn derivatives_at_the_ends() {
        let theta = 0.5;
        let c = mode_coeffs(3, 0.01, &params()).unwrap();
        let (da, db) = c.riccati_derivatives(0.0, theta);
        assert_eq!(da, 0.0);
        assert_relative_eq!(db, c.killing, max_relative = 1e-13);
        let (da, db) = c.riccati_derivatives(50.0, theta);
        assert_relative_eq!(da, theta * c.mu_minus, max_relative = 1e-14);
        assert!(db.abs() < 1e-12);
    }

    #[test]
    fn no_overflow_at_huge_delta_tau() {
        let c = mode_coeffs(40, 1e-5, &params()).unwrap();
        for &tau in &[1e-3, 1.0, 1e4] {
            assert!(c.riccati_a(tau, 1.25).is_finite());
            assert!(c.riccati_b(tau).is_finite());
            let (da, db) = c.riccati_derivatives(tau, 1.25);
            assert!(da.is_finite() && db.is_finite());
        }
    }

    #[test]
    fn large_span_keeps_mu_minus_accurate() {
        let c = mode_coeffs(0, 1e4, &params()).unwrap();
        // μ₋ ≈ (β/2L)² when β ≪ L.
        assert_relative_eq!(c.mu_minus, c.killing / c.mu_plus, max_relative = 1e-15);
        assert!(c.mu_minus > 0.0);
    }

    proptest! {
        #[test]
        fn sum_and_product_identities(n in 0usize..200, span in 1e-4f64..100.0, theta in 0.1f64..5.0) {
            let p = ModelParams::from_theta(0.045, 0.093, theta).unwrap();
            let c = mode_coeffs(n, span, &p).unwrap();
            prop_assert!(((c.mu_plus + c.mu_minus) - c.delta).abs() <= 1e-12 * c.delta);
            let half = c.beta / (2.0 * span);
            prop_assert!((c.mu_plus * c.mu_minus - half * half).abs() <= 1e-12 * half * half);
            prop_assert!(((c.mu_plus - c.mu_minus) - 1.0).abs() <= 1e-12 * c.mu_plus.max(1.0));
            prop_assert!(c.delta >= 1.0);
        }

        #[test]
        fn b_bounded_and_monotone(n in 0usize..64, t1 in 0.0f64..20.0, dt in 0.0f64..5.0) {
            let c = mode_coeffs(n, 0.1, &params()).unwrap();
            let (b1, b2) = (c.riccati_b(t1), c.riccati_b(t1 + dt));
            prop_assert!(b1 >= 0.0 && b1 <= c.mu_minus * (1.0 + 1e-15));
            prop_assert!(b2 >= b1);
            prop_assert!(c.riccati_a(t1 + dt, 1.25) >= c.riccati_a(t1, 1.25));
        }
    }
}
