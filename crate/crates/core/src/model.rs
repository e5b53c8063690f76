//! Heston parameters and the dimensionless rescaling `τ = αt`, `v = (2α/k²)y`.
//!
//! The return `X` and its variance `Y` follow
//!
//! ```text
//! dX = √Y dW₁,    dY = -α(Y - m²) dt + k √Y dW₂,
//! ```
//!
//! with independent noises. After rescaling, the only parameter left in the
//! volatility dynamics is the dimensionless normal level `θ = 2αm²/k²`.

use crate::error::{EscapeError, Result};
use crate::scalar::{lit, to_f64, Scalar};

/// The Heston triple `(α, m, k)` and its derived normal level `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    alpha: T,
    m: T,
    k: T,
    theta: T,
}

fn positive<T: Scalar>(field: &'static str, value: T) -> Result<T> {
    if value.is_finite() && value > T::zero() {
        Ok(value)
    } else {
        Err(EscapeError::domain(field, to_f64(value), "must be finite and strictly positive"))
    }
}

impl<T: Scalar> ModelParams<T> {
    /// Builds the parameter set from the reverting rate `alpha`, the normal
    /// level of volatility `m` and the vol-of-vol `k`.
    pub fn new(alpha: T, m: T, k: T) -> Result<Self> {
        let alpha = positive("alpha", alpha)?;
        let m = positive("m", m)?;
        let k = positive("k", k)?;
        let theta = positive("theta", normal_level(alpha, m, k))?;
        Ok(Self { alpha, m, k, theta })
    }

    /// Builds the parameter set from `(alpha, m, theta)`, deriving `k`.
    pub fn from_theta(alpha: T, m: T, theta: T) -> Result<Self> {
        let alpha = positive("alpha", alpha)?;
        let m = positive("m", m)?;
        let theta = positive("theta", theta)?;
        let k = positive("k", (lit::<T>(2.0) * alpha * m * m / theta).sqrt())?;
        Self::new(alpha, m, k)
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn m(&self) -> T {
        self.m
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// Re-derives `θ` from the triple and checks that the stored value agrees.
    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        positive("m", self.m)?;
        positive("k", self.k)?;
        let theta = normal_level(self.alpha, self.m, self.k);
        if (theta - self.theta).abs() > lit::<T>(8.0) * T::epsilon() * theta {
            return Err(EscapeError::domain("theta", to_f64(self.theta), "inconsistent with (alpha, m, k)"));
        }
        Ok(())
    }

    /// `k/α`, the factor that turns `(2n+1)π` into `β_n`.
    pub fn vol_scale(&self) -> T {
        self.k / self.alpha
    }

    /// Maps variance `y` and time `t` to the scaled `(v, τ)`.
    pub fn scale(&self, y: T, t: T) -> Result<(T, T)> {
        if !(y >= T::zero()) || !y.is_finite() {
            return Err(EscapeError::domain("y", to_f64(y), "variance must be finite and >= 0"));
        }
        if !(t >= T::zero()) || !t.is_finite() {
            return Err(EscapeError::domain("t", to_f64(t), "time must be finite and >= 0"));
        }
        Ok((self.variance_to_v(y), self.alpha * t))
    }

    /// Inverse of [`ModelParams::scale`].
    pub fn unscale(&self, v: T, tau: T) -> Result<(T, T)> {
        if !(v >= T::zero()) || !v.is_finite() {
            return Err(EscapeError::domain("v", to_f64(v), "scaled volatility must be finite and >= 0"));
        }
        if !(tau >= T::zero()) || !tau.is_finite() {
            return Err(EscapeError::domain("tau", to_f64(tau), "scaled time must be finite and >= 0"));
        }
        Ok((v * self.k * self.k / (lit::<T>(2.0) * self.alpha), tau / self.alpha))
    }

    pub(crate) fn variance_to_v(&self, y: T) -> T {
        lit::<T>(2.0) * self.alpha / (self.k * self.k) * y
    }
}

fn normal_level<T: Scalar>(alpha: T, m: T, k: T) -> T {
    lit::<T>(2.0) * alpha * m * m / (k * k)
}

/// See [`ModelParams::new`].
pub fn make_params<T: Scalar>(alpha: T, m: T, k: T) -> Result<ModelParams<T>> {
    ModelParams::new(alpha, m, k)
}

/// See [`ModelParams::from_theta`].
pub fn params_from_theta<T: Scalar>(alpha: T, m: T, theta: T) -> Result<ModelParams<T>> {
    ModelParams::from_theta(alpha, m, theta)
}

/// See [`ModelParams::scale`].
pub fn scale<T: Scalar>(y: T, t: T, params: &ModelParams<T>) -> Result<(T, T)> {
    params.scale(y, t)
}

/// A point of the scaled escape problem: return `x` inside the interval of
/// width `span` centred at zero, scaled volatility `v` and scaled time `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPoint<T> {
    pub x: T,
    pub v: T,
    pub tau: T,
    pub span: T,
}

impl<T: Scalar> ScaledPoint<T> {
    pub fn new(x: T, v: T, tau: T, span: T) -> Result<Self> {
        let p = Self { x, v, tau, span };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_span_and_x(self.x, self.span)?;
        if !(self.v >= T::zero()) || !self.v.is_finite() {
            return Err(EscapeError::domain("v", to_f64(self.v), "must be finite and >= 0"));
        }
        if !(self.tau >= T::zero()) || self.tau.is_nan() {
            return Err(EscapeError::domain("tau", to_f64(self.tau), "must be >= 0"));
        }
        Ok(())
    }

    pub fn on_boundary(&self) -> bool {
        self.x.abs() >= self.span / lit(2.0)
    }
}

pub(crate) fn check_span_and_x<T: Scalar>(x: T, span: T) -> Result<()> {
    if !(span > T::zero()) || !span.is_finite() {
        return Err(EscapeError::domain("L", to_f64(span), "span must be finite and > 0"));
    }
    if !(x.abs() <= span / lit(2.0)) {
        return Err(EscapeError::domain("x", to_f64(x), "return must satisfy |x| <= L/2"));
    }
    Ok(())
}
