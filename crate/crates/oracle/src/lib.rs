//! Monte-Carlo simulation of the Heston return/variance pair with absorbing
//! barriers at `x = ±L/2`.
//!
//! The variance runs in scaled units, `dv = (θ - v)dτ + √(2v) dW₂`, discretised by
//! full-truncation Euler. Over one variance step the return is a Brownian motion
//! with frozen variance rate `(k/α)² v⁺/2` per unit `τ`; it is advanced in
//! sub-steps fine enough to resolve the interval, with a Brownian-bridge test
//! for crossings between sub-step end points.
//!
//! Every path draws from its own ChaCha stream keyed by the path index, so
//! results do not depend on how paths are spread over threads.

use std::io::Write;

use heston_escape::{ModelParams, WienerParams};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("`{field}` = {value} is invalid: {reason}")]
    Config {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error(transparent)]
    Model(#[from] heston_escape::EscapeError),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, McError>;

fn invalid(field: &'static str, value: f64, reason: &'static str) -> McError {
    McError::Config { field, value, reason }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    FullTruncationEuler,
}

/// Initial scaled volatility of every path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum V0Mode {
    Fixed(f64),
    GammaStationary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    /// Variance step in scaled time.
    pub dt: f64,
    /// Paths still inside at this scaled time are censored.
    pub horizon: f64,
    pub seed: u64,
    pub scheme: Scheme,
    pub v0_mode: V0Mode,
    /// Return variance per sub-step as a fraction of `(L/2)²`.
    pub x_resolution: f64,
    /// Multiplies the simulated return volatility; `1` simulates the model.
    pub return_vol_factor: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            dt: 1e-4,
            horizon: 50.0,
            seed: 0x5EED,
            scheme: Scheme::FullTruncationEuler,
            v0_mode: V0Mode::GammaStationary,
            x_resolution: 5e-4,
            return_vol_factor: 1.0,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 1 {
            return Err(invalid("n_paths", self.n_paths as f64, "need at least one path"));
        }
        if !(self.dt > 0.0 && self.dt <= 1e-2) {
            return Err(invalid("dt", self.dt, "must lie in (0, 1e-2]"));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(invalid("horizon", self.horizon, "must be finite and > 0"));
        }
        if !(self.x_resolution > 0.0 && self.x_resolution <= 1.0) {
            return Err(invalid("x_resolution", self.x_resolution, "must lie in (0, 1]"));
        }
        if !(self.return_vol_factor > 0.0) || !self.return_vol_factor.is_finite() {
            return Err(invalid("return_vol_factor", self.return_vol_factor, "must be finite and > 0"));
        }
        if let V0Mode::Fixed(v) = self.v0_mode {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid("v0", v, "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

/// Exit time of one path in scaled units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitSample {
    pub path_index: usize,
    pub exit_tau: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_effective: usize,
    pub censored_fraction: f64,
    /// Set when censoring is frequent enough to bias a mean low.
    pub biased_low: bool,
}

impl McEstimate {
    /// `(estimate - reference) / std_error`; zero when both agree exactly.
    pub fn z_score(&self, reference: f64) -> f64 {
        let gap = self.mean - reference;
        if gap == 0.0 {
            0.0
        } else if self.std_error == 0.0 {
            f64::INFINITY.copysign(gap)
        } else {
            gap / self.std_error
        }
    }
}

/// z-score of an observed fraction against probability `p`, with the
/// binomial standard error of `p` itself.
pub fn binomial_z(estimate: &McEstimate, p: f64) -> f64 {
    let gap = estimate.mean - p;
    let sd = (p * (1.0 - p) / estimate.n_effective as f64).sqrt();
    if gap == 0.0 {
        0.0
    } else if sd == 0.0 {
        f64::INFINITY.copysign(gap)
    } else {
        gap / sd
    }
}

/// Draws from `v^{θ-1} e^{-v} / Γ(θ)`.
pub fn sample_gamma_stationary<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> Result<f64> {
    let g = Gamma::new(theta, 1.0).map_err(|_| invalid("theta", theta, "must be finite and > 0"))?;
    Ok(g.sample(rng).max(0.0))
}

/// One full-truncation Euler step of `dv = (θ - v)dτ + √(2v) dW`, returning the
/// raw (possibly negative) next state.
pub fn variance_step(v: f64, theta: f64, dt: f64, z: f64) -> f64 {
    let vp = v.max(0.0);
    v + (theta - vp) * dt + (2.0 * vp * dt).sqrt() * z
}

/// Probability that a Brownian bridge from `a` to `b` with variance `var` leaves
/// `(-h, h)`, summing the two single-barrier terms.
fn bridge_exit_probability(a: f64, b: f64, h: f64, var: f64) -> f64 {
    if var <= 0.0 {
        return 0.0;
    }
    let upper = (-2.0 * (h - a) * (h - b) / var).exp();
    let lower = (-2.0 * (a + h) * (b + h) / var).exp();
    (upper + lower).min(1.0)
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

struct PathModel {
    half: f64,
    theta: f64,
    /// Return variance per unit `τ` per unit `v`.
    x_rate: f64,
    /// Return variance per sub-step.
    sub_var: f64,
}

fn simulate_path(x0: f64, model: &PathModel, cfg: &McConfig, index: usize) -> Result<ExitSample> {
    let mut rng = path_rng(cfg.seed, index);
    let mut v = match cfg.v0_mode {
        V0Mode::Fixed(v) => v,
        V0Mode::GammaStationary => sample_gamma_stationary(model.theta, &mut rng)?,
    };
    let mut x = x0;
    if x.abs() >= model.half {
        return Ok(ExitSample {
            path_index: index,
            exit_tau: 0.0,
            censored: false,
        });
    }
    let mut tau = 0.0;
    while tau < cfg.horizon {
        let dt = cfg.dt.min(cfg.horizon - tau);
        let step_var = model.x_rate * v.max(0.0) * dt;
        if step_var > 0.0 {
            let n_sub = (step_var / model.sub_var).ceil().max(1.0);
            let var = step_var / n_sub;
            let sd = var.sqrt();
            let h = dt / n_sub;
            for j in 0..n_sub as usize {
                let z: f64 = rng.sample(StandardNormal);
                let next = x + sd * z;
                let u: f64 = rng.gen();
                if next.abs() >= model.half || u < bridge_exit_probability(x, next, model.half, var) {
                    return Ok(ExitSample {
                        path_index: index,
                        exit_tau: tau + (j as f64 + 0.5) * h,
                        censored: false,
                    });
                }
                x = next;
            }
        }
        let z: f64 = rng.sample(StandardNormal);
        v = variance_step(v, model.theta, dt, z);
        tau += dt;
    }
    Ok(ExitSample {
        path_index: index,
        exit_tau: cfg.horizon,
        censored: true,
    })
}

/// Simulates `cfg.n_paths` independent paths started at `(x0, v0)`, returned
/// in path-index order.
pub fn simulate_exit_times(x0: f64, span: f64, params: &ModelParams<f64>, cfg: &McConfig) -> Result<Vec<ExitSample>> {
    cfg.validate()?;
    params.validate()?;
    if !(span > 0.0) || !span.is_finite() {
        return Err(invalid("L", span, "span must be finite and > 0"));
    }
    let half = span / 2.0;
    if !(x0.abs() <= half) {
        return Err(invalid("x0", x0, "must satisfy |x0| <= L/2"));
    }
    let vol = params.vol_scale() * cfg.return_vol_factor;
    let model = PathModel {
        half,
        theta: params.theta(),
        x_rate: vol * vol / 2.0,
        sub_var: cfg.x_resolution * half * half,
    };
    (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| simulate_path(x0, &model, cfg, i))
        .collect()
}

/// Fraction of paths still inside at `tau_eval`.
pub fn mc_survival(x0: f64, tau_eval: f64, span: f64, params: &ModelParams<f64>, cfg: &McConfig) -> Result<McEstimate> {
    if !(tau_eval >= 0.0 && tau_eval <= cfg.horizon) {
        return Err(invalid("tau_eval", tau_eval, "must lie in [0, horizon]"));
    }
    let samples = simulate_exit_times(x0, span, params, cfg)?;
    Ok(survival_from_samples(&samples, tau_eval))
}

pub fn survival_from_samples(samples: &[ExitSample], tau_eval: f64) -> McEstimate {
    let n = samples.len();
    let alive = samples.iter().filter(|s| s.censored || s.exit_tau > tau_eval).count();
    let censored = samples.iter().filter(|s| s.censored).count();
    let p = alive as f64 / n as f64;
    McEstimate {
        mean: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
        n_effective: n,
        censored_fraction: censored as f64 / n as f64,
        biased_low: false,
    }
}

/// Mean exit time in original time units (scaled time divided by `α`).
pub fn mc_met(x0: f64, span: f64, params: &ModelParams<f64>, cfg: &McConfig) -> Result<McEstimate> {
    let samples = simulate_exit_times(x0, span, params, cfg)?;
    Ok(met_from_samples(&samples, params.alpha()))
}

pub fn met_from_samples(samples: &[ExitSample], alpha: f64) -> McEstimate {
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.exit_tau).sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|s| (s.exit_tau - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let censored_fraction = samples.iter().filter(|s| s.censored).count() as f64 / n;
    McEstimate {
        mean: mean / alpha,
        std_error: (var / n).sqrt() / alpha,
        n_effective: samples.len(),
        censored_fraction,
        biased_low: censored_fraction >= 1e-3,
    }
}

/// Writes `path_index,exit_tau,censored` rows.
pub fn write_samples_csv<W: Write>(samples: &[ExitSample], mut out: W) -> Result<()> {
    let io = |e: std::io::Error| McError::Io(e.to_string());
    writeln!(out, "path_index,exit_tau,censored").map_err(io)?;
    for s in samples {
        writeln!(out, "{},{:.16e},{}", s.path_index, s.exit_tau, u8::from(s.censored)).map_err(io)?;
    }
    Ok(())
}

/// Wiener reference in the oracle's units: mean exit time `((L/2)² - x²)/σ²`.
pub fn wiener_met(x0: f64, span: f64, sigma: f64) -> Result<f64> {
    let w = WienerParams::new(sigma)?;
    Ok(heston_escape::met_wiener(x0, span, &w)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_probability_limits() {
        assert_eq!(bridge_exit_probability(0.0, 0.0, 1.0, 0.0), 0.0);
        assert!(bridge_exit_probability(0.0, 0.0, 1.0, 1e-4) < 1e-100);
        assert!((bridge_exit_probability(0.999_999, 0.999_999, 1.0, 1.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn variance_step_lower_bound() {
        let (theta, dt) = (0.5, 1e-3);
        for i in 0..200 {
            let z = -4.0 + i as f64 * 0.04;
            for &v in &[0.0, 1e-4, 1e-3, 0.1, 1.0] {
                let next = variance_step(v, theta, dt, z);
                assert!(next >= (theta - z * z / (2.0 * (1.0 - dt))) * dt - 1e-15);
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::default().validate().is_ok());
        let bad = McConfig { dt: 0.1, ..McConfig::default() };
        assert!(bad.validate().is_err());
        let bad = McConfig { n_paths: 0, ..McConfig::default() };
        assert!(bad.validate().is_err());
        let bad = McConfig { v0_mode: V0Mode::Fixed(-1.0), ..McConfig::default() };
        assert!(bad.validate().is_err());
    }
}
