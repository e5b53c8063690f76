//! Exact escape statistics of the Heston stochastic-volatility model out of a
//! symmetric return interval `[-L/2, L/2]`.
//!
//! The library works in the scaled variables `τ = αt`, `v = (2α/k²)y`, where the
//! volatility dynamics depend on the single parameter `θ = 2αm²/k²`. Every
//! evaluator is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`.
//!
//! ```
//! use heston_escape::{met_return, Control, Params};
//!
//! let params = Params::from_theta(0.045, 0.093, 1.25).unwrap();
//! let t = met_return(0.0, 0.01, &params, &Control::default()).unwrap();
//! assert!(t.value > 0.0);
//! ```

pub mod averaged;
pub mod baseline;
pub mod error;
pub mod escape2d;
pub mod modal;
pub mod model;
pub mod quad;
pub mod scalar;
pub mod series;
pub mod specfun;

pub use averaged::{
    gamma_average, linear_fit, met_return, met_return_large_span_check, met_return_small_span,
    met_return_small_span_with_threshold, small_span_n1, small_span_n2, small_span_threshold, stationary_density,
    survival_return, survival_return_longtime, survival_return_shorttime, LinearFit, SpanScalingReport, ThetaRegime,
};
pub use baseline::{met_wiener, survival_wiener, WienerParams};
pub use error::{EscapeError, Result};
pub use escape2d::{
    escape_density, met_2d, met_2d_large_vol, met_2d_zero_vol, survival_2d, survival_2d_longtime,
    survival_2d_shorttime, SurvivalResult,
};
pub use modal::{mode_coeffs, riccati_a, riccati_a_b_derivatives, riccati_b, ModeCoefficients};
pub use model::{make_params, params_from_theta, scale, ModelParams, ScaledPoint};
pub use scalar::Scalar;
pub use series::{SeriesControl, SeriesSum};
pub use specfun::{gauss_2f1, gauss_2f1_linear_transform, ln_gamma};

pub type Params = ModelParams<f64>;
pub type Point = ScaledPoint<f64>;
pub type Control = SeriesControl<f64>;
pub type Modes = ModeCoefficients<f64>;
pub type Sum = SeriesSum<f64>;
pub type Wiener = WienerParams<f64>;
