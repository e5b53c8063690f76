use approx::assert_relative_eq;
use heston_escape::{
    met_2d, met_return, met_wiener, survival_2d, survival_return, survival_wiener, Control, Params, Point,
    ScaledPoint, SeriesControl, ModelParams, Wiener,
};
use proptest::prelude::*;

fn params(theta: f64) -> Params {
    Params::from_theta(0.045, 0.093, theta).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn survival_is_even_bounded_and_decreasing(
        xf in 0.0f64..0.5, v in 0.0f64..20.0, tau in 1e-4f64..1.0, theta in 0.2f64..3.0, span in 1e-3f64..1.0,
    ) {
        let (p, ctrl) = (params(theta), Control::default());
        let x = xf * span;
        let s = |x: f64, tau: f64| survival_2d(&Point::new(x, v, tau, span).unwrap(), &p, &ctrl).unwrap().value;
        let (here, mirror, later) = (s(x, tau), s(-x, tau), s(x, 2.0 * tau));
        prop_assert!((0.0..=1.0).contains(&here));
        prop_assert!((here - mirror).abs() <= 1e-12);
        // Truncation noise is bounded by the series tolerance.
        prop_assert!(later <= here + 1e-9);
    }

    #[test]
    fn joint_met_falls_with_volatility(xf in -0.45f64..0.45, v in 0.0f64..50.0, theta in 0.3f64..2.0) {
        let (p, ctrl, span) = (params(theta), Control::default(), 0.01);
        let lo = met_2d(xf * span, v, span, &p, &ctrl).unwrap().value;
        let hi = met_2d(xf * span, 2.0 * v + 0.1, span, &p, &ctrl).unwrap().value;
        prop_assert!(hi < lo);
    }

    #[test]
    fn averaged_survival_decreases_in_time(xf in -0.45f64..0.45, tau in 1e-4f64..0.5, theta in 0.3f64..2.0) {
        let (p, ctrl, span) = (params(theta), Control::default(), 0.05);
        let a = survival_return(xf * span, tau, span, &p, &ctrl).unwrap().value;
        let b = survival_return(xf * span, 1.5 * tau, span, &p, &ctrl).unwrap().value;
        prop_assert!(b <= a + 1e-12 && (0.0..=1.0).contains(&a));
    }
}

#[test]
fn met_peaks_at_centre_and_vanishes_at_edges() {
    let (p, ctrl, span) = (params(1.25), Control::default(), 0.01);
    let centre = met_return(0.0, span, &p, &ctrl).unwrap().value;
    for xf in [0.1, 0.25, 0.4] {
        assert!(met_return(xf * span, span, &p, &ctrl).unwrap().value < centre);
    }
    assert_eq!(met_return(span / 2.0, span, &p, &ctrl).unwrap().value, 0.0);
}

#[test]
fn wiener_limit_of_weak_vol_of_vol() {
    // θ → ∞ at fixed m freezes the variance at m², so the Heston results
    // collapse onto constant volatility σ = m.
    let (p, ctrl, span) = (params(1e5), Control::default(), 0.01);
    let w = Wiener::new(0.093).unwrap();
    for x in [0.0, 0.002, -0.004] {
        let heston = met_return(x, span, &p, &ctrl).unwrap().value;
        assert_relative_eq!(heston, met_wiener(x, span, &w).unwrap(), max_relative = 1e-3);
        let t_days = 0.2 * met_wiener(0.0, span, &w).unwrap();
        let s = survival_return(x, 0.045 * t_days, span, &p, &ctrl).unwrap().value;
        let s0 = survival_wiener(x, t_days, span, &w, &ctrl).unwrap().value;
        assert_relative_eq!(s, s0, max_relative = 1e-2);
    }
}

#[test]
fn heston_outlives_wiener_at_short_span() {
    // Volatility fluctuations let some paths linger near v = 0.
    let (p, ctrl, span) = (params(1.25), Control::default(), 0.01);
    let w = Wiener::new(0.093).unwrap();
    assert!(met_return(0.0, span, &p, &ctrl).unwrap().value > met_wiener(0.0, span, &w).unwrap());
}

#[test]
fn single_precision_agrees_with_double() {
    let p32 = ModelParams::<f32>::from_theta(0.045, 0.093, 1.25).unwrap();
    let ctrl32 = SeriesControl::<f32>::new(256, 1e-5, 3).unwrap();
    let q32 = ScaledPoint::<f32>::new(0.001, 1.0, 0.01, 0.01).unwrap();
    let s32 = survival_2d(&q32, &p32, &ctrl32).unwrap().value;
    let s64 = survival_2d(&Point::new(0.001, 1.0, 0.01, 0.01).unwrap(), &params(1.25), &Control::default()).unwrap().value;
    assert!((s32 as f64 - s64).abs() < 1e-4, "{s32} vs {s64}");
    let t32 = met_return(0.0f32, 0.01, &p32, &ctrl32).unwrap().value;
    let t64 = met_return(0.0, 0.01, &params(1.25), &Control::default()).unwrap().value;
    assert_relative_eq!(t32 as f64, t64, max_relative = 1e-3);
}

#[test]
fn large_span_offset() {
    // Past the crossover the averaged MET is the outer solution plus 1/(αθ).
    let ctrl = Control::default();
    for theta in [0.5, 1.0, 2.0] {
        let p = params(theta);
        let span: f64 = 200.0;
        let t = met_return(0.0, span, &p, &ctrl).unwrap().value;
        let outer = (span / 2.0).powi(2) / (0.093f64 * 0.093);
        assert_relative_eq!(t - outer, 1.0 / (0.045 * theta), max_relative = 1e-4);
    }
}
