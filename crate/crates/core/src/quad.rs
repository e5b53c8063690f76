//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature.
//!
//! Every closed form in the crate that is not a pure series ends up here: the
//! per-mode mean exit time integrals, the Gamma averages, and the independent
//! quadrature routes the tests compare the series against.

use crate::error::{EscapeError, Result};
use crate::scalar::{lit, Scalar};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_971_632_248,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdivisions: usize,
}

impl<T: Scalar> QuadOptions<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_subdivisions: 400,
        }
    }

    pub fn relative(rel_tol: T) -> Self {
        Self::new(T::zero(), rel_tol)
    }
}

impl<T: Scalar> Default for QuadOptions<T> {
    fn default() -> Self {
        Self::relative(lit::<T>(1e-12).max(lit::<T>(64.0) * T::epsilon()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    magnitude: T,
}

fn kronrod21<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Panel<T> {
    let two = lit::<T>(2.0);
    let center = (a + b) / two;
    let half = (b - a) / two;
    let f_center = f(center);
    let mut kronrod = f_center * lit(WGK[10]);
    let mut gauss = T::zero();
    let mut magnitude = f_center.abs() * lit(WGK[10]);
    for (j, &x) in XGK.iter().take(10).enumerate() {
        let dx = half * lit(x);
        let lo = f(center - dx);
        let hi = f(center + dx);
        kronrod = kronrod + lit::<T>(WGK[j]) * (lo + hi);
        magnitude = magnitude + lit::<T>(WGK[j]) * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss = gauss + lit::<T>(WG[j / 2]) * (lo + hi);
        }
    }
    let value = kronrod * half;
    let magnitude = magnitude * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    // QUADPACK-style rescaling of the raw Gauss/Kronrod difference.
    if error > T::zero() && magnitude > T::zero() {
        let scaled = (lit::<T>(200.0) * error / magnitude).powf(lit(1.5));
        error = if scaled < T::one() {
            magnitude * scaled
        } else {
            magnitude
        }
        .min(error);
    }
    let floor = lit::<T>(50.0) * T::epsilon() * magnitude;
    Panel {
        a,
        b,
        value,
        error: error.max(floor),
        magnitude,
    }
}

fn target<T: Scalar>(opts: &QuadOptions<T>, value: T) -> T {
    opts.abs_tol.max(opts.rel_tol * value.abs())
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<T, F>(f: F, a: T, b: T, opts: QuadOptions<T>) -> Result<QuadResult<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    integrate_breakpoints(f, &[a, b], opts)
}

/// Integrates `f` over consecutive panels `[p0, p1], [p1, p2], ...`.
///
/// The breakpoints seed the subdivision, which is useful when the caller
/// knows where the integrand changes scale.
pub fn integrate_breakpoints<T, F>(
    mut f: F,
    points: &[T],
    opts: QuadOptions<T>,
) -> Result<QuadResult<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if points.len() < 2 {
        return Ok(QuadResult {
            value: T::zero(),
            abs_error: T::zero(),
            evaluations: 0,
        });
    }
    let mut panels: Vec<Panel<T>> = points
        .windows(2)
        .filter(|w| w[0] != w[1])
        .map(|w| kronrod21(&mut f, w[0], w[1]))
        .collect();
    let mut evaluations = 21 * panels.len();
    loop {
        let value = panels.iter().fold(T::zero(), |s, p| s + p.value);
        let error = panels.iter().fold(T::zero(), |s, p| s + p.error);
        let magnitude = panels.iter().fold(T::zero(), |s, p| s + p.magnitude);
        let roundoff = lit::<T>(50.0) * T::epsilon() * magnitude;
        if error <= target(&opts, value).max(roundoff) || !value.is_finite() {
            return Ok(QuadResult {
                value,
                abs_error: error,
                evaluations,
            });
        }
        if panels.len() >= opts.max_subdivisions {
            return Err(EscapeError::NonConvergence {
                what: "adaptive quadrature",
                iterations: panels.len(),
                estimate: crate::scalar::to_f64(error),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = (p.a + p.b) / lit(2.0);
        if mid <= p.a.min(p.b) || mid >= p.a.max(p.b) {
            // Panel is at floating-point resolution; keep it as final.
            panels.push(Panel {
                error: T::zero(),
                ..p
            });
            continue;
        }
        panels.push(kronrod21(&mut f, p.a, mid));
        panels.push(kronrod21(&mut f, mid, p.b));
        evaluations += 42;
    }
}

/// Integrates a non-negative integrand over `[0, ∞)` on doubling panels
/// `[0, h], [h, 2h], [2h, 4h], ...`, stopping once several consecutive
/// panels contribute less than the relative tolerance.
pub fn integrate_to_infinity<T, F>(mut f: F, first_panel: T, opts: QuadOptions<T>) -> Result<QuadResult<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let mut total = T::zero();
    let mut error = T::zero();
    let mut evaluations = 0;
    let mut lo = T::zero();
    let mut hi = first_panel;
    let mut quiet = 0;
    for _ in 0..2000 {
        let panel = integrate(&mut f, lo, hi, opts)?;
        total = total + panel.value;
        error = error + panel.abs_error;
        evaluations += panel.evaluations;
        if panel.value.abs() <= opts.rel_tol * lit::<T>(1e-3) * total.abs() + opts.abs_tol {
            quiet += 1;
            if quiet >= 4 {
                return Ok(QuadResult {
                    value: total,
                    abs_error: error,
                    evaluations,
                });
            }
        } else {
            quiet = 0;
        }
        lo = hi;
        hi = hi + hi;
        if !hi.is_finite() {
            break;
        }
    }
    Err(EscapeError::NonConvergence {
        what: "semi-infinite quadrature",
        iterations: evaluations,
        estimate: crate::scalar::to_f64(error),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rule_is_exact_for_high_degree_polynomials() {
        // Kronrod 21 integrates degree 31 exactly; one panel, no subdivision.
        let mut count = 0;
        let p = kronrod21(
            &mut |x: f64| {
                count += 1;
                x.powi(30) + 3.0 * x.powi(7)
            },
            -1.0,
            1.0,
        );
        assert_eq!(count, 21);
        assert_relative_eq!(p.value, 2.0 / 31.0, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions::relative(1e-10)).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn breakpoints_capture_narrow_peak() {
        let f = |x: f64| (-((x - 0.7) / 1e-4).powi(2)).exp();
        let exact = 1e-4 * std::f64::consts::PI.sqrt();
        let r = integrate_breakpoints(f, &[0.0, 0.7 - 1e-3, 0.7 + 1e-3, 1.0], QuadOptions::relative(1e-12)).unwrap();
        assert_relative_eq!(r.value, exact, max_relative = 1e-10);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|t: f64| (-3.0 * t).exp(), 1e-3, QuadOptions::relative(1e-12)).unwrap();
        assert_relative_eq!(r.value, 1.0 / 3.0, max_relative = 1e-11);
    }

    #[test]
    fn works_in_single_precision() {
        let r = integrate(|x: f32| x.cos(), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - 1f32.sin()).abs() < 1e-6);
    }
}
