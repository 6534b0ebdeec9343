//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use crate::error::{Error, Result};
use crate::scalar::Real;

// Node and weight tables are kept to the published digits.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Hard cap on the number of live subintervals.
const MAX_INTERVALS: usize = 20_000;

/// Quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec<T> {
    pub rel_tol: T,
    /// Absolute error target in integrand units. Zero means relative-only.
    pub abs_tol: T,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
    /// Intensity cutoff (fraction of peak) used to truncate infinite domains.
    pub truncation_eps: T,
}

impl<T: Real> Default for QuadSpec<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-9),
            abs_tol: T::zero(),
            max_depth: 48,
            truncation_eps: T::lit(1e-12),
        }
    }
}

impl<T: Real> QuadSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) {
            return Err(Error::invalid("quad.rel_tol", "must be positive"));
        }
        if !(self.abs_tol >= T::zero()) {
            return Err(Error::invalid("quad.abs_tol", "must be non-negative"));
        }
        if self.max_depth < 1 {
            return Err(Error::invalid("quad.max_depth", "must be at least 1"));
        }
        if !(self.truncation_eps > T::zero() && self.truncation_eps < T::one()) {
            return Err(Error::invalid("quad.truncation_eps", "must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn with_rel_tol(self, rel_tol: T) -> Self {
        Self { rel_tol, ..self }
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    resabs: T,
    depth: u32,
}

fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T, depth: u32) -> Panel<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let abs_half = half_len.abs();
    let fc = f(center);
    let mut res_g = fc * T::lit(WG[3]);
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        res_k = res_k + w * (f1 + f2);
        res_abs = res_abs + w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half_len;
    res_abs = res_abs * abs_half;
    res_asc = res_asc * abs_half;
    let mut error = ((res_k - res_g) * half_len).abs();
    if res_asc != T::zero() && error != T::zero() {
        let scale = (T::lit(200.0) * error / res_asc).powf(T::lit(1.5));
        error = res_asc * scale.min(T::one());
    }
    let eps50 = T::lit(50.0) * T::epsilon();
    if res_abs > T::min_positive_value() / eps50 {
        error = error.max(eps50 * res_abs);
    }
    Panel {
        a,
        b,
        value,
        error,
        resabs: res_abs,
        depth,
    }
}

fn tolerance<T: Real>(spec: &QuadSpec<T>, value: T, resabs: T) -> T {
    let roundoff = T::lit(100.0) * T::epsilon() * resabs;
    spec.abs_tol.max(spec.rel_tol * value.abs()).max(roundoff)
}

fn totals<T: Real>(panels: &[Panel<T>]) -> (T, T, T) {
    panels
        .iter()
        .fold((T::zero(), T::zero(), T::zero()), |(v, e, r), p| {
            (v + p.value, e + p.error, r + p.resabs)
        })
}

/// Integrates `f` over `[a, b]`.
pub fn integrate_1d<T: Real, F: FnMut(T) -> T>(
    f: F,
    a: T,
    b: T,
    spec: &QuadSpec<T>,
) -> Result<Estimate<T>> {
    integrate_with_breaks(f, &[a, b], spec)
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, seeding the adaptive
/// subdivision with the given (sorted) breakpoints. Refinement is global: the
/// panel with the largest error estimate is bisected first.
pub fn integrate_with_breaks<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    breaks: &[T],
    spec: &QuadSpec<T>,
) -> Result<Estimate<T>> {
    if breaks.len() < 2 {
        return Err(Error::invalid("quad.breaks", "need at least two endpoints"));
    }
    if breaks.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid(
            "quad.breaks",
            "endpoints must be sorted and finite",
        ));
    }
    let mut panels: Vec<Panel<T>> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(&mut f, w[0], w[1], 0))
        .collect();
    if panels.is_empty() {
        return Ok(Estimate {
            value: T::zero(),
            error: T::zero(),
        });
    }
    loop {
        let (value, error, resabs) = totals(&panels);
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature {
                estimate: value.to_f64_lossy(),
                error: error.to_f64_lossy(),
                requested: tolerance(spec, value, resabs).to_f64_lossy(),
            });
        }
        let tol = tolerance(spec, value, resabs);
        if error <= tol {
            return Ok(Estimate { value, error });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0usize, -T::one()), |(bi, be), (i, p)| {
                if p.error > be {
                    (i, p.error)
                } else {
                    (bi, be)
                }
            });
        let p = panels[worst];
        let mid = T::lit(0.5) * (p.a + p.b);
        if p.depth >= spec.max_depth || panels.len() >= MAX_INTERVALS || !(mid > p.a && mid < p.b) {
            return Err(Error::Quadrature {
                estimate: value.to_f64_lossy(),
                error: error.to_f64_lossy(),
                requested: tol.to_f64_lossy(),
            });
        }
        panels[worst] = kronrod(&mut f, p.a, mid, p.depth + 1);
        panels.push(kronrod(&mut f, mid, p.b, p.depth + 1));
    }
}

/// Breakpoints from `a` to `b` spaced by half periods of `cos(omega x)` when the
/// interval holds more than five periods; otherwise just the endpoints.
pub fn oscillation_breaks<T: Real>(a: T, b: T, omega: T) -> Vec<T> {
    let span = b - a;
    let omega = omega.abs();
    if !(span > T::zero()) || !(omega * span > T::lit(10.0) * T::PI()) {
        return vec![a, b];
    }
    let pieces = (omega * span / T::PI()).ceil();
    let n = pieces.to_usize().unwrap_or(1).max(1);
    let h = span / T::from_usize_lossy(n);
    let mut out: Vec<T> = (0..n).map(|i| a + h * T::from_usize_lossy(i)).collect();
    out.push(b);
    out
}

/// Merges extra breakpoints lying strictly inside `[a, b]` into a sorted list.
pub fn with_interior_points<T: Real>(a: T, b: T, points: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut out = vec![a, b];
    out.extend(points.into_iter().filter(|&x| x > a && x < b));
    out.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    out.dedup();
    out
}

/// `∫_a^b dx ∫ dy f(x, y)` where the inner domain (possibly a truncated infinite
/// range) is given per outer point by `inner_breaks(x)`. An empty inner list
/// contributes zero. Inner errors compose into the outer bound conservatively
/// as `(b - a) * max inner error`.
pub fn integrate_2d_nested<T, F, B>(
    f: F,
    outer: (T, T),
    inner_breaks: B,
    spec: &QuadSpec<T>,
) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(T, T) -> T,
    B: Fn(T) -> Vec<T>,
{
    integrate_2d_nested_with_breaks(f, &[outer.0, outer.1], inner_breaks, spec)
}

/// As [`integrate_2d_nested`] with outer breakpoints.
pub fn integrate_2d_nested_with_breaks<T, F, B>(
    f: F,
    outer_breaks: &[T],
    inner_breaks: B,
    spec: &QuadSpec<T>,
) -> Result<Estimate<T>>
where
    T: Real,
    F: Fn(T, T) -> T,
    B: Fn(T) -> Vec<T>,
{
    let mut worst_inner = T::zero();
    let mut failure: Option<Error> = None;
    let outer = integrate_with_breaks(
        |x| {
            if failure.is_some() {
                return T::zero();
            }
            let breaks = inner_breaks(x);
            if breaks.len() < 2 {
                return T::zero();
            }
            match integrate_with_breaks(|y| f(x, y), &breaks, spec) {
                Ok(est) => {
                    worst_inner = worst_inner.max(est.error);
                    est.value
                }
                Err(e) => {
                    failure = Some(e);
                    T::zero()
                }
            }
        },
        outer_breaks,
        spec,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let outer = outer?;
    let span = match (outer_breaks.first(), outer_breaks.last()) {
        (Some(&a), Some(&b)) => b - a,
        _ => T::zero(),
    };
    Ok(Estimate {
        value: outer.value,
        error: outer.error + span.abs() * worst_inner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn spec() -> QuadSpec<f64> {
        QuadSpec::default()
    }

    #[test]
    fn sine_half_period() {
        let r = integrate_1d(f64::sin, 0.0, PI, &spec()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.error <= 1e-9 * 2.0);
    }

    #[test]
    fn constant_kernel_integrand() {
        // (x - t)/(x - y t) with y = 1 is identically one
        let x = 2.5e-12;
        let r = integrate_1d(
            |t: f64| if t == x { 1.0 } else { (x - t) / (x - t) },
            0.0,
            x,
            &spec(),
        )
        .unwrap();
        assert!((r.value - x).abs() < 1e-12 * x);
    }

    #[test]
    fn truncated_gaussian() {
        let tau = 1e-13f64;
        let eps = spec().truncation_eps;
        let w = tau * (-eps.ln()).sqrt();
        let r = integrate_1d(|t: f64| (-(t * t) / (tau * tau)).exp(), -w, w, &spec()).unwrap();
        assert!((r.value - tau * PI.sqrt()).abs() < 1e-9 * tau * PI.sqrt());
    }

    #[test]
    fn empty_and_degenerate_intervals() {
        assert_eq!(
            integrate_1d(f64::cos, 1.0, 1.0, &spec()).unwrap().value,
            0.0
        );
        assert!(integrate_with_breaks(f64::cos, &[1.0], &spec()).is_err());
        assert!(integrate_with_breaks(f64::cos, &[1.0, 0.0], &spec()).is_err());
    }

    #[test]
    fn depth_exhaustion_reports_estimate() {
        let shallow = QuadSpec {
            max_depth: 1,
            rel_tol: 1e-14,
            ..spec()
        };
        let err = integrate_1d(|x: f64| (50.0 * x).sin().abs(), 0.0, 3.0, &shallow).unwrap_err();
        match err {
            Error::Quadrature { estimate, .. } => assert!(estimate > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn oscillatory_presplit() {
        let b = oscillation_breaks(0.0, 10.0, 50.0);
        assert!(b.len() > 100);
        assert_eq!((b[0], *b.last().unwrap()), (0.0, 10.0));
        assert_eq!(oscillation_breaks(0.0, 1.0, 1.0), vec![0.0, 1.0]);
        let r = integrate_with_breaks(|t: f64| (50.0 * t).cos(), &b, &spec()).unwrap();
        assert!((r.value - (500.0f64).sin() / 50.0).abs() < 1e-12);
    }

    #[test]
    fn separable_2d() {
        let (ta, tb) = (1e-13f64, 0.4e-13f64);
        let g = |t: f64, s: f64| (-(t / s).powi(2)).exp();
        let wa = 6.0 * ta;
        let wb = 6.0 * tb;
        let r = integrate_2d_nested(
            |x, y| g(x, ta) * g(y, tb),
            (-wa, wa),
            |_| vec![-wb, wb],
            &spec(),
        )
        .unwrap();
        let ia = integrate_1d(|x| g(x, ta), -wa, wa, &spec()).unwrap().value;
        let ib = integrate_1d(|y| g(y, tb), -wb, wb, &spec()).unwrap().value;
        assert!((r.value - ia * ib).abs() < 1e-9 * ia * ib);
    }

    #[test]
    fn unit_square_and_zero_width() {
        let one =
            integrate_2d_nested(|_, _| 1.0f64, (0.0, 1.0), |_| vec![0.0, 1.0], &spec()).unwrap();
        assert!((one.value - 1.0).abs() < 1e-14);
        let zero =
            integrate_2d_nested(|_, _| 1.0f64, (0.5, 0.5), |_| vec![0.0, 1.0], &spec()).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn f32_converges_at_its_precision() {
        let r = integrate_1d(
            |x: f32| x.sin(),
            0.0,
            std::f32::consts::PI,
            &QuadSpec::default(),
        )
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-5);
    }

    fn poly(c: &[f64], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    proptest! {
        #[test]
        fn linearity_and_additivity(
            c1 in prop::collection::vec(-5.0f64..5.0, 1..8),
            c2 in prop::collection::vec(-5.0f64..5.0, 1..8),
            a in -2.0f64..0.0, m in 0.0f64..1.0, b in 1.0f64..3.0,
            s in -3.0f64..3.0,
        ) {
            let q = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| integrate_1d(f, lo, hi, &spec()).unwrap().value;
            let whole = q(&|x| s * poly(&c1, x) + poly(&c2, x), a, b);
            let parts = s * q(&|x| poly(&c1, x), a, b) + q(&|x| poly(&c2, x), a, b);
            let scale = 1.0 + q(&|x| s.abs() * poly(&c1, x).abs() + poly(&c2, x).abs(), a, b);
            prop_assert!((whole - parts).abs() <= 1e-12 * scale);
            let split = q(&|x| poly(&c1, x), a, m) + q(&|x| poly(&c1, x), m, b);
            prop_assert!((split - q(&|x| poly(&c1, x), a, b)).abs() <= 1e-12 * scale);
        }
    }
}
