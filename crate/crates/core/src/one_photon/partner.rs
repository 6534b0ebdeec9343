//! Spectrum of one down-converted field expressed through its partner's.

use rayon::prelude::*;

use super::{Provenance, SpectrumCurve};
use crate::error::{Error, Result};
use crate::model::CrystalParams;
use crate::numerics::{integrate_with_breaks, oscillation_breaks, QuadSpec};
use crate::scalar::Real;

/// Kernel `p_{x,y}(nu) = (1/(pi y)) ∫_0^x (x - t)/(x - y t) cos(nu t) dt`.
///
/// `x` in seconds, `0 < |y| <= 1`.
pub fn cross_kernel_p<T: Real>(x: T, y: T, nu: T, spec: &QuadSpec<T>) -> Result<T> {
    if !(x.is_finite() && x > T::zero()) {
        return Err(Error::invalid("kernel.x", "must be finite and positive"));
    }
    if y == T::zero() {
        return Err(Error::DegenerateGeometry(
            "kernel with y = 0 (D_p2 = 0) is undefined".into(),
        ));
    }
    if !(y.abs() <= T::one()) {
        return Err(Error::Domain(format!(
            "kernel requires |y| <= 1, got {y:e}; swap the field labels"
        )));
    }
    let weight = |t: T| {
        if y == T::one() {
            T::one()
        } else {
            (x - t) / (x - y * t)
        }
    };
    let breaks = oscillation_breaks(T::zero(), x, nu);
    let est = integrate_with_breaks(|t| weight(t) * (nu * t).cos(), &breaks, spec)?;
    Ok(est.value / (T::PI() * y))
}

/// Even function tabulated on `[0, max]` with cubic (Catmull-Rom) interpolation.
struct EvenTable<T> {
    step: T,
    values: Vec<T>,
}

impl<T: Real> EvenTable<T> {
    fn at(&self, x: T) -> T {
        let pos = x.abs() / self.step;
        let i = pos.floor().to_usize().unwrap_or(usize::MAX);
        if i + 2 >= self.values.len() {
            return T::zero();
        }
        let f = pos - T::from_usize_lossy(i);
        let p0 = if i == 0 {
            self.values[1]
        } else {
            self.values[i - 1]
        };
        let (p1, p2, p3) = (self.values[i], self.values[i + 1], self.values[i + 2]);
        let half = T::lit(0.5);
        let a = half * (-p0 + T::lit(3.0) * p1 - T::lit(3.0) * p2 + p3);
        let b = half * (T::lit(2.0) * p0 - T::lit(5.0) * p1 + T::lit(4.0) * p2 - p3);
        let c = half * (p2 - p0);
        ((a * f + b) * f + c) * f + p1
    }
}

/// Continuation of a sampled spectrum past its grid by the phase-matching
/// tail `S ~ A / nu^2`, with `A` matched to the outermost samples on each side.
struct SpectrumTail<T> {
    lo: T,
    hi: T,
    a_lo: T,
    a_hi: T,
}

impl<T: Real> SpectrumTail<T> {
    fn fit(s: &SpectrumCurve<T>) -> Self {
        let (grid, v) = (s.grid(), s.values());
        let n = v.len();
        let k = (n / 50).max(1);
        let amp = |range: std::ops::Range<usize>, outward: bool| {
            if !outward {
                return T::zero();
            }
            let sum = range.clone().fold(T::zero(), |acc, i| {
                acc + v[i] * grid.point(i) * grid.point(i)
            });
            sum / T::from_usize_lossy(range.len())
        };
        Self {
            lo: grid.lo(),
            hi: grid.hi(),
            a_lo: amp(0..k, grid.lo() < T::zero()),
            a_hi: amp(n - k..n, grid.hi() > T::zero()),
        }
    }

    fn value(&self, s: &SpectrumCurve<T>, nu: T) -> T {
        if nu < self.lo {
            self.a_lo / (nu * nu)
        } else if nu > self.hi {
            self.a_hi / (nu * nu)
        } else {
            s.interpolate(nu)
        }
    }
}

/// Reconstructs the partner field's spectrum from `source`:
///
/// `S_t(nu) = ∫ dnu' p_{|D|L,|d|}(nu - nu') S_s(-nu'/d)`,
/// `d = D_p,s / D_p,t`, valid when `|d| <= 1`. With `s = 2, t = 1` this is the
/// familiar signal-from-idler form; the other direction is the same relation
/// with the labels exchanged. Both fields share one spectral scale `c_S`, so the
/// constant prefactor is one. The result lives on the source grid.
///
/// For `|d| < 1` the target at `nu` samples the source at `nu/|d|`, past the
/// end of the grid for the outer part of the target range. There the source is
/// continued by its phase-matching tail `A / nu^2`, matched to the outermost 2%
/// of samples on each side.
pub fn spectrum_from_partner<T: Real>(
    source: &SpectrumCurve<T>,
    crystal: &CrystalParams<T>,
    spec: &QuadSpec<T>,
) -> Result<SpectrumCurve<T>> {
    let target = source.field().partner();
    let m = crystal.mismatch();
    if m.d == T::zero() {
        return Err(Error::DegenerateGeometry(
            "D = 0: spectra are not related by a kernel".into(),
        ));
    }
    let (d_src, d_tgt) = (m.d_p(source.field()), m.d_p(target));
    if d_tgt == T::zero() || d_src == T::zero() {
        return Err(Error::DegenerateGeometry(format!(
            "D_p{} = {d_src:e}, D_p{} = {d_tgt:e}: the frequency mapping degenerates",
            source.field().number(),
            target.number()
        )));
    }
    let d = d_src / d_tgt;
    if d.abs() > T::one() {
        return Err(Error::Domain(format!(
            "S{} cannot be expressed through S{}: |D_p{}| < |D_p{}| (|d| = {:e} > 1); reconstruct the other field",
            target.number(),
            source.field().number(),
            source.field().number(),
            target.number(),
            d.abs()
        )));
    }
    let x = crystal.length() * m.d.abs();
    let y = d.abs();
    let period = T::lit(2.0) * T::PI() / x;

    let grid = *source.grid();
    let n = grid.len();
    let h_src = grid.step();
    let tail = SpectrumTail::fit(source);
    let mut ends = [-d * grid.lo(), -d * grid.hi()];
    ends.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    // Target points up to |nu| = g need source values out to about g + margin on
    // the nu' axis, which lies beyond the measured range whenever |d| < 1.
    let g = grid.lo().abs().max(grid.hi().abs());
    let half = ends[0].abs().max(ends[1].abs()).max(T::lit(1.5) * g);
    let sub = (d.abs() * h_src * T::lit(256.0) / period)
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let h = d.abs() * h_src / T::from_usize_lossy(sub);
    let offset = ((half + ends[0]) / h).ceil();
    let start = ends[0] - offset * h;
    let lattice_len = ((T::lit(2.0) * half) / h).ceil().to_usize().unwrap_or(0) + 1;
    let lattice: Vec<(T, T)> = (0..lattice_len)
        .map(|q| {
            let nu_p = start + h * T::from_usize_lossy(q);
            let w = if q == 0 || q + 1 == lattice_len {
                T::lit(0.5) * h
            } else {
                h
            };
            (nu_p, w * tail.value(source, -nu_p / d))
        })
        .filter(|&(_, w)| w != T::zero())
        .collect();

    let reach = g + half + T::lit(2.0) * h;
    let step = period / T::lit(128.0);
    let count = (reach / step).ceil().to_usize().unwrap_or(0) + 4;
    let table = EvenTable {
        step,
        values: (0..count)
            .into_par_iter()
            .map(|k| cross_kernel_p(x, y, step * T::from_usize_lossy(k), spec))
            .collect::<Result<Vec<T>>>()?,
    };

    let values: Vec<T> = grid
        .points()
        .into_par_iter()
        .map(|nu| {
            let acc = lattice
                .iter()
                .fold(T::zero(), |acc, &(nu_p, ws)| acc + table.at(nu - nu_p) * ws);
            acc.max(T::zero())
        })
        .collect();

    let total = source.values().iter().fold(T::zero(), |a, &v| a + v);
    let edge = (n / 20).max(1);
    let tail = source.values()[..edge]
        .iter()
        .chain(&source.values()[n - edge..])
        .fold(T::zero(), |a, &v| a + v);
    let warning = (total > T::zero() && tail > T::lit(1e-3) * total).then(|| {
        format!(
            "source spectrum carries {:.2e} of its mass in the outer 5% of the grid; widen the grid",
            (tail / total).to_f64_lossy()
        )
    });
    Ok(SpectrumCurve::new(grid, values, target, Provenance::FromPartner)?.with_warning(warning))
}
