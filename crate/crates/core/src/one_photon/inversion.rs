//! Recovery of the pump spectral intensity from a down-converted spectrum.
//!
//! On the rescaled axis `mu = ±D nu / D_p'` the spectrum is a true convolution
//! `S(mu) = c_S ∫ I(nu_p) K(nu_p - mu) dnu_p` with `K(u) = L^2 sinc^2(L D_p' u / 2)`.
//! It is undone by discrete Fourier division with a Tikhonov filter
//! `conj(K) / (|K|^2 + lambda max|K|^2)`. Content of the pump spectrum beyond the
//! triangular passband of the sinc² kernel cannot be recovered.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{matching_coefficients, Provenance, SpectrumCurve};
use crate::error::{Error, Result};
use crate::model::{sinc, CrystalParams, FieldIndex, NormalizationConstants};
use crate::numerics::GridSpec;
use crate::scalar::Real;

/// Default relative Tikhonov weight.
pub const DEFAULT_LAMBDA: f64 = 1e-6;
/// Forward residual above which the inversion is reported as ill-posed.
pub const MAX_RESIDUAL: f64 = 0.05;
/// Samples required per sinc² lobe of the kernel.
const SAMPLES_PER_LOBE: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct InversionResult<T> {
    /// Pump spectral intensity `|E(nu_p)|^2` over pump frequency (rad/s).
    pub pump: SpectrumCurve<T>,
    /// `||K * I - S|| / ||S||` for the returned estimate.
    pub residual: T,
    pub lambda: T,
    /// Most negative value before clamping, as a fraction of the peak.
    pub max_negative: T,
}

impl<T: Real> InversionResult<T> {
    /// True when clamping removed more than numerical ringing (1e-6 of peak).
    pub fn clamped_beyond_ringing(&self) -> bool {
        self.max_negative > T::lit(1e-6)
    }
}

struct Convolver<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    kernel_hat: Vec<Complex<T>>,
    n: usize,
}

impl<T: Real> Convolver<T> {
    fn new(kernel: impl Fn(T) -> T, step: T, n: usize) -> Self {
        let size = 2 * n;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut kernel_hat = vec![Complex::new(T::zero(), T::zero()); size];
        for k in 0..n {
            let v = kernel(step * T::from_usize_lossy(k)) * step;
            kernel_hat[k] = Complex::from(v);
            if k > 0 {
                kernel_hat[size - k] = Complex::from(v);
            }
        }
        forward.process(&mut kernel_hat);
        Self {
            forward,
            inverse,
            kernel_hat,
            n,
        }
    }

    fn transform(&self, data: &[T]) -> Vec<Complex<T>> {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); 2 * self.n];
        for (b, &d) in buf.iter_mut().zip(data) {
            *b = Complex::from(d);
        }
        self.forward.process(&mut buf);
        buf
    }

    fn back(&self, mut buf: Vec<Complex<T>>) -> Vec<T> {
        self.inverse.process(&mut buf);
        let scale = T::one() / T::from_usize_lossy(buf.len());
        buf.iter().take(self.n).map(|c| c.re * scale).collect()
    }

    /// Linear convolution of `data` with the kernel, restricted to the window.
    fn apply(&self, data: &[T]) -> Vec<T> {
        let buf: Vec<Complex<T>> = self
            .transform(data)
            .into_iter()
            .zip(&self.kernel_hat)
            .map(|(a, k)| a * k)
            .collect();
        self.back(buf)
    }

    fn deconvolve(&self, data: &[T], lambda: T) -> Vec<T> {
        let peak = self
            .kernel_hat
            .iter()
            .fold(T::zero(), |m, k| m.max(k.norm_sqr()));
        let floor = lambda * peak;
        let buf: Vec<Complex<T>> = self
            .transform(data)
            .into_iter()
            .zip(&self.kernel_hat)
            .map(|(a, k)| a * k.conj() / (k.norm_sqr() + floor))
            .collect();
        self.back(buf)
    }
}

fn norm<T: Real>(v: impl Iterator<Item = T>) -> T {
    v.fold(T::zero(), |a, x| a + x * x).sqrt()
}

/// Recovers `|E_p(nu_p)|^2` from the spectrum `sj` of field `j`.
///
/// `lambda` is relative to the largest kernel power. The input grid is refined
/// by linear interpolation when needed so every sinc² lobe gets at least eight
/// samples. Negative outputs are clamped to zero (see
/// [`InversionResult::max_negative`]).
pub fn invert_pump_spectrum<T: Real>(
    sj: &SpectrumCurve<T>,
    crystal: &CrystalParams<T>,
    j: FieldIndex,
    lambda: T,
    consts: &NormalizationConstants<T>,
) -> Result<InversionResult<T>> {
    if !(lambda.is_finite() && lambda > T::zero()) {
        return Err(Error::invalid("lambda", "must be finite and positive"));
    }
    if !(consts.c_s() > T::zero()) {
        return Err(Error::invalid(
            "consts.c_s",
            "must be positive to invert a spectrum",
        ));
    }
    let (d_p, signed_d, length) = matching_coefficients(crystal, j);
    if d_p == T::zero() || signed_d == T::zero() {
        return Err(Error::DegenerateGeometry(
            "vanishing mismatch: the spectrum does not depend on the pump frequency profile".into(),
        ));
    }
    let b = T::lit(0.5) * length * d_p;
    let scale = signed_d / d_p;

    // rescaled axis, ascending
    let src = sj.grid();
    let mu_lo = (src.lo() * scale).min(src.hi() * scale);
    let mu_hi = (src.lo() * scale).max(src.hi() * scale);
    let mu_step = src.step() * scale.abs();
    let wanted = T::PI() / b.abs() / T::lit(SAMPLES_PER_LOBE);
    let refine = (mu_step / wanted).ceil().to_usize().unwrap_or(1).max(1);
    let n = (src.len() - 1) * refine + 1;
    let grid = GridSpec::new(mu_lo, mu_hi, n)?;
    let c_s = consts.c_s();
    let data: Vec<T> = grid
        .points()
        .iter()
        .map(|&mu| sj.interpolate(mu / scale) / c_s)
        .collect();

    let l_sq = length * length;
    let conv = Convolver::new(
        |u| {
            let s = sinc(b * u);
            l_sq * s * s
        },
        grid.step(),
        n,
    );
    let raw = conv.deconvolve(&data, lambda);
    let peak = raw.iter().fold(T::zero(), |m, &v| m.max(v));
    let most_negative = raw.iter().fold(T::zero(), |m, &v| m.min(v));
    let max_negative = if peak > T::zero() {
        -most_negative / peak
    } else {
        T::zero()
    };
    let estimate: Vec<T> = raw.into_iter().map(|v| v.max(T::zero())).collect();

    let forward = conv.apply(&estimate);
    let data_norm = norm(data.iter().copied());
    let residual = if data_norm > T::zero() {
        norm(forward.iter().zip(&data).map(|(&f, &d)| f - d)) / data_norm
    } else {
        T::zero()
    };
    if residual > T::lit(MAX_RESIDUAL) {
        return Err(Error::IllPosedInversion {
            residual: residual.to_f64_lossy(),
            threshold: MAX_RESIDUAL,
            nu: grid.points().iter().map(|v| v.to_f64_lossy()).collect(),
            values: estimate.iter().map(|v| v.to_f64_lossy()).collect(),
        });
    }
    Ok(InversionResult {
        pump: SpectrumCurve::new(grid, estimate, j, Provenance::InvertedInput)?,
        residual,
        lambda,
        max_negative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolver_matches_direct_sum() {
        let n = 64;
        let step = 0.1;
        let kernel = |u: f64| (-u * u).exp();
        let conv = Convolver::new(kernel, step, n);
        let data: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.3).sin().abs()).collect();
        let fast = conv.apply(&data);
        for m in [0usize, 7, 31, 63] {
            let direct: f64 = (0..n)
                .map(|k| data[k] * kernel((m as f64 - k as f64) * step) * step)
                .sum();
            assert!((fast[m] - direct).abs() < 1e-12, "{m}");
        }
    }

    #[test]
    fn rejects_bad_lambda() {
        let crystal = CrystalParams::new(10.0, 56.85e-13, 56.14e-13, 54.30e-13).unwrap();
        let g = GridSpec::new(-1e13, 1e13, 11).unwrap();
        let s =
            SpectrumCurve::new(g, vec![1.0; 11], FieldIndex::Signal, Provenance::Direct).unwrap();
        let consts = NormalizationConstants::default();
        assert!(invert_pump_spectrum(&s, &crystal, FieldIndex::Signal, 0.0, &consts).is_err());
        assert!(invert_pump_spectrum(&s, &crystal, FieldIndex::Signal, f64::NAN, &consts).is_err());
    }
}
