//! Closed forms of the `T0` integrals for Gaussian pulses.
//!
//! For pulses `a`, `b` with `alpha_a`, `alpha_b`, delays `d_a`, `d_b` and phases
//! `phi_a`, `phi_b`:
//!
//! ```text
//! ∫ dT0 E_a(x + T0) E_b*(-x + T0)
//!   = xi_a xi_b e^{i(phi_a - phi_b)} sqrt(pi / A) exp(-alpha_a alpha_b* (theta - 2x)^2 / A)
//! ```
//!
//! with `A = alpha_a + alpha_b*` and `theta = d_b - d_a`. The square root is the
//! principal branch; `Re A > 0` always.

use num_complex::Complex;

use super::{check_nonzero_r0, rho_integrals, split_pairs, Geometry, Split};
use crate::error::Result;
use crate::model::{CrystalParams, NormalizationConstants};
use crate::numerics::QuadSpec;
use crate::pump::{PumpComponent, PumpField};
use crate::scalar::Real;

/// Complex `T0` overlap of two pulses at half tilt `x` (s).
pub fn pair_overlap<T: Real>(a: &PumpComponent<T>, b: &PumpComponent<T>, x: T) -> Complex<T> {
    // Scaled by tau_a^2 so that alpha products stay representable in f32.
    let t = a.pulse.tau();
    let (aa, ab) = (a.pulse.alpha() * (t * t), b.pulse.alpha().conj() * (t * t));
    let sum = aa + ab;
    let arg = (b.delay - a.delay - T::lit(2.0) * x) / t;
    let amp = a.pulse.xi() * b.pulse.xi();
    let phase = Complex::from_polar(amp * t, a.phase - b.phase);
    let root = (Complex::from(T::PI()) / sum).sqrt();
    phase * root * (-(aa * ab) * (arg * arg) / sum).exp()
}

/// `(R01, R02)` in closed form.
pub fn r0_gaussian<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    consts: &NormalizationConstants<T>,
) -> Result<Split<T>> {
    let g = Geometry::new(crystal, consts)?;
    let sums = split_pairs(field, |a, b| Ok(pair_overlap(a, b, T::zero()).re))?;
    let scale = g.weight * g.dl;
    Ok(Split {
        same: scale * sums.same,
        cross: scale * sums.cross,
    })
}

/// `(rho1, rho2)` at `tau_l`: closed-form `T0` integrals, adaptive `u` quadrature.
pub fn rho_gaussian<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    tau_l: T,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<Split<T>> {
    let r0 = check_nonzero_r0(r0_gaussian(field, crystal, consts)?)?;
    rho_gaussian_with_r0(field, crystal, tau_l, r0, consts, spec)
}

pub(crate) fn rho_gaussian_with_r0<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    tau_l: T,
    r0: T,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<Split<T>> {
    let g = Geometry::new(crystal, consts)?;
    let raw = rho_integrals(field, &g, tau_l, spec, |a, b, x| {
        Ok(pair_overlap(a, b, x).re)
    })?;
    Ok(Split {
        same: g.weight * raw.same / r0,
        cross: g.weight * raw.cross / r0,
    })
}
