//! One-photon observables: time-resolved mean photon number, spectra of the
//! down-converted fields, the relation between the two spectra and recovery
//! of the pump spectral intensity from a measured spectrum.
//!
//! For crystals short enough that `D_pj L` is small against the time scale on
//! which the pump intensity changes, `N_j(tau)` follows the pump intensity.

mod inversion;
mod partner;

pub use inversion::{invert_pump_spectrum, InversionResult, DEFAULT_LAMBDA, MAX_RESIDUAL};
pub use partner::{cross_kernel_p, spectrum_from_partner};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{sinc, CrystalParams, FieldIndex, NormalizationConstants};
use crate::numerics::{
    integrate_with_breaks, oscillation_breaks, with_interior_points, GridSpec, QuadSpec,
};
use crate::pump::PumpField;
use crate::scalar::Real;

/// Where a spectrum came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Direct,
    FromPartner,
    InvertedInput,
}

impl Provenance {
    pub fn tag(self) -> &'static str {
        match self {
            Provenance::Direct => "direct",
            Provenance::FromPartner => "from-partner",
            Provenance::InvertedInput => "inverted-input",
        }
    }
}

/// Sampled spectrum over a uniform angular-frequency grid (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve<T> {
    grid: GridSpec<T>,
    values: Vec<T>,
    field: FieldIndex,
    provenance: Provenance,
    warning: Option<String>,
}

impl<T: Real> SpectrumCurve<T> {
    pub fn new(
        grid: GridSpec<T>,
        values: Vec<T>,
        field: FieldIndex,
        provenance: Provenance,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(
                "spectrum",
                format!("{} values for a {}-point grid", values.len(), grid.len()),
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= T::zero())) {
            return Err(Error::invalid(
                "spectrum",
                format!("values must be finite and >= 0, found {v:e}"),
            ));
        }
        Ok(Self {
            grid,
            values,
            field,
            provenance,
            warning: None,
        })
    }

    pub(crate) fn with_warning(mut self, warning: Option<String>) -> Self {
        self.warning = warning;
        self
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn field(&self) -> FieldIndex {
        self.field
    }
    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    pub fn nu(&self) -> Vec<T> {
        self.grid.points()
    }

    /// Linear interpolation, zero outside the grid.
    pub fn interpolate(&self, nu: T) -> T {
        let (lo, hi) = (self.grid.lo(), self.grid.hi());
        if !(nu >= lo && nu <= hi) {
            return T::zero();
        }
        let pos = (nu - lo) / self.grid.step();
        let i = pos
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(self.values.len() - 2);
        let frac = pos - T::from_usize_lossy(i);
        self.values[i] + (self.values[i + 1] - self.values[i]) * frac
    }
}

/// Sampled mean photon number over a time grid (s).
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonNumberCurve<T> {
    grid: GridSpec<T>,
    values: Vec<T>,
    field: FieldIndex,
}

impl<T: Real> PhotonNumberCurve<T> {
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn field(&self) -> FieldIndex {
        self.field
    }
    pub fn tau(&self) -> Vec<T> {
        self.grid.points()
    }

    /// Trapezoidal estimate of the photon number in the pulse.
    pub fn total(&self) -> T {
        let h = self.grid.step();
        let n = self.values.len();
        let inner: T = self.values[1..n - 1].iter().fold(T::zero(), |a, &v| a + v);
        h * (inner + T::lit(0.5) * (self.values[0] + self.values[n - 1]))
    }
}

fn two_pi_sq<T: Real>() -> T {
    let tp = T::lit(2.0) * T::PI();
    tp * tp
}

/// Mean photon number `N_j(tau)` of field `j` at time `tau` (s).
///
/// The crystal average `∫_{-L}^0 dz |E(tau - D_pj z)|^2` is evaluated as
/// `(1/|D_pj|) ∫ |E(u)|^2 du` over `u` between `tau` and `tau + D_pj L`,
/// clipped to the pump support. `D_pj = 0` gives `L |E(tau)|^2` exactly.
pub fn mean_photon_number<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    j: FieldIndex,
    tau: T,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<T> {
    let m = crystal.mismatch();
    if m.d == T::zero() {
        return Err(Error::DegenerateGeometry(
            "D = 0: mean photon number diverges".into(),
        ));
    }
    let prefactor = two_pi_sq::<T>() * consts.c_n() / m.d.abs();
    let d_p = m.d_p(j);
    let length = crystal.length();
    if d_p == T::zero() {
        return Ok(prefactor * length * field.intensity_time(tau));
    }
    let Some((s_lo, s_hi)) = field.time_support(spec.truncation_eps) else {
        return Ok(T::zero());
    };
    let end = tau + d_p * length;
    let (lo, hi) = (tau.min(end).max(s_lo), tau.max(end).min(s_hi));
    if !(hi > lo) {
        return Ok(T::zero());
    }
    let breaks = with_interior_points(lo, hi, field.centers());
    let est = integrate_with_breaks(|u| field.intensity_time(u), &breaks, spec)?;
    Ok(prefactor * est.value / d_p.abs())
}

/// [`mean_photon_number`] sampled on `grid`.
pub fn photon_number_curve<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    j: FieldIndex,
    grid: &GridSpec<T>,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<PhotonNumberCurve<T>> {
    let values = grid
        .points()
        .into_par_iter()
        .map(|t| mean_photon_number(field, crystal, j, t, consts, spec))
        .collect::<Result<Vec<T>>>()?;
    Ok(PhotonNumberCurve {
        grid: *grid,
        values,
        field: j,
    })
}

/// Coefficients `(b, s)` of the phase-matching argument `b (D_p' nu_p - s D nu)`
/// for field `j`, where `D_p'` is the partner's mismatch and `b = L/2`.
pub(crate) fn matching_coefficients<T: Real>(
    crystal: &CrystalParams<T>,
    j: FieldIndex,
) -> (T, T, T) {
    let m = crystal.mismatch();
    let (d_p_partner, sign) = match j {
        FieldIndex::Signal => (m.d_p2, T::one()),
        FieldIndex::Idler => (m.d_p1, -T::one()),
    };
    (d_p_partner, sign * m.d, crystal.length())
}

/// Spectrum `S_j(nu)` of field `j`: the pump spectral intensity convolved with
/// the phase-matching function `L^2 sinc^2[(L/2)(D_p' nu_p ∓ D nu)]`.
pub fn spectrum_direct<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    j: FieldIndex,
    nu: T,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<T> {
    if field.is_zero() {
        return Ok(T::zero());
    }
    let (d_p, signed_d, length) = matching_coefficients(crystal, j);
    let half_l = T::lit(0.5) * length;
    let w = field.spectral_halfwidth(spec.truncation_eps);
    let omega = (length * d_p).abs().max(field.max_delay_spread());
    let breaks = oscillation_breaks(-w, w, omega);
    let l_sq = length * length;
    let est = integrate_with_breaks(
        |nu_p| {
            let s = sinc(half_l * (d_p * nu_p - signed_d * nu));
            field.spectral_intensity(nu_p) * l_sq * s * s
        },
        &breaks,
        spec,
    )?;
    Ok(consts.c_s() * est.value)
}

/// [`spectrum_direct`] sampled on `grid`.
pub fn spectrum_curve<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    j: FieldIndex,
    grid: &GridSpec<T>,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<SpectrumCurve<T>> {
    let values = grid
        .points()
        .into_par_iter()
        .map(|nu| spectrum_direct(field, crystal, j, nu, consts, spec).map(|v| v.max(T::zero())))
        .collect::<Result<Vec<T>>>()?;
    SpectrumCurve::new(*grid, values, j, Provenance::Direct)
}
