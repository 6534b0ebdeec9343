//! Two-photon observables of the polarization Hong-Ou-Mandel interferometer.
//!
//! With `tau = tau_1 - tau_2`, `T0 = (tau_1 + tau_2) / 2` and `s = Lambda / D` the
//! two-photon amplitude is `C_A / |D| rect(tau / DL) E(s tau + T0)`. The
//! normalized coincidence rate is `R_n = 1 - rho` with
//!
//! ```text
//! rho(tau_l) = |C_A|^2 / (2 R0 D^2) ∫_W du ∫ dT0 Re{E(s u + T0) E*(-s u + T0)}
//! R0         = |C_A|^2 L / (2 |D|) ∫ |E(t)|^2 dt
//! ```
//!
//! over `W = [-DL/2 + |tau_l - DL/2|, DL/2 - |tau_l - DL/2|]`. Expanding the pump
//! into its pulses splits `rho` and `R0` into same-pulse parts (`rho1`, `R01`)
//! and cross parts (`rho2`, `R02`). Every pulse pair has a closed-form `T0`
//! integral for Gaussian pulses, which gives the fast path; generic adaptive
//! quadrature of the same integrals is kept for validation.

mod gaussian;
mod scan;

pub use gaussian::{pair_overlap, r0_gaussian, rho_gaussian};
pub use scan::{
    interferogram, theta_max_vs_tau0, visibility, visibility_vs_phi, visibility_vs_theta,
    DelayAxis, Interferogram, Method, ThetaGrid, ThetaScan, VisibilityResult, DIP_SAMPLES,
};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{rect, CrystalParams, NormalizationConstants};
use crate::numerics::{
    integrate_2d_nested_with_breaks, integrate_with_breaks, with_interior_points, QuadSpec,
};
use crate::pump::{PumpComponent, PumpField};
use crate::scalar::Real;

/// Quantities shared by every two-photon integral for one crystal.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Geometry<T> {
    /// `Lambda / D`.
    pub s: T,
    /// `D L`, the dip width in delay-line time.
    pub dl: T,
    /// `|C_A|^2 / (2 D^2)`.
    pub weight: T,
    pub d: T,
}

impl<T: Real> Geometry<T> {
    pub fn new(crystal: &CrystalParams<T>, consts: &NormalizationConstants<T>) -> Result<Self> {
        let m = crystal.mismatch();
        if m.d == T::zero() {
            return Err(Error::DegenerateGeometry(
                "D = 1/v1 - 1/v2 = 0: the coincidence dip has zero width".into(),
            ));
        }
        if m.d < T::zero() {
            return Err(Error::Domain(
                "two-photon formulas assume D > 0; relabel the fields with CrystalParams::oriented"
                    .into(),
            ));
        }
        Ok(Self {
            s: m.lambda / m.d,
            dl: m.d * crystal.length(),
            weight: consts.c_a_sq() / (T::lit(2.0) * m.d * m.d),
            d: m.d,
        })
    }

    /// Half-width of the symmetric `u` window at delay `tau_l`; `None` once it collapses.
    pub fn window(&self, tau_l: T) -> Option<T> {
        let half = T::lit(0.5) * self.dl;
        let w = half - (tau_l - half).abs();
        (w > T::zero()).then_some(w)
    }

    /// `u` positions where a pulse pair's correlation peaks, inside `(-w, w)`.
    pub fn outer_breaks(&self, w: T, centers: &[T]) -> Vec<T> {
        let mut peaks = vec![T::zero()];
        if self.s != T::zero() {
            for &a in centers {
                for &b in centers {
                    if a != b {
                        peaks.push((a - b) / (T::lit(2.0) * self.s));
                    }
                }
            }
        }
        with_interior_points(-w, w, peaks)
    }
}

/// Same-pulse and cross-pulse parts of a quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split<T> {
    pub same: T,
    pub cross: T,
}

impl<T: Real> Split<T> {
    pub fn total(&self) -> T {
        self.same + self.cross
    }
}

/// Two-photon amplitude `A12(T0, tau)` (complex), including the global phase
/// `exp(-2 i omega0_1 T0)` when central frequencies are configured.
pub fn two_photon_amplitude<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    t0: T,
    tau: T,
    consts: &NormalizationConstants<T>,
) -> Result<Complex<T>> {
    let g = Geometry::new(crystal, consts)?;
    let window = rect(tau / g.dl);
    if window == T::zero() {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let phase = Complex::from_polar(T::one(), -T::lit(2.0) * crystal.omega0_1() * t0);
    Ok(field.envelope_time(g.s * tau + t0) * phase * (consts.c_a_sq().sqrt() / g.d))
}

/// Inner `T0` interval outside which `|E_a(x + T0) E_b(-x + T0)|` stays below
/// `eps xi_a xi_b`. The modulus is itself a Gaussian in `T0`.
fn pair_support<T: Real>(
    a: &PumpComponent<T>,
    b: &PumpComponent<T>,
    x: T,
    eps: T,
) -> Option<(T, T)> {
    let (ta, tb) = (a.pulse.tau() * a.pulse.tau(), b.pulse.tau() * b.pulse.tau());
    let (ca, cb) = (a.center() - x, b.center() + x);
    let curvature = T::one() / ta + T::one() / tb;
    let mid = (ca / ta + cb / tb) / curvature;
    let floor = (ca - cb) * (ca - cb) / (ta + tb);
    let room = -eps.ln() - floor;
    if !(room > T::zero()) {
        return None;
    }
    let half = (room / curvature).sqrt();
    Some((mid - half, mid + half))
}

/// `∫ |E_a| |E_b| dT0` for coincident centres: the largest `|T0 overlap|` a pair can have.
fn pair_bound<T: Real>(a: &PumpComponent<T>, b: &PumpComponent<T>) -> T {
    let (ta, tb) = (a.pulse.tau(), b.pulse.tau());
    a.pulse.xi() * b.pulse.xi() * T::PI().sqrt() * ta * tb / (ta * ta + tb * tb).sqrt()
}

/// `spec` with the absolute tolerance raised to `rel_tol * scale`, so integrals
/// that cancel far below their natural size do not chase relative accuracy.
fn floored<T: Real>(spec: &QuadSpec<T>, scale: T) -> QuadSpec<T> {
    QuadSpec {
        abs_tol: spec.abs_tol.max(spec.rel_tol * scale),
        ..*spec
    }
}

/// `Re ∫ dT0 E_a(x + T0) E_b*(-x + T0)` by adaptive quadrature.
pub(crate) fn pair_overlap_quadrature<T: Real>(
    a: &PumpComponent<T>,
    b: &PumpComponent<T>,
    x: T,
    spec: &QuadSpec<T>,
) -> Result<T> {
    let Some((lo, hi)) = pair_support(a, b, x, spec.truncation_eps) else {
        return Ok(T::zero());
    };
    let breaks = with_interior_points(lo, hi, [a.center() - x, b.center() + x]);
    let local = floored(spec, pair_bound(a, b));
    let est = integrate_with_breaks(
        |t| (a.envelope(x + t) * b.envelope(-x + t).conj()).re,
        &breaks,
        &local,
    )?;
    Ok(est.value)
}

pub(crate) fn check_nonzero_r0<T: Real>(r0: Split<T>) -> Result<T> {
    let total = r0.total();
    if !(total > T::lit(1e-12) * r0.same) || !(r0.same > T::zero()) {
        return Err(Error::Domain(format!(
            "R0 = {:e} vanishes (destructive or zero pump): rho is undefined",
            total.to_f64_lossy()
        )));
    }
    Ok(total)
}

/// `R0` by nested quadrature of the pump intensity along the tilted line.
pub fn r0_general<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<T> {
    spec.validate()?;
    let g = Geometry::new(crystal, consts)?;
    let Some((lo, hi)) = field.time_support(spec.truncation_eps) else {
        return Ok(T::zero());
    };
    let centers = field.centers();
    let est = integrate_2d_nested_with_breaks(
        |tau, t| field.intensity_time(g.s * tau + t),
        &[T::zero(), g.dl],
        |tau| {
            let shift = g.s * tau;
            with_interior_points(lo - shift, hi - shift, centers.iter().map(|&c| c - shift))
        },
        spec,
    )?;
    Ok(g.weight * est.value)
}

/// `rho(tau_l)` by nested quadrature over `(u, T0)` of the full pump field.
pub fn rho_general<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    tau_l: T,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<T> {
    let g = Geometry::new(crystal, consts)?;
    let r0 = r0_general(field, crystal, consts, spec)?;
    if !(r0 > T::zero()) {
        return Err(Error::Domain(
            "R0 = 0 (zero or destructive pump): rho is undefined".into(),
        ));
    }
    let Some(w) = g.window(tau_l) else {
        return Ok(T::zero());
    };
    let centers = field.centers();
    let active: Vec<&PumpComponent<T>> = field.active().collect();
    let est = integrate_2d_nested_with_breaks(
        |u, t| {
            let x = g.s * u;
            (field.envelope_time(x + t) * field.envelope_time(-x + t).conj()).re
        },
        &g.outer_breaks(w, &centers),
        |u| {
            let x = g.s * u;
            let span = active
                .iter()
                .flat_map(|a| {
                    active
                        .iter()
                        .filter_map(move |b| pair_support(a, b, x, spec.truncation_eps))
                })
                .reduce(|p, q| (p.0.min(q.0), p.1.max(q.1)));
            match span {
                Some((lo, hi)) => {
                    with_interior_points(lo, hi, centers.iter().flat_map(|&c| [c - x, c + x]))
                }
                None => Vec::new(),
            }
        },
        spec,
    )?;
    Ok(g.weight * est.value / r0)
}

/// Pulse-pair sums `Σ_{a,b} f(a, b)` split into same-pulse and cross terms.
pub(crate) fn split_pairs<T: Real>(
    field: &PumpField<T>,
    mut f: impl FnMut(&PumpComponent<T>, &PumpComponent<T>) -> Result<T>,
) -> Result<Split<T>> {
    let active: Vec<&PumpComponent<T>> = field.active().collect();
    let mut out = Split {
        same: T::zero(),
        cross: T::zero(),
    };
    for (i, a) in active.iter().enumerate() {
        for (j, b) in active.iter().enumerate() {
            let v = f(a, b)?;
            if i == j {
                out.same = out.same + v;
            } else {
                out.cross = out.cross + v;
            }
        }
    }
    Ok(out)
}

/// `(R01, R02)` by quadrature of each pulse pair's overlap.
pub fn r0_two_pulse<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<Split<T>> {
    spec.validate()?;
    let g = Geometry::new(crystal, consts)?;
    let sums = split_pairs(field, |a, b| pair_overlap_quadrature(a, b, T::zero(), spec))?;
    let scale = g.weight * g.dl;
    Ok(Split {
        same: scale * sums.same,
        cross: scale * sums.cross,
    })
}

/// Unnormalized `∫_W du Σ_pairs Re ∫ dT0 ...` split by pair kind, using `pair`
/// for the inner `T0` integral at `x = s u`.
pub(crate) fn rho_integrals<T: Real, P>(
    field: &PumpField<T>,
    g: &Geometry<T>,
    tau_l: T,
    spec: &QuadSpec<T>,
    pair: P,
) -> Result<Split<T>>
where
    P: Fn(&PumpComponent<T>, &PumpComponent<T>, T) -> Result<T>,
{
    let zero = Split {
        same: T::zero(),
        cross: T::zero(),
    };
    let Some(w) = g.window(tau_l) else {
        return Ok(zero);
    };
    let breaks = g.outer_breaks(w, &field.centers());
    let active: Vec<&PumpComponent<T>> = field.active().collect();
    let mut out = zero;
    for (i, a) in active.iter().enumerate() {
        for (j, b) in active.iter().enumerate() {
            let mut failure = None;
            let local = floored(spec, pair_bound(a, b) * T::lit(2.0) * w);
            let est = integrate_with_breaks(
                |u| match pair(a, b, g.s * u) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        T::zero()
                    }
                },
                &breaks,
                &local,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            let v = est?.value;
            if i == j {
                out.same = out.same + v;
            } else {
                out.cross = out.cross + v;
            }
        }
    }
    Ok(out)
}

/// `(rho1, rho2)` at `tau_l` by generic quadrature of every pulse pair.
pub fn rho_two_pulse<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    tau_l: T,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<Split<T>> {
    let g = Geometry::new(crystal, consts)?;
    let r0 = check_nonzero_r0(r0_two_pulse(field, crystal, consts, spec)?)?;
    let raw = rho_integrals(field, &g, tau_l, spec, |a, b, x| {
        pair_overlap_quadrature(a, b, x, spec)
    })?;
    Ok(Split {
        same: g.weight * raw.same / r0,
        cross: g.weight * raw.cross / r0,
    })
}
