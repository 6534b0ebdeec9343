//! Sampled interferograms, visibility and the visibility scans built on them.

use rayon::prelude::*;

use super::gaussian::{r0_gaussian, rho_gaussian_with_r0};
use super::{
    check_nonzero_r0, pair_overlap_quadrature, r0_two_pulse, rho_integrals, Geometry, Split,
};
use crate::error::{Error, Result};
use crate::model::{CrystalParams, DelayLine, NormalizationConstants};
use crate::numerics::{extrema_of_samples, maximize_scalar, ExtremumKind, GridSpec, QuadSpec};
use crate::pump::{PumpField, PumpPulse};
use crate::scalar::Real;

/// Samples across `[-0.1 DL, 1.1 DL]` used when a scan extracts a visibility.
pub const DIP_SAMPLES: usize = 241;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Closed-form `T0` integrals, adaptive `u` quadrature.
    GaussianClosedForm,
    /// Adaptive quadrature of every pulse-pair integral.
    GenericQuadrature,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::GaussianClosedForm => "gaussian-closed-form",
            Method::GenericQuadrature => "generic-quadrature",
        }
    }
}

/// Abscissa of an interferogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayAxis<T> {
    /// Delay-line time `tau_l` (s).
    TauL(GridSpec<T>),
    /// Delay-line length `l` (mm).
    Length(GridSpec<T>),
}

/// `R_n = 1 - rho1 - rho2` sampled along the delay line, ascending in `tau_l`.
#[derive(Debug, Clone)]
pub struct Interferogram<T> {
    grid: GridSpec<T>,
    l: Vec<T>,
    rn: Vec<T>,
    rho1: Vec<T>,
    rho2: Vec<T>,
    r0: Split<T>,
    method: Method,
    relabeled: bool,
    field: PumpField<T>,
    crystal: CrystalParams<T>,
    delay: DelayLine<T>,
    consts: NormalizationConstants<T>,
    spec: QuadSpec<T>,
}

impl<T: Real> Interferogram<T> {
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }
    pub fn tau_l(&self) -> Vec<T> {
        self.grid.points()
    }
    pub fn l(&self) -> &[T] {
        &self.l
    }
    pub fn rn(&self) -> &[T] {
        &self.rn
    }
    pub fn rho1(&self) -> &[T] {
        &self.rho1
    }
    pub fn rho2(&self) -> &[T] {
        &self.rho2
    }
    /// `(R01, R02)` of the configuration.
    pub fn r0(&self) -> Split<T> {
        self.r0
    }
    pub fn method(&self) -> Method {
        self.method
    }
    /// True when the fields were swapped to make `D > 0`.
    pub fn relabeled(&self) -> bool {
        self.relabeled
    }
    /// Crystal after relabeling.
    pub fn crystal(&self) -> &CrystalParams<T> {
        &self.crystal
    }
    pub fn field(&self) -> &PumpField<T> {
        &self.field
    }
    /// Delay line after relabeling.
    pub fn delay(&self) -> &DelayLine<T> {
        &self.delay
    }

    /// `R_n` at an arbitrary delay, with the interferogram's method.
    pub fn rn_at(&self, tau_l: T) -> Result<T> {
        let rho = rho_parts(
            &self.field,
            &self.crystal,
            tau_l,
            self.r0.total(),
            self.method,
            &self.consts,
            &self.spec,
        )?;
        Ok(T::one() - rho.total())
    }
}

fn rho_parts<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    tau_l: T,
    r0: T,
    method: Method,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<Split<T>> {
    match method {
        Method::GaussianClosedForm => rho_gaussian_with_r0(field, crystal, tau_l, r0, consts, spec),
        Method::GenericQuadrature => {
            let g = Geometry::new(crystal, consts)?;
            let raw = rho_integrals(field, &g, tau_l, spec, |a, b, x| {
                pair_overlap_quadrature(a, b, x, spec)
            })?;
            Ok(Split {
                same: g.weight * raw.same / r0,
                cross: g.weight * raw.cross / r0,
            })
        }
    }
}

/// Samples `R_n` over `axis`. A crystal with `D < 0` is relabeled first (the
/// delay line's group velocities swap with it) and the result is flagged.
pub fn interferogram<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    delay: &DelayLine<T>,
    axis: DelayAxis<T>,
    method: Method,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<Interferogram<T>> {
    spec.validate()?;
    let oriented = crystal.oriented()?;
    let relabeled = oriented.relabeled() != crystal.relabeled();
    let delay = if relabeled {
        DelayLine::new(delay.inv_g2(), delay.inv_g1())?
    } else {
        *delay
    };
    let grid = match axis {
        DelayAxis::TauL(g) => g,
        DelayAxis::Length(g) => g.scaled(delay.tau_l_of_length(T::one()))?,
    };
    let r0 = match method {
        Method::GaussianClosedForm => r0_gaussian(field, &oriented, consts)?,
        Method::GenericQuadrature => r0_two_pulse(field, &oriented, consts, spec)?,
    };
    let total = check_nonzero_r0(r0)?;
    let parts = grid
        .points()
        .into_par_iter()
        .map(|t| rho_parts(field, &oriented, t, total, method, consts, spec))
        .collect::<Result<Vec<Split<T>>>>()?;
    Ok(Interferogram {
        grid,
        l: grid
            .points()
            .iter()
            .map(|&t| delay.length_of_tau_l(t))
            .collect(),
        rn: parts.iter().map(|p| T::one() - p.total()).collect(),
        rho1: parts.iter().map(|p| p.same).collect(),
        rho2: parts.iter().map(|p| p.cross).collect(),
        r0,
        method,
        relabeled,
        field: field.clone(),
        crystal: oriented,
        delay,
        consts: *consts,
        spec: *spec,
    })
}

/// Dip contrast `V = (R_max - R_min) / (R_max + R_min)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityResult<T> {
    pub v: T,
    /// `tau_l` of the global minimum (s).
    pub tau_l_min: T,
    pub r_min: T,
    pub r_max: T,
    /// True when `R_max` is the baseline 1 rather than a scanned value above it.
    pub r_max_is_baseline: bool,
}

/// [`maximize_scalar`] for a fallible objective; the first evaluation error wins.
fn maximize_fallible<T: Real>(
    f: impl Fn(T) -> Result<T>,
    a: T,
    b: T,
    tol: T,
) -> Result<Result<(T, T)>> {
    let mut failure = None;
    let r = maximize_scalar(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                T::neg_infinity()
            }
        },
        a,
        b,
        tol,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

fn golden_refine<T: Real>(f: impl Fn(T) -> Result<T>, a: T, b: T, tol: T) -> Result<(T, T)> {
    // a three-sample bracket need not be unimodal; fall back to its centre
    match maximize_fallible(&f, a, b, tol)? {
        Ok(v) => Ok(v),
        Err(Error::NotUnimodal { .. }) => {
            let m = T::lit(0.5) * (a + b);
            Ok((m, f(m)?))
        }
        Err(e) => Err(e),
    }
}

/// Visibility of the dip. `R_max` is the baseline 1 unless the scan rises
/// above it; `R_min` is the sampled global minimum refined by golden section.
pub fn visibility<T: Real>(ig: &Interferogram<T>) -> Result<VisibilityResult<T>> {
    let dl = ig.crystal.dip_width();
    let slack = T::lit(1e-9) * dl;
    let (lo, hi) = (ig.grid.lo(), ig.grid.hi());
    if lo > -T::lit(0.1) * dl + slack || hi < T::lit(1.1) * dl - slack {
        return Err(Error::invalid(
            "interferogram",
            format!(
                "visibility needs tau_l to cover [-0.1 DL, 1.1 DL] = [{:e}, {:e}] s",
                (-T::lit(0.1) * dl).to_f64_lossy(),
                (T::lit(1.1) * dl).to_f64_lossy()
            ),
        ));
    }
    let rn = &ig.rn;
    if rn.iter().all(|&v| v == T::one()) {
        return Err(Error::UndefinedVisibility("R_n is flat: no dip".into()));
    }
    let tol = ig.grid.step() * T::lit(1e-4);
    let refine = |i: usize, sign: T| -> Result<(T, T)> {
        if i == 0 || i + 1 == rn.len() {
            return Ok((ig.grid.point(i), rn[i]));
        }
        let (x, v) = golden_refine(
            |t| ig.rn_at(t).map(|r| sign * r),
            ig.grid.point(i - 1),
            ig.grid.point(i + 1),
            tol,
        )?;
        let v = sign * v;
        // never worse than the sample itself
        Ok(if sign * v >= sign * rn[i] {
            (x, v)
        } else {
            (ig.grid.point(i), rn[i])
        })
    };
    let i_min = (0..rn.len()).fold(0, |b, i| if rn[i] < rn[b] { i } else { b });
    let (tau_l_min, r_min) = refine(i_min, -T::one())?;
    let i_max = (0..rn.len()).fold(0, |b, i| if rn[i] > rn[b] { i } else { b });
    let (r_max, r_max_is_baseline) = if rn[i_max] > T::one() {
        (refine(i_max, T::one())?.1, false)
    } else {
        (T::one(), true)
    };
    let denom = r_max + r_min;
    if !(denom > T::zero()) {
        return Err(Error::UndefinedVisibility("R_max + R_min = 0".into()));
    }
    Ok(VisibilityResult {
        v: (r_max - r_min) / denom,
        tau_l_min,
        r_min,
        r_max,
        r_max_is_baseline,
    })
}

fn dip_axis<T: Real>(crystal: &CrystalParams<T>) -> Result<DelayAxis<T>> {
    let dl = crystal.dip_width();
    Ok(DelayAxis::TauL(GridSpec::new(
        -T::lit(0.1) * dl,
        T::lit(1.1) * dl,
        DIP_SAMPLES,
    )?))
}

fn visibility_of<T: Real>(
    field: &PumpField<T>,
    crystal: &CrystalParams<T>,
    delay: &DelayLine<T>,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<T> {
    let ig = interferogram(
        field,
        crystal,
        delay,
        dip_axis(crystal)?,
        Method::GaussianClosedForm,
        consts,
        spec,
    )?;
    Ok(visibility(&ig)?.v)
}

/// `V(theta)` over a grid, plus the interior maximum if there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaScan<T> {
    pub theta: Vec<T>,
    pub v: Vec<T>,
    /// Refined location and value of the interior maximum.
    pub theta_max: Option<(T, T)>,
}

/// Visibility as a function of the pulse delay, with everything else taken from
/// `template`. The interior maximum is refined by golden section, seeded from the
/// best grid point; a non-unimodal bracket is re-scanned ten times finer first.
pub fn visibility_vs_theta<T: Real>(
    template: &PumpField<T>,
    crystal: &CrystalParams<T>,
    delay: &DelayLine<T>,
    thetas: &GridSpec<T>,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<ThetaScan<T>> {
    let at = |theta: T| -> Result<T> {
        visibility_of(&template.with_theta(theta)?, crystal, delay, consts, spec)
    };
    let theta = thetas.points();
    let v = theta
        .par_iter()
        .map(|&t| at(t))
        .collect::<Result<Vec<T>>>()?;
    let theta_max = interior_argmax(&at, thetas, &v)?;
    Ok(ThetaScan {
        theta,
        v,
        theta_max,
    })
}

fn interior_argmax<T: Real>(
    f: &(impl Fn(T) -> Result<T> + Sync),
    grid: &GridSpec<T>,
    v: &[T],
) -> Result<Option<(T, T)>> {
    let best = (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b });
    if best == 0 || best + 1 == v.len() {
        return Ok(None);
    }
    let has_peak = extrema_of_samples(grid, v)
        .iter()
        .any(|&(i, j, k)| k != ExtremumKind::Min && i <= best && best <= j);
    if !has_peak {
        return Ok(None);
    }
    let tol = grid.step() * T::lit(1e-4);
    let (a, b) = (grid.point(best - 1), grid.point(best + 1));
    match maximize_fallible(f, a, b, tol)? {
        Ok(r) => Ok(Some(r)),
        Err(Error::NotUnimodal { .. }) => {
            let fine = GridSpec::new(a, b, 21)?;
            let fv = fine
                .points()
                .par_iter()
                .map(|&t| f(t))
                .collect::<Result<Vec<T>>>()?;
            let k = (1..fv.len() - 1).fold(1, |b, i| if fv[i] > fv[b] { i } else { b });
            Ok(Some(maximize_fallible(
                f,
                fine.point(k - 1),
                fine.point(k + 1),
                tol,
            )??))
        }
        Err(e) => Err(e),
    }
}

/// Visibility as a function of the relative pulse phase.
pub fn visibility_vs_phi<T: Real>(
    template: &PumpField<T>,
    crystal: &CrystalParams<T>,
    delay: &DelayLine<T>,
    phis: &GridSpec<T>,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<Vec<T>> {
    phis.points()
        .par_iter()
        .map(|&phi| visibility_of(&template.with_phi(phi)?, crystal, delay, consts, spec))
        .collect()
}

/// `theta` grid relative to the pulse duration: `[0, span * tau0]` with `n` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaGrid<T> {
    pub span: T,
    pub n: usize,
}

/// `theta_max` for equal in-phase unit pulses of duration `tau0` and chirp
/// `chirp`; `None` where `V(theta)` has no interior maximum on the grid.
pub fn theta_max_vs_tau0<T: Real>(
    tau0: &[T],
    chirp: T,
    thetas: ThetaGrid<T>,
    crystal: &CrystalParams<T>,
    delay: &DelayLine<T>,
    consts: &NormalizationConstants<T>,
    spec: &QuadSpec<T>,
) -> Result<Vec<Option<(T, T)>>> {
    tau0.iter()
        .map(|&tau| {
            let p = PumpPulse::new(T::one(), tau, chirp)?;
            let template = PumpField::two_pulse(p, p, T::zero(), T::zero())?;
            let grid = GridSpec::new(T::zero(), thetas.span * tau, thetas.n)?;
            Ok(visibility_vs_theta(&template, crystal, delay, &grid, consts, spec)?.theta_max)
        })
        .collect()
}
