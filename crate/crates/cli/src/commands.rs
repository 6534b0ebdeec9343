//! Command implementations. Each returns the CSV table plus manifest entries;
//! `main` writes both and maps failures to exit codes.

use std::fmt;
use std::fs::File;
use std::io::BufReader;

use anyhow::Context;
use biphoton::io::{format_value, read_spectrum};
use biphoton::one_photon::{self, InversionResult, DEFAULT_LAMBDA};
use biphoton::two_photon::{self, DelayAxis, Interferogram, Method, ThetaGrid};
use biphoton::{Error, FieldIndex, GridSpec, PumpField, FREQ_UNIT, TIME_UNIT};
use rayon::prelude::*;

use crate::config::{field_index, grid, AxisKind, Loaded, MethodKind, RunConfig, ScanKind};

/// Largest allowed `|R_n(gaussian) - R_n(generic)|` under `--validate`.
pub const VALIDATE_TOL: f64 = 1e-6;

/// A result was computed but failed its numerical acceptance check; exit 3.
#[derive(Debug)]
pub struct NumericalFailure(pub String);

impl fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "numerical check failed: {}", self.0)
    }
}

impl std::error::Error for NumericalFailure {}

/// Table, manifest results and an optional failure to report after writing.
pub struct Output {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub method: &'static str,
    pub results: toml::Table,
    pub warnings: Vec<String>,
    /// Extra tables written next to the main one, keyed by file suffix.
    pub extra: Vec<(String, Vec<String>, Vec<Vec<f64>>)>,
    /// Deferred error: the outputs are still written, then this is returned.
    pub failure: Option<anyhow::Error>,
}

impl Output {
    fn new(columns: Vec<String>, rows: Vec<Vec<f64>>, method: &'static str) -> Self {
        Self {
            columns,
            rows,
            method,
            results: toml::Table::new(),
            warnings: Vec::new(),
            extra: Vec::new(),
            failure: None,
        }
    }

    fn result(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.results.insert(key.to_string(), value.into());
    }
}

/// CLI-level overrides that are not part of the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub validate: bool,
    pub lambdas: Vec<f64>,
    pub scan_kind: Option<ScanKind>,
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> anyhow::Result<&'a T> {
    s.as_ref().ok_or_else(|| {
        crate::config::ConfigError(format!("section `{name}` is required for this command")).into()
    })
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Transposes equal-length columns into rows.
fn rows_of(cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = cols.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect()
}

fn label(v: f64) -> String {
    format_value(v)
}

pub fn mean_photons(cfg: &RunConfig) -> anyhow::Result<Output> {
    let m = section(&cfg.mean_photons, "mean_photons")?;
    let j = field_index("mean_photons.field", m.field)?;
    let g = grid("mean_photons.tau_min/tau_max/n", m.tau_min, m.tau_max, m.n)?;
    let curve = one_photon::photon_number_curve(
        &cfg.pump()?,
        &cfg.crystal()?,
        j,
        &g,
        &cfg.consts()?,
        &cfg.quad()?,
    )?;
    let tau: Vec<f64> = curve.tau().iter().map(|t| t / TIME_UNIT).collect();
    let name = format!("N{}", j.number());
    let mut out = Output::new(
        columns(&["tau", &name]),
        rows_of(&[tau, curve.values().to_vec()]),
        "adaptive-quadrature",
    );
    out.result("field", i64::from(j.number()));
    out.result("integral", curve.total());
    Ok(out)
}

pub fn spectrum(cfg: &RunConfig) -> anyhow::Result<Output> {
    let s = section(&cfg.spectrum, "spectrum")?;
    let j = field_index("spectrum.field", s.field)?;
    let g = grid("spectrum.nu_min/nu_max/n", s.nu_min, s.nu_max, s.n)?;
    let base = cfg.pump()?;
    let (crystal, consts, spec) = (cfg.crystal()?, cfg.consts()?, cfg.quad()?);
    let thetas = s.thetas.clone().unwrap_or_else(|| vec![cfg.pump.theta]);
    let mut cols = vec![g.points().iter().map(|v| v / FREQ_UNIT).collect::<Vec<_>>()];
    let mut names = vec!["nu".to_string()];
    for &theta in &thetas {
        let field = base.with_theta(theta)?;
        let curve = one_photon::spectrum_curve(&field, &crystal, j, &g, &consts, &spec)?;
        names.push(format!(
            "S{}@theta={}",
            j.number(),
            label(theta / TIME_UNIT)
        ));
        cols.push(curve.values().to_vec());
    }
    let mut out = Output::new(names, rows_of(&cols), "adaptive-quadrature");
    out.result("field", i64::from(j.number()));
    Ok(out)
}

fn hom_method(m: MethodKind) -> Method {
    match m {
        MethodKind::Gaussian => Method::GaussianClosedForm,
        MethodKind::Generic => Method::GenericQuadrature,
    }
}

pub fn hom(cfg: &RunConfig, flags: &Flags) -> anyhow::Result<Output> {
    let h = section(&cfg.hom, "hom")?;
    let g = grid("hom.min/max/n", h.min, h.max, h.n)?;
    let (crystal, delay, consts, spec) = (cfg.crystal()?, cfg.delay()?, cfg.consts()?, cfg.quad()?);
    let axis = || match h.axis {
        AxisKind::TauL => DelayAxis::TauL(g),
        AxisKind::Length => DelayAxis::Length(g),
    };
    let method = hom_method(h.method);
    let base = cfg.pump()?;
    let phis = h.phis.clone().unwrap_or_else(|| vec![cfg.pump.phi]);
    let suffix = |phi: f64| {
        if phis.len() > 1 {
            format!("@phi={}", label(phi))
        } else {
            String::new()
        }
    };

    let mut names = columns(&["l", "tau_l"]);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut results = toml::Table::new();
    let mut warnings = Vec::new();
    let mut worst = 0.0f64;
    for (k, &phi) in phis.iter().enumerate() {
        let field = base.with_phi(phi)?;
        let ig =
            two_photon::interferogram(&field, &crystal, &delay, axis(), method, &consts, &spec)?;
        if k == 0 {
            cols.push(ig.l().to_vec());
            cols.push(ig.tau_l().iter().map(|t| t / TIME_UNIT).collect());
            if ig.relabeled() {
                warnings.push(
                    "fields relabeled so that D > 0; rho1/rho2 refer to the swapped pair".into(),
                );
            }
            results.insert("dip_width".into(), ig.crystal().dip_width().into());
        }
        let sfx = suffix(phi);
        for (name, data) in [("rn", ig.rn()), ("rho1", ig.rho1()), ("rho2", ig.rho2())] {
            names.push(format!("{name}{sfx}"));
            cols.push(data.to_vec());
        }
        if flags.validate {
            let other = if method == Method::GenericQuadrature {
                Method::GaussianClosedForm
            } else {
                Method::GenericQuadrature
            };
            let check =
                two_photon::interferogram(&field, &crystal, &delay, axis(), other, &consts, &spec)?;
            let diff = ig
                .rn()
                .iter()
                .zip(check.rn())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(diff);
            names.push(format!("rn_{}{sfx}", other.tag()));
            cols.push(check.rn().to_vec());
        }
        results.insert(format!("phi_{k}"), phi.into());
        results.insert(format!("r01_{k}"), ig.r0().same.into());
        results.insert(format!("r02_{k}"), ig.r0().cross.into());
        record_visibility(&ig, k, &mut results, &mut warnings);
    }
    let mut out = Output::new(names, rows_of(&cols), method.tag());
    out.results = results;
    out.warnings = warnings;
    if flags.validate {
        out.result("validate_max_abs_diff", worst);
        out.result("validate_tolerance", VALIDATE_TOL);
        if !(worst < VALIDATE_TOL) {
            out.failure = Some(
                NumericalFailure(format!(
                    "max |R_n difference| {worst:e} >= {VALIDATE_TOL:e}"
                ))
                .into(),
            );
        }
    }
    Ok(out)
}

fn record_visibility(
    ig: &Interferogram<f64>,
    k: usize,
    results: &mut toml::Table,
    warnings: &mut Vec<String>,
) {
    match two_photon::visibility(ig) {
        Ok(v) => {
            results.insert(format!("visibility_{k}"), v.v.into());
            results.insert(format!("tau_l_min_{k}"), v.tau_l_min.into());
            results.insert(format!("r_min_{k}"), v.r_min.into());
            results.insert(format!("r_max_{k}"), v.r_max.into());
            results.insert(format!("r_max_is_baseline_{k}"), v.r_max_is_baseline.into());
        }
        Err(e) => warnings.push(format!("visibility of curve {k} not reported: {e}")),
    }
}

pub fn scans(cfg: &RunConfig, flags: &Flags) -> anyhow::Result<Output> {
    let s = section(&cfg.scan, "scan")?;
    let kind = flags.scan_kind.unwrap_or(s.kind);
    let (crystal, delay, consts, spec) = (cfg.crystal()?, cfg.delay()?, cfg.consts()?, cfg.quad()?);
    let template = cfg.pump()?;
    let axis = || -> anyhow::Result<GridSpec<f64>> {
        match (s.min, s.max, s.n) {
            (Some(lo), Some(hi), Some(n)) => grid("scan.min/max/n", lo, hi, n),
            _ => Err(crate::config::ConfigError(format!(
                "`scan.min/max/n` are required for {}",
                kind.tag()
            ))
            .into()),
        }
    };
    let mut out = match kind {
        ScanKind::R0VsTheta => {
            let g = axis()?;
            let rows = g
                .points()
                .into_par_iter()
                .map(|theta| {
                    let f = template.with_theta(theta)?;
                    let r = two_photon::r0_gaussian(&f, &crystal, &consts)?;
                    Ok(vec![theta / TIME_UNIT, r.total(), r.same, r.cross])
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let mut out = Output::new(
                columns(&["theta", "R0", "R01", "R02"]),
                rows,
                Method::GaussianClosedForm.tag(),
            );
            if let (Some(first), Some(last)) = (out.rows.first(), out.rows.last()) {
                let (a, b) = (first[1], last[1]);
                out.result("r0_first_over_last", a / b);
            }
            out
        }
        ScanKind::VisVsTheta => {
            let g = axis()?;
            let scan =
                two_photon::visibility_vs_theta(&template, &crystal, &delay, &g, &consts, &spec)?;
            let theta: Vec<f64> = scan.theta.iter().map(|t| t / TIME_UNIT).collect();
            let mut out = Output::new(
                columns(&["theta", "V"]),
                rows_of(&[theta, scan.v]),
                Method::GaussianClosedForm.tag(),
            );
            match scan.theta_max {
                Some((t, v)) => {
                    out.result("theta_max", t);
                    out.result("v_max", v);
                }
                None => out
                    .warnings
                    .push("no interior visibility maximum on the scanned range".into()),
            }
            out
        }
        ScanKind::VisVsPhi => {
            let g = axis()?;
            let v = two_photon::visibility_vs_phi(&template, &crystal, &delay, &g, &consts, &spec)?;
            Output::new(
                columns(&["phi", "V"]),
                rows_of(&[g.points(), v]),
                Method::GaussianClosedForm.tag(),
            )
        }
        ScanKind::ThetamaxVsTau0 => {
            let tau0 = s.tau0.clone().unwrap_or_default();
            let grid = ThetaGrid {
                span: s.theta_span,
                n: s.theta_n,
            };
            let found = two_photon::theta_max_vs_tau0(
                &tau0, s.chirp, grid, &crystal, &delay, &consts, &spec,
            )?;
            let mut out = Output::new(
                columns(&["tau0", "theta_max", "V_max"]),
                Vec::new(),
                Method::GaussianClosedForm.tag(),
            );
            for (t, m) in tau0.iter().zip(&found) {
                let (tm, vm) = m.unwrap_or((f64::NAN, f64::NAN));
                out.rows.push(vec![t / TIME_UNIT, tm / TIME_UNIT, vm]);
                if m.is_none() {
                    out.warnings.push(format!(
                        "tau0 = {t:e} s: no interior maximum (written as NaN)"
                    ));
                }
            }
            out.result("chirp", s.chirp);
            out
        }
    };
    out.result("kind", kind.tag());
    Ok(out)
}

fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn truth_on(field: &PumpField<f64>, nu: &[f64]) -> Vec<f64> {
    nu.iter().map(|&v| field.spectral_intensity(v)).collect()
}

pub fn invert(loaded: &Loaded, flags: &Flags) -> anyhow::Result<Output> {
    let cfg = &loaded.config;
    let inv = section(&cfg.invert, "invert")?;
    let j: FieldIndex = field_index("invert.field", inv.field)?;
    let (crystal, consts, spec) = (cfg.crystal()?, cfg.consts()?, cfg.quad()?);

    // A measured spectrum, or the forward spectrum of the configured pump with
    // that pump kept as ground truth.
    let (measured, truth) = match &inv.input {
        Some(p) => {
            let path = loaded.base_dir.join(p);
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let s = read_spectrum(BufReader::new(file), j)
                .with_context(|| path.display().to_string())?;
            (s, None)
        }
        None => {
            let g = grid(
                "invert.nu_min/nu_max/n",
                inv.nu_min.unwrap_or_default(),
                inv.nu_max.unwrap_or_default(),
                inv.n.unwrap_or_default(),
            )?;
            let field = cfg.pump()?;
            (
                one_photon::spectrum_curve(&field, &crystal, j, &g, &consts, &spec)?,
                Some(field),
            )
        }
    };

    let lambda = flags
        .lambdas
        .first()
        .copied()
        .or(inv.lambda)
        .unwrap_or(DEFAULT_LAMBDA);
    let sweep: Vec<f64> = if flags.lambdas.len() > 1 {
        flags.lambdas.clone()
    } else {
        inv.lambda_sweep.clone().unwrap_or_default()
    };

    let mut out = Output::new(Vec::new(), Vec::new(), "tikhonov-fft");
    out.result("field", i64::from(j.number()));
    out.result("lambda", lambda);
    out.result("residual_threshold", one_photon::MAX_RESIDUAL);
    out.result(
        "input",
        if inv.input.is_some() {
            "file"
        } else {
            "forward-model"
        },
    );

    let (nu, values) =
        match one_photon::invert_pump_spectrum(&measured, &crystal, j, lambda, &consts) {
            Ok(r) => {
                record_inversion(&mut out, &r);
                (r.pump.nu(), r.pump.values().to_vec())
            }
            Err(Error::IllPosedInversion {
                residual,
                nu,
                values,
                ..
            }) => {
                out.result("residual", residual);
                out.failure = Some(
                    Error::IllPosedInversion {
                        residual,
                        threshold: one_photon::MAX_RESIDUAL,
                        nu: Vec::new(),
                        values: Vec::new(),
                    }
                    .into(),
                );
                out.warnings
                    .push("best-effort output: forward residual above threshold".into());
                (nu, values)
            }
            Err(e) => return Err(e.into()),
        };

    let nu_col: Vec<f64> = nu.iter().map(|v| v / FREQ_UNIT).collect();
    match &truth {
        Some(field) => {
            let t = truth_on(field, &nu);
            out.result("l2_error", relative_l2(&values, &t));
            out.columns = columns(&["nu_p", "I", "I_true"]);
            out.rows = rows_of(&[nu_col, values, t]);
        }
        None => {
            out.columns = columns(&["nu_p", "I"]);
            out.rows = rows_of(&[nu_col, values]);
        }
    }

    if !sweep.is_empty() {
        let mut rows = Vec::new();
        for &l in &sweep {
            let (residual, err) =
                match one_photon::invert_pump_spectrum(&measured, &crystal, j, l, &consts) {
                    Ok(r) => {
                        let e = truth.as_ref().map_or(f64::NAN, |f| {
                            relative_l2(r.pump.values(), &truth_on(f, &r.pump.nu()))
                        });
                        (r.residual, e)
                    }
                    Err(Error::IllPosedInversion { residual, .. }) => (residual, f64::NAN),
                    Err(e) => return Err(e.into()),
                };
            rows.push(vec![l, residual, err]);
        }
        out.extra.push((
            "lambda".into(),
            columns(&["lambda", "residual", "l2_error"]),
            rows,
        ));
    }
    Ok(out)
}

fn record_inversion(out: &mut Output, r: &InversionResult<f64>) {
    out.result("residual", r.residual);
    out.result("max_negative", r.max_negative);
    if r.clamped_beyond_ringing() {
        out.warnings.push(format!(
            "negative values down to {:e} of the peak were clamped to zero",
            r.max_negative
        ));
    }
}

/// Tolerance and identity entries shared by the CSV header and the manifest.
pub fn header(loaded: &Loaded, command: &str, method: &str) -> Vec<(String, String)> {
    let q = &loaded.config.quad;
    vec![
        ("command".into(), command.into()),
        (
            "preset".into(),
            loaded.preset.clone().unwrap_or_else(|| "none".into()),
        ),
        ("config_sha256".into(), loaded.hash.clone()),
        ("method".into(), method.into()),
        ("quad.rel_tol".into(), format!("{:e}", q.rel_tol)),
        ("quad.abs_tol".into(), format!("{:e}", q.abs_tol)),
        ("quad.max_depth".into(), q.max_depth.to_string()),
        (
            "quad.truncation_eps".into(),
            format!("{:e}", q.truncation_eps),
        ),
        (
            "units".into(),
            "time 1e-13 s, frequency 1e13 rad/s, length mm".into(),
        ),
    ]
}
