//! Front end of the `biphoton` command: configuration loading, command
//! dispatch, CSV and manifest output. Each run writes a CSV table and a
//! `<out>.manifest.toml` next to it.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical failure,
//! 4 ill-posed inversion (best-effort output is still written).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use anyhow::Context;
use biphoton::io::write_table;
use biphoton::Error;
use clap::{Parser, Subcommand, ValueEnum};

pub use commands::NumericalFailure;
pub use config::ConfigError;

use commands::{Flags, Output};
use config::{Loaded, ScanKind};

#[derive(Parser, Debug)]
#[command(
    name = "biphoton",
    version,
    about = "Pulsed SPDC one- and two-photon observables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (flat `section.key = value` TOML); overrides the preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Built-in parameter set: fig2 ... fig9, roundtrip.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Recompute the interferogram by full quadrature and compare (hom).
    #[arg(long, global = true)]
    pub validate: bool,
    /// Tikhonov weight for `invert`; repeat to sweep.
    #[arg(long, global = true)]
    pub lambda: Vec<f64>,
    /// Output CSV path; defaults to `output.path`, then `<command>.csv`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum Command {
    /// Time-resolved mean photon number N_j(tau).
    MeanPhotons,
    /// Spectrum S_j(nu) for one or more pulse delays.
    Spectrum,
    /// Hong-Ou-Mandel interferogram R_n(tau_l).
    Hom,
    /// Parameter scans of R0, visibility and theta_max.
    Scans {
        /// Overrides `scan.kind`.
        #[arg(long, value_enum)]
        kind: Option<ScanArg>,
    },
    /// Pump spectral intensity recovered from a spectrum.
    Invert,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ScanArg {
    R0VsTheta,
    VisVsTheta,
    VisVsPhi,
    ThetamaxVsTau0,
}

impl From<ScanArg> for ScanKind {
    fn from(a: ScanArg) -> Self {
        match a {
            ScanArg::R0VsTheta => ScanKind::R0VsTheta,
            ScanArg::VisVsTheta => ScanKind::VisVsTheta,
            ScanArg::VisVsPhi => ScanKind::VisVsPhi,
            ScanArg::ThetamaxVsTau0 => ScanKind::ThetamaxVsTau0,
        }
    }
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::MeanPhotons => "mean-photons",
            Command::Spectrum => "spectrum",
            Command::Hom => "hom",
            Command::Scans { .. } => "scans",
            Command::Invert => "invert",
        }
    }
}

/// Process exit code for a failed run.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if cause.is::<NumericalFailure>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::InvalidParameter { .. }
                | Error::DegenerateGeometry(_)
                | Error::Parse { .. }
                | Error::Io(_) => 2,
                Error::Quadrature { .. }
                | Error::NotUnimodal { .. }
                | Error::UndefinedVisibility(_)
                | Error::Domain(_) => 3,
                Error::IllPosedInversion { .. } => 4,
            };
        }
        if cause.is::<std::io::Error>() {
            return 2;
        }
    }
    1
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn write_csv(
    path: &Path,
    meta: &[(String, String)],
    columns: &[String],
    rows: &[Vec<f64>],
) -> anyhow::Result<()> {
    let file =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    write_table(&mut w, meta, columns, rows)?;
    Ok(())
}

fn manifest(
    loaded: &Loaded,
    command: &str,
    out: &Output,
    files: &[PathBuf],
    status: &str,
) -> anyhow::Result<String> {
    let mut run = toml::Table::new();
    for (k, v) in commands::header(loaded, command, out.method) {
        if !k.starts_with("quad.") {
            run.insert(k, v.into());
        }
    }
    run.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    run.insert("status".into(), status.into());
    run.insert(
        "files".into(),
        files
            .iter()
            .map(|p| {
                toml::Value::from(
                    p.file_name()
                        .unwrap_or_default()
                        .to_string_lossy()
                        .into_owned(),
                )
            })
            .collect::<Vec<_>>()
            .into(),
    );
    let q = &loaded.config.quad;
    let mut tol = toml::Table::new();
    tol.insert("rel_tol".into(), q.rel_tol.into());
    tol.insert("abs_tol".into(), q.abs_tol.into());
    tol.insert("max_depth".into(), i64::from(q.max_depth).into());
    tol.insert("truncation_eps".into(), q.truncation_eps.into());
    let mut config = toml::Table::new();
    for (k, v) in &loaded.flat {
        config.insert(k.clone(), v.clone());
    }
    let mut doc = toml::Table::new();
    doc.insert("run".into(), run.into());
    doc.insert("tolerances".into(), tol.into());
    doc.insert("results".into(), out.results.clone().into());
    doc.insert(
        "warnings".into(),
        out.warnings
            .iter()
            .cloned()
            .map(toml::Value::from)
            .collect::<Vec<_>>()
            .into(),
    );
    doc.insert("config".into(), config.into());
    Ok(toml::to_string(&doc)?)
}

/// Runs one command in the current rayon pool. `cli.threads` is applied by the
/// binary, not here.
pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let loaded = config::load(cli.config.as_deref(), cli.preset.as_deref())?;
    loaded.config.validate()?;
    for &l in &cli.lambda {
        if !(l.is_finite() && l > 0.0) {
            return Err(ConfigError(format!("--lambda {l}: must be finite and positive")).into());
        }
    }
    let flags = Flags {
        validate: cli.validate,
        lambdas: cli.lambda.clone(),
        scan_kind: match cli.command {
            Command::Scans { kind } => kind.map(Into::into),
            _ => None,
        },
    };
    let cfg = &loaded.config;
    let output = match cli.command {
        Command::MeanPhotons => commands::mean_photons(cfg),
        Command::Spectrum => commands::spectrum(cfg),
        Command::Hom => commands::hom(cfg, &flags),
        Command::Scans { .. } => commands::scans(cfg, &flags),
        Command::Invert => commands::invert(&loaded, &flags),
    }?;

    let name = cli.command.name();
    let path = cli
        .out
        .clone()
        .or_else(|| cfg.output.path.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
    let meta = commands::header(&loaded, name, output.method);
    write_csv(&path, &meta, &output.columns, &output.rows)?;
    let mut files = vec![path.clone()];
    for (suffix, columns, rows) in &output.extra {
        let p = sibling(&path, &format!(".{suffix}.csv"));
        write_csv(&p, &meta, columns, rows)?;
        files.push(p);
    }
    let status = match &output.failure {
        None => "ok",
        Some(e) if exit_code(e) == 4 => "ill-posed",
        Some(_) => "failed-check",
    };
    let text = manifest(&loaded, name, &output, &files, status)?;
    let mpath = sibling(&path, ".manifest.toml");
    std::fs::write(&mpath, text).with_context(|| format!("writing {}", mpath.display()))?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    match output.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
