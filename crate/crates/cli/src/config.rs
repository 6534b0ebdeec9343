//! Run configuration: flat `section.key = value` TOML, optionally layered on a
//! built-in preset, validated into library objects at load time.

use std::fmt;
use std::path::{Path, PathBuf};

use biphoton::materials;
use biphoton::numerics::QuadSpec;
use biphoton::{
    CrystalParams, DelayLine, FieldIndex, GridSpec, NormalizationConstants, PumpField, PumpPulse,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A configuration problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("fig9", include_str!("../presets/fig9.toml")),
    ("roundtrip", include_str!("../presets/roundtrip.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    pub xi1: f64,
    pub tau1: f64,
    #[serde(default)]
    pub a1: f64,
    #[serde(default)]
    pub xi2: f64,
    pub tau2: Option<f64>,
    #[serde(default)]
    pub a2: f64,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSection {
    pub length: f64,
    #[serde(default = "bbo_vp")]
    pub inv_vp: f64,
    #[serde(default = "bbo_v1")]
    pub inv_v1: f64,
    #[serde(default = "bbo_v2")]
    pub inv_v2: f64,
}

fn bbo_vp() -> f64 {
    materials::BBO_INV_VP
}
fn bbo_v1() -> f64 {
    materials::BBO_INV_V1
}
fn bbo_v2() -> f64 {
    materials::BBO_INV_V2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DelaySection {
    pub inv_g1: f64,
    pub inv_g2: f64,
}

impl Default for DelaySection {
    fn default() -> Self {
        Self {
            inv_g1: materials::QUARTZ_INV_G1,
            inv_g2: materials::QUARTZ_INV_G2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstsSection {
    pub c_n: f64,
    pub c_s: f64,
    pub c_a_sq: f64,
}

impl Default for ConstsSection {
    fn default() -> Self {
        let d = NormalizationConstants::<f64>::default();
        Self {
            c_n: d.c_n(),
            c_s: d.c_s(),
            c_a_sq: d.c_a_sq(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub truncation_eps: f64,
}

impl Default for QuadSection {
    fn default() -> Self {
        let d = QuadSpec::<f64>::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_depth: d.max_depth,
            truncation_eps: d.truncation_eps,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanPhotonsSection {
    #[serde(default = "one")]
    pub field: u8,
    pub tau_min: f64,
    pub tau_max: f64,
    pub n: usize,
}

fn one() -> u8 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    #[serde(default = "one")]
    pub field: u8,
    pub nu_min: f64,
    pub nu_max: f64,
    pub n: usize,
    /// Pulse delays, one column each; defaults to `pump.theta`.
    pub thetas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    TauL,
    Length,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Gaussian,
    Generic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomSection {
    #[serde(default = "tau_l_axis")]
    pub axis: AxisKind,
    pub min: f64,
    pub max: f64,
    pub n: usize,
    /// Relative phases, one curve each; defaults to `pump.phi`.
    pub phis: Option<Vec<f64>>,
    #[serde(default = "gaussian")]
    pub method: MethodKind,
}

fn tau_l_axis() -> AxisKind {
    AxisKind::TauL
}
fn gaussian() -> MethodKind {
    MethodKind::Gaussian
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanKind {
    R0VsTheta,
    VisVsTheta,
    VisVsPhi,
    ThetamaxVsTau0,
}

impl ScanKind {
    pub fn tag(self) -> &'static str {
        match self {
            ScanKind::R0VsTheta => "r0-vs-theta",
            ScanKind::VisVsTheta => "vis-vs-theta",
            ScanKind::VisVsPhi => "vis-vs-phi",
            ScanKind::ThetamaxVsTau0 => "thetamax-vs-tau0",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub kind: ScanKind,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub n: Option<usize>,
    pub tau0: Option<Vec<f64>>,
    #[serde(default)]
    pub chirp: f64,
    #[serde(default = "theta_span")]
    pub theta_span: f64,
    #[serde(default = "theta_n")]
    pub theta_n: usize,
}

fn theta_span() -> f64 {
    20.0
}
fn theta_n() -> usize {
    101
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertSection {
    #[serde(default = "one")]
    pub field: u8,
    /// Measured spectrum CSV (nu in 1e13 rad/s, S). Without it the spectrum is
    /// computed from the configured pump and the recovery is checked against it.
    pub input: Option<PathBuf>,
    pub lambda: Option<f64>,
    pub lambda_sweep: Option<Vec<f64>>,
    pub nu_min: Option<f64>,
    pub nu_max: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pump: PumpSection,
    pub crystal: CrystalSection,
    #[serde(default)]
    pub delay: DelaySection,
    #[serde(default)]
    pub consts: ConstsSection,
    #[serde(default)]
    pub quad: QuadSection,
    pub mean_photons: Option<MeanPhotonsSection>,
    pub spectrum: Option<SpectrumSection>,
    pub hom: Option<HomSection>,
    pub scan: Option<ScanSection>,
    pub invert: Option<InvertSection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// A loaded configuration with its provenance.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub preset: Option<String>,
    /// Directory relative paths in the config resolve against.
    pub base_dir: PathBuf,
    /// SHA-256 of the merged configuration in canonical TOML form.
    pub hash: String,
    /// Every setting as `(key.path, value)`, sorted.
    pub flat: Vec<(String, toml::Value)>,
}

fn parse_table(text: &str, origin: &str) -> anyhow::Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| config_err(format!("{origin}: {e}")))
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.clone())),
        }
    }
}

/// Loads `preset` (if any) and overlays the file at `path` (if any).
pub fn load(path: Option<&Path>, preset: Option<&str>) -> anyhow::Result<Loaded> {
    let mut table = toml::Table::new();
    if let Some(name) = preset {
        let text = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                config_err(format!(
                    "unknown preset `{name}` (available: {})",
                    preset_names().collect::<Vec<_>>().join(", ")
                ))
            })?;
        table = parse_table(text, &format!("preset {name}"))?;
    }
    let mut base_dir = PathBuf::from(".");
    if let Some(p) = path {
        let text =
            std::fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
        merge(&mut table, parse_table(&text, &p.display().to_string())?);
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            base_dir = dir.to_path_buf();
        }
    }
    if path.is_none() && preset.is_none() {
        return Err(config_err("either --config or --preset is required"));
    }
    let config: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(table.clone()))
        .map_err(|e| config_err(format!("at `{}`: {}", e.path(), e.inner())))?;
    let canonical = toml::to_string(&table).map_err(|e| config_err(e.to_string()))?;
    let digest = Sha256::digest(canonical.as_bytes());
    let hash = digest.iter().map(|b| format!("{b:02x}")).collect();
    let mut flat = Vec::new();
    flatten("", &table, &mut flat);
    flat.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Loaded {
        config,
        preset: preset.map(str::to_string),
        base_dir,
        hash,
        flat,
    })
}

fn at<T>(key: &str, r: biphoton::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| config_err(format!("`{key}`: {e}")))
}

pub fn field_index(key: &str, j: u8) -> anyhow::Result<FieldIndex> {
    at(key, FieldIndex::try_from(j))
}

pub fn grid(key: &str, lo: f64, hi: f64, n: usize) -> anyhow::Result<GridSpec<f64>> {
    at(key, GridSpec::new(lo, hi, n))
}

impl RunConfig {
    pub fn pump(&self) -> anyhow::Result<PumpField<f64>> {
        let p = &self.pump;
        let p1 = at("pump.xi1/tau1/a1", PumpPulse::new(p.xi1, p.tau1, p.a1))?;
        let p2 = at(
            "pump.xi2/tau2/a2",
            PumpPulse::new(p.xi2, p.tau2.unwrap_or(p.tau1), p.a2),
        )?;
        at(
            "pump.theta/phi",
            PumpField::two_pulse(p1, p2, p.theta, p.phi),
        )
    }

    pub fn crystal(&self) -> anyhow::Result<CrystalParams<f64>> {
        let c = &self.crystal;
        at(
            "crystal",
            CrystalParams::new(c.length, c.inv_vp, c.inv_v1, c.inv_v2),
        )
    }

    pub fn delay(&self) -> anyhow::Result<DelayLine<f64>> {
        at(
            "delay",
            DelayLine::new(self.delay.inv_g1, self.delay.inv_g2),
        )
    }

    pub fn consts(&self) -> anyhow::Result<NormalizationConstants<f64>> {
        let c = &self.consts;
        at(
            "consts",
            NormalizationConstants::new(c.c_n, c.c_s, c.c_a_sq),
        )
    }

    pub fn quad(&self) -> anyhow::Result<QuadSpec<f64>> {
        let q = &self.quad;
        let spec = QuadSpec {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_depth: q.max_depth,
            truncation_eps: q.truncation_eps,
        };
        at("quad", spec.validate())?;
        Ok(spec)
    }

    /// Checks every section that is present, not only the one a command uses.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.pump()?;
        self.crystal()?;
        self.delay()?;
        self.consts()?;
        self.quad()?;
        if let Some(m) = &self.mean_photons {
            field_index("mean_photons.field", m.field)?;
            grid("mean_photons.tau_min/tau_max/n", m.tau_min, m.tau_max, m.n)?;
        }
        if let Some(s) = &self.spectrum {
            field_index("spectrum.field", s.field)?;
            grid("spectrum.nu_min/nu_max/n", s.nu_min, s.nu_max, s.n)?;
            if s.thetas
                .as_ref()
                .is_some_and(|t| t.is_empty() || t.iter().any(|v| !v.is_finite()))
            {
                return Err(config_err(
                    "`spectrum.thetas`: need at least one finite delay",
                ));
            }
        }
        if let Some(h) = &self.hom {
            grid("hom.min/max/n", h.min, h.max, h.n)?;
            if h.phis
                .as_ref()
                .is_some_and(|p| p.is_empty() || p.iter().any(|v| !v.is_finite()))
            {
                return Err(config_err("`hom.phis`: need at least one finite phase"));
            }
        }
        if let Some(s) = &self.scan {
            match s.kind {
                ScanKind::ThetamaxVsTau0 => {
                    let t = s.tau0.as_deref().unwrap_or(&[]);
                    if t.is_empty() || t.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                        return Err(config_err("`scan.tau0`: need a list of positive durations"));
                    }
                    if !(s.theta_span.is_finite() && s.theta_span > 0.0) || s.theta_n < 3 {
                        return Err(config_err(
                            "`scan.theta_span/theta_n`: need span > 0 and at least 3 samples",
                        ));
                    }
                }
                _ => {
                    let (Some(lo), Some(hi), Some(n)) = (s.min, s.max, s.n) else {
                        return Err(config_err(format!(
                            "`scan.min/max/n` are required for {}",
                            s.kind.tag()
                        )));
                    };
                    grid("scan.min/max/n", lo, hi, n)?;
                }
            }
        }
        if let Some(i) = &self.invert {
            field_index("invert.field", i.field)?;
            if let Some(l) = i.lambda {
                if !(l.is_finite() && l > 0.0) {
                    return Err(config_err("`invert.lambda`: must be finite and positive"));
                }
            }
            if i.input.is_none() {
                let (Some(lo), Some(hi), Some(n)) = (i.nu_min, i.nu_max, i.n) else {
                    return Err(config_err(
                        "`invert.nu_min/nu_max/n` are required without `invert.input`",
                    ));
                };
                grid("invert.nu_min/nu_max/n", lo, hi, n)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_loads_and_validates() {
        for name in preset_names() {
            let l = load(None, Some(name)).unwrap();
            l.config.validate().unwrap();
            assert_eq!(l.hash.len(), 64);
        }
    }

    #[test]
    fn unknown_key_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "pump.tua1 = 1e-13\n").unwrap();
        let e = load(Some(&p), Some("fig4")).unwrap_err().to_string();
        assert!(e.contains("pump") && e.contains("tua1"), "{e}");
    }

    #[test]
    fn overlay_changes_hash() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "pump.phi = 0.0\n").unwrap();
        let a = load(None, Some("fig4")).unwrap();
        let b = load(Some(&p), Some("fig4")).unwrap();
        assert_ne!(a.hash, b.hash);
        assert_eq!(b.config.pump.phi, 0.0);
    }

    #[test]
    fn field_three_rejected() {
        let mut l = load(None, Some("fig2")).unwrap();
        l.config.mean_photons.as_mut().unwrap().field = 3;
        assert!(l.config.validate().is_err());
    }
}
