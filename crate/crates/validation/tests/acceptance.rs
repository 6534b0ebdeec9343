//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use biphoton::materials::{bbo, quartz};
use biphoton::numerics::{extrema_of_samples, integrate_with_breaks, ExtremumKind};
use biphoton::one_photon::{
    invert_pump_spectrum, mean_photon_number, spectrum_curve, spectrum_from_partner, SpectrumCurve,
    DEFAULT_LAMBDA,
};
use biphoton::two_photon::{
    interferogram, r0_gaussian, r0_general, r0_two_pulse, rho_gaussian, rho_two_pulse,
    theta_max_vs_tau0, visibility, visibility_vs_phi, visibility_vs_theta, DelayAxis, Method,
    ThetaGrid,
};
use biphoton::{
    CrystalParams, FieldIndex, GridSpec, NormalizationConstants, PumpField, PumpPulse, QuadSpec,
};
use biphoton_cli::{run, Cli};
use clap::Parser;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

type Check = fn() -> Verdict;

fn consts(c_a_sq: f64) -> NormalizationConstants<f64> {
    NormalizationConstants::new(1.0, 1.0, c_a_sq).unwrap()
}

fn spec() -> QuadSpec<f64> {
    QuadSpec::default()
}

fn pulse(xi: f64, tau: f64, a: f64) -> PumpPulse<f64> {
    PumpPulse::new(xi, tau, a).unwrap()
}

fn equal_pulses(tau: f64, chirp: f64, theta: f64, phi: f64) -> PumpField<f64> {
    let p = pulse(1.0, tau, chirp);
    PumpField::two_pulse(p, p, theta, phi).unwrap()
}

fn random_pump(rng: &mut StdRng) -> PumpField<f64> {
    PumpField::two_pulse(
        pulse(
            1.0,
            rng.random_range(0.4e-13..2e-13),
            rng.random_range(-5.0..5.0),
        ),
        pulse(
            rng.random_range(0.2..2.0),
            rng.random_range(0.4e-13..2e-13),
            rng.random_range(-5.0..5.0),
        ),
        rng.random_range(-4e-13..4e-13),
        rng.random_range(0.0..2.0 * PI),
    )
    .unwrap()
}

fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn count(grid: &GridSpec<f64>, v: &[f64], kind: ExtremumKind) -> usize {
    extrema_of_samples(grid, v)
        .into_iter()
        .filter(|e| e.2 == kind)
        .count()
}

/// Runs `biphoton hom --preset fig4` in-process on a pool of `threads` workers.
fn run_fig4(out: &Path, threads: usize) -> Result<(), String> {
    let out = out.to_str().ok_or("non-UTF-8 path")?;
    let cli = Cli::parse_from(["biphoton", "hom", "--preset", "fig4", "--out", out]);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| run(&cli)).map_err(|e| format!("{e:#}"))
}

fn csv_column(path: &Path, name: &str) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(i).unwrap().parse().unwrap())
        .collect()
}

/// Closed forms against quadrature of every pulse-pair integral.
fn c1_closed_form_vs_quadrature() -> Verdict {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let q = spec();
    let k = consts(10.0);
    let mut worst = 0.0f64;
    let mut configs = 0;
    while configs < 20 {
        let f = random_pump(&mut rng);
        let c = bbo(rng.random_range(0.5..3.0)).unwrap();
        let closed = r0_gaussian(&f, &c, &k).unwrap();
        if closed.total() < 1e-3 * closed.same {
            continue; // destructive pump: rho undefined
        }
        configs += 1;
        let quad = r0_two_pulse(&f, &c, &k, &q).unwrap();
        worst = worst
            .max((closed.same - quad.same).abs() / closed.same)
            .max((closed.cross - quad.cross).abs() / closed.same);
        let dl = c.dip_width();
        let mut fast = Vec::new();
        let mut slow = Vec::new();
        for i in 0..32 {
            let tau_l = dl * (i as f64 + 0.5) / 32.0;
            fast.push(rho_gaussian(&f, &c, tau_l, &k, &q).unwrap());
            slow.push(rho_two_pulse(&f, &c, tau_l, &k, &q).unwrap());
        }
        // rho2 changes sign, so errors are relative to the largest rho1 of the curve.
        let scale = fast.iter().map(|r| r.same.abs()).fold(0.0, f64::max);
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst
                .max((a.same - b.same).abs() / scale)
                .max((a.cross - b.cross).abs() / scale);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-6 && secs <= 60.0,
        format!("20 configs x 32 delays, max relative error {worst:.2e} (<= 1e-6), {secs:.1} s (<= 60 s)"),
    )
}

fn c2_r0_factor_two() -> Verdict {
    let c = bbo(1.5).unwrap();
    let k = consts(10.0);
    let at = |theta| r0_general(&equal_pulses(1e-13, 0.0, theta, 0.0), &c, &k, &spec()).unwrap();
    let ratio = at(0.0) / at(20e-13);
    verdict(
        (ratio - 2.0).abs() <= 0.02,
        format!("R0(0)/R0(20 tau1) = {ratio:.6} (2 +- 1%)"),
    )
}

fn c3_dip_support() -> Verdict {
    let c = bbo(1.5).unwrap();
    let dl = c.dip_width();
    let f =
        PumpField::two_pulse(pulse(1.0, 1e-13, 0.0), pulse(1.5, 0.5e-13, 0.0), 0.0, PI).unwrap();
    let (k, q, d) = (consts(10.0), spec(), quartz().unwrap());
    let outside = GridSpec::new(-0.05 * dl, 1.05 * dl, 2).unwrap();
    let ig = interferogram(
        &f,
        &c,
        &d,
        DelayAxis::TauL(outside),
        Method::GaussianClosedForm,
        &k,
        &q,
    )
    .unwrap();
    let edge = ig.rn().iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    // Grid offset so neither 0 nor DL is a sample.
    let n = 1201;
    let grid = GridSpec::new(-0.1 * dl + 1e-4 * dl, 1.1 * dl + 1e-4 * dl, n).unwrap();
    let h = grid.step();
    let ig = interferogram(
        &f,
        &c,
        &d,
        DelayAxis::TauL(grid),
        Method::GaussianClosedForm,
        &k,
        &q,
    )
    .unwrap();
    let t = ig.tau_l();
    let off: Vec<bool> = ig.rn().iter().map(|r| (r - 1.0).abs() > 1e-9).collect();
    let first = off.iter().position(|&o| o).unwrap();
    let last = off.iter().rposition(|&o| o).unwrap();
    // Departure points midway between the last flat sample and the first departing one.
    let width = 0.5 * (t[last] + t[last + 1]) - 0.5 * (t[first - 1] + t[first]);
    let dl_ok = (dl - 2.76e-13).abs() < 1e-20;
    verdict(
        edge <= 1e-9 && (width - dl).abs() <= h && dl_ok,
        format!(
            "DL = {dl:.4e} s, |R_n - 1| at -0.05/1.05 DL = {edge:.1e} (<= 1e-9), width {width:.5e} vs DL (step {h:.1e})"
        ),
    )
}

fn c4_perfect_dip() -> Verdict {
    // Lambda = 0: 1/v_p is the mean of 1/v1 and 1/v2.
    let c = CrystalParams::new(1.5, 0.5 * (56.14e-13 + 54.30e-13), 56.14e-13, 54.30e-13).unwrap();
    let dl = c.dip_width();
    let f = PumpField::single(pulse(1.0, 1e-13, 0.0));
    let (k, q) = (consts(10.0), spec());
    let centre = 1.0 - rho_gaussian(&f, &c, 0.5 * dl, &k, &q).unwrap().total();
    let grid = GridSpec::new(-0.1 * dl, 1.1 * dl, 241).unwrap();
    let ig = interferogram(
        &f,
        &c,
        &quartz().unwrap(),
        DelayAxis::TauL(grid),
        Method::GaussianClosedForm,
        &k,
        &q,
    )
    .unwrap();
    let v = visibility(&ig).unwrap().v;
    verdict(
        centre <= 1e-6 && (v - 1.0).abs() <= 1e-6,
        format!("R_n(DL/2) = {centre:.2e} (<= 1e-6), V = {v:.9} (1 +- 1e-6)"),
    )
}

fn c5_three_dips() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    if let Err(e) = run_fig4(&dir.path().join("fig4.csv"), rayon::current_num_threads()) {
        return verdict(false, format!("biphoton hom --preset fig4 failed: {e}"));
    }
    let rn = csv_column(&dir.path().join("fig4.csv"), "rn");
    let minima = rn.windows(3).filter(|w| w[1] < w[0] && w[1] < w[2]).count();
    verdict(
        minima == 3,
        format!("preset fig4: {minima} interior minima (3)"),
    )
}

fn photons_total(f: &PumpField<f64>, c: &CrystalParams<f64>, j: FieldIndex) -> f64 {
    let q = spec();
    let k = consts(10.0);
    let (lo, hi) = f.time_support(1e-16).unwrap();
    let reach = c.length() * c.mismatch().d_p(j).abs();
    let breaks = [lo - reach, lo, 0.5 * (lo + hi), hi, hi + reach];
    integrate_with_breaks(
        |t| mean_photon_number(f, c, j, t, &k, &q).unwrap(),
        &breaks,
        &q,
    )
    .unwrap()
    .value
}

fn c6_pair_conservation() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let mut worst = 0.0f64;
    for i in 0..10 {
        // First configuration: single unchirped pulse; the rest chirped two-pulse pumps.
        let f = if i == 0 {
            PumpField::single(pulse(1.0, 1e-13, 0.0))
        } else {
            random_pump(&mut rng)
        };
        let c = bbo(rng.random_range(0.1..10.0)).unwrap();
        let (n1, n2) = (
            photons_total(&f, &c, FieldIndex::Signal),
            photons_total(&f, &c, FieldIndex::Idler),
        );
        worst = worst.max((n1 - n2).abs() / n1);
    }
    verdict(
        worst <= 1e-6,
        format!("10 configs, max |N1 - N2| / N1 = {worst:.2e} (<= 1e-6)"),
    )
}

fn fig3_spectrum(f: &PumpField<f64>, c: &CrystalParams<f64>, j: FieldIndex) -> SpectrumCurve<f64> {
    let grid = GridSpec::new(-8e13, 8e13, 1601).unwrap();
    spectrum_curve(f, c, j, &grid, &consts(10.0), &spec()).unwrap()
}

fn c7_partner_relation() -> Verdict {
    let start = Instant::now();
    let bbo10 = bbo(10.0).unwrap();
    // |D_p1| > |D_p2|: the signal can be rebuilt from the idler.
    let premise = CrystalParams::new(10.0, 54.60e-13, 56.14e-13, 54.30e-13).unwrap();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for theta in [0.0, 3e-13] {
        let f = equal_pulses(1e-13, 0.0, theta, 0.0);
        for (c, src, label) in [
            (&bbo10, FieldIndex::Signal, "BBO S2<-S1"),
            (&premise, FieldIndex::Idler, "premise S1<-S2"),
        ] {
            let source = fig3_spectrum(&f, c, src);
            let direct = fig3_spectrum(&f, c, src.partner());
            let rebuilt = spectrum_from_partner(&source, c, &spec()).unwrap();
            let e = relative_l2(rebuilt.values(), direct.values());
            worst = worst.max(e);
            parts.push(format!("{label} theta={:.0e}: {e:.1e}", theta));
        }
    }
    let bbo_reverse = spectrum_from_partner(
        &fig3_spectrum(
            &equal_pulses(1e-13, 0.0, 0.0, 0.0),
            &bbo10,
            FieldIndex::Idler,
        ),
        &bbo10,
        &spec(),
    )
    .is_err();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-3 && secs <= 60.0 && bbo_reverse,
        format!(
            "relative L2 {} (<= 1e-3); BBO S1<-S2 rejected (|D_p2| > |D_p1|): {bbo_reverse}; {secs:.1} s",
            parts.join(", ")
        ),
    )
}

fn c8_spectrum_structure() -> Verdict {
    let c = bbo(10.0).unwrap();
    let counts: Vec<usize> = [0.0, 3e-13, 10e-13, 50e-13]
        .iter()
        .map(|&theta| {
            let s = fig3_spectrum(
                &equal_pulses(1e-13, 0.0, theta, 0.0),
                &c,
                FieldIndex::Signal,
            );
            count(s.grid(), s.values(), ExtremumKind::Max)
        })
        .collect();
    let increasing = counts.windows(2).all(|w| w[1] > w[0]);
    let s = fig3_spectrum(&equal_pulses(1e-13, 0.0, 3e-13, PI), &c, FieldIndex::Signal);
    let (v, mid) = (s.values(), s.values().len() / 2);
    let dip_at_zero = v[mid] < v[mid - 1] && v[mid] < v[mid + 1];
    verdict(
        increasing && dip_at_zero,
        format!(
            "S1 maxima for theta = 0, 3, 10, 50 (1e-13 s): {counts:?} (strictly increasing: {increasing}); \
             phi = pi minimum at nu = 0: {dip_at_zero}"
        ),
    )
}

fn c9_visibility() -> Verdict {
    let c = bbo(1.5).unwrap();
    let (k, q, d) = (consts(10.0), spec(), quartz().unwrap());
    let template = equal_pulses(1e-13, 0.0, 0.0, 0.0);
    let thetas = GridSpec::new(0.0, 20e-13, 201).unwrap();
    let scan = visibility_vs_theta(&template, &c, &d, &thetas, &k, &q).unwrap();
    let (v0, vend) = (scan.v[0], *scan.v.last().unwrap());
    let interior = scan.theta_max.is_some_and(|(_, vm)| vm > v0);
    let ends_equal = (v0 - vend).abs() <= 0.01 * v0;
    let (tmax, vmax) = scan.theta_max.unwrap_or((f64::NAN, f64::NAN));

    let at_max = template.with_theta(2.04e-13).unwrap();
    let phis = GridSpec::new(0.0, PI / 2.0, 7).unwrap();
    let vphi = visibility_vs_phi(&at_max, &c, &d, &phis, &k, &q).unwrap();
    let decreasing = vphi.windows(2).all(|w| w[1] < w[0]);

    let dl = c.dip_width();
    let grid = GridSpec::new(-0.1 * dl, 1.1 * dl, 241).unwrap();
    let ig = interferogram(
        &at_max.with_phi(PI).unwrap(),
        &c,
        &d,
        DelayAxis::TauL(grid),
        Method::GaussianClosedForm,
        &k,
        &q,
    )
    .unwrap();
    let t = ig.tau_l();
    let peak_in_dip = extrema_of_samples(ig.grid(), ig.rn())
        .into_iter()
        .any(|(i, _, kind)| {
            kind == ExtremumKind::Max && t[i] > 0.0 && t[i] < dl && ig.rn()[i] < 1.0
        });
    verdict(
        interior && ends_equal && decreasing && peak_in_dip,
        format!(
            "V(0) = {v0:.4}, V(20 tau1) = {vend:.4}, max {vmax:.4} at theta = {tmax:.3e} s; \
             V(phi) on [0, pi/2] decreasing: {decreasing}; phi = pi peak inside dip: {peak_in_dip}"
        ),
    )
}

fn c10_theta_max() -> Verdict {
    let c = bbo(1.5).unwrap();
    let (k, q, d) = (consts(10.0), spec(), quartz().unwrap());
    let grid = ThetaGrid { span: 20.0, n: 101 };
    let tau0 = [0.5e-13, 1.0e-13, 1.5e-13, 2.0e-13];
    let plain = theta_max_vs_tau0(&tau0, 0.0, grid, &c, &d, &k, &q).unwrap();
    let chirped = theta_max_vs_tau0(&[1e-13], 5.0, grid, &c, &d, &k, &q).unwrap();
    let t: Vec<f64> = plain.iter().map(|m| m.map_or(f64::NAN, |p| p.0)).collect();
    let monotone = t.windows(2).all(|w| w[1] > w[0]);
    let tc = chirped[0].map_or(f64::NAN, |p| p.0);
    let lower = tc < t[1];
    verdict(
        monotone && lower,
        format!(
            "theta_max (1e-13 s) at tau0 = 0.5, 1, 1.5, 2: {:.3?} (increasing: {monotone}); chirp 5 at tau0 = 1: {:.3} (< {:.3}: {lower})",
            t.iter().map(|v| v / 1e-13).collect::<Vec<_>>(),
            tc / 1e-13,
            t[1] / 1e-13
        ),
    )
}

fn c11_inversion() -> Verdict {
    let c = bbo(10.0).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, f) in [
        ("single", PumpField::single(pulse(1.0, 1e-13, 0.0))),
        ("two-pulse", equal_pulses(1e-13, 0.0, 3e-13, 0.0)),
    ] {
        let s1 = fig3_spectrum(&f, &c, FieldIndex::Signal);
        let r = invert_pump_spectrum(&s1, &c, FieldIndex::Signal, DEFAULT_LAMBDA, &consts(10.0))
            .unwrap();
        let truth: Vec<f64> = r
            .pump
            .nu()
            .iter()
            .map(|&nu| f.spectral_intensity(nu))
            .collect();
        let e = relative_l2(r.pump.values(), &truth);
        ok &= e <= 0.02 && r.residual < 1e-3;
        parts.push(format!("{label}: L2 {e:.2e}, residual {:.2e}", r.residual));
    }
    verdict(
        ok,
        format!("{} (L2 <= 2%, residual < 1e-3)", parts.join("; ")),
    )
}

fn c12_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for t in [1, 4, 8] {
        let path = dir.path().join(format!("fig4-t{t}.csv"));
        if let Err(e) = run_fig4(&path, t) {
            return verdict(false, format!("{t} threads failed: {e}"));
        }
        files.push(std::fs::read(path).unwrap());
    }
    let same = files.windows(2).all(|w| w[0] == w[1]);
    verdict(
        same,
        format!("fig4 CSV at 1, 4, 8 threads byte-identical: {same}"),
    )
}

fn main() {
    let checks: [(&str, Check); 12] = [
        (
            "closed forms vs pair quadrature",
            c1_closed_form_vs_quadrature,
        ),
        ("R0 factor of two", c2_r0_factor_two),
        ("dip support and width", c3_dip_support),
        ("perfect dip for Lambda = 0", c4_perfect_dip),
        ("three-dip pattern (fig4)", c5_three_dips),
        ("pair conservation", c6_pair_conservation),
        ("signal/idler spectrum relation", c7_partner_relation),
        ("spectrum structure (fig3)", c8_spectrum_structure),
        ("visibility phenomenology", c9_visibility),
        ("theta_max monotonicity", c10_theta_max),
        ("inversion round trip", c11_inversion),
        ("determinism across threads", c12_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {tag}: {name}: {} [{:.1} s]",
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 12 criteria pass");
    } else {
        println!(
            "acceptance: {} of 12 criteria fail: {failed:?}",
            failed.len()
        );
        std::process::exit(1);
    }
}
