use std::f64::consts::PI;

use biphoton::numerics::{integrate_with_breaks, QuadSpec};
use biphoton::{PumpField, PumpPulse};
use num_complex::Complex;
use proptest::prelude::*;
use rustfft::FftPlanner;

fn field(tau1: f64, a1: f64, xi2: f64, tau2: f64, a2: f64, theta: f64, phi: f64) -> PumpField<f64> {
    PumpField::two_pulse(
        PumpPulse::new(1.0, tau1, a1).unwrap(),
        PumpPulse::new(xi2, tau2, a2).unwrap(),
        theta,
        phi,
    )
    .unwrap()
}

fn energy_time(f: &PumpField<f64>) -> f64 {
    let (lo, hi) = f.time_support(1e-16).unwrap();
    let mut breaks = vec![lo];
    let mut c = f.centers();
    c.sort_by(f64::total_cmp);
    breaks.extend(c.into_iter().filter(|&x| x > lo && x < hi));
    breaks.push(hi);
    integrate_with_breaks(|t| f.intensity_time(t), &breaks, &QuadSpec::default())
        .unwrap()
        .value
}

fn energy_freq(f: &PumpField<f64>) -> f64 {
    let w = f.spectral_halfwidth(1e-16);
    let breaks = biphoton::numerics::oscillation_breaks(-w, w, f.max_delay_spread().max(1e-13));
    integrate_with_breaks(|nu| f.spectral_intensity(nu), &breaks, &QuadSpec::default())
        .unwrap()
        .value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// `∫|E(t)|² dt = 2π ∫|E(nu)|² dnu` with the `1/2π` transform convention.
    #[test]
    fn parseval(
        tau1 in 0.3e-13..2e-13f64, a1 in -6.0..6.0f64,
        xi2 in 0.0..2.0f64, tau2 in 0.3e-13..2e-13f64, a2 in -6.0..6.0f64,
        theta in -5e-13..5e-13f64, phi in 0.0..(2.0 * PI),
    ) {
        let f = field(tau1, a1, xi2, tau2, a2, theta, phi);
        let t = energy_time(&f);
        let w = 2.0 * PI * energy_freq(&f);
        prop_assert!((t - w).abs() < 1e-7 * t, "{t:e} vs {w:e}");
    }

    /// Taking the second pulse as the reference (delay `-theta`, phase `-phi`)
    /// changes only a global phase and time origin, not `|E(nu)|²`.
    #[test]
    fn spectral_intensity_ignores_reference_choice(
        theta in -5e-13..5e-13f64, phi in 0.0..(2.0 * PI), nu in -5e13..5e13f64,
    ) {
        use biphoton::pump::PumpComponent;
        let f = field(1e-13, 2.0, 0.8, 0.6e-13, -1.0, theta, phi);
        let c = f.components();
        let g = PumpField::from_components(vec![
            PumpComponent { delay: 0.0, phase: 0.0, ..c[1] },
            PumpComponent { delay: -theta, phase: -phi, ..c[0] },
        ])
        .unwrap();
        let (a, b) = (f.spectral_intensity(nu), g.spectral_intensity(nu));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-60), "{a:e} {b:e}");
    }
}

/// The closed-form spectrum against a discrete Fourier transform of `E(t)`.
#[test]
fn spectrum_matches_fft() {
    let f = field(1e-13, 3.0, 1.5, 0.5e-13, -2.0, 2.5e-13, 1.1);
    let n = 1 << 14;
    let dt = 0.01e-13;
    let t0 = -(n as f64) / 2.0 * dt;
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|k| f.envelope_time(t0 + k as f64 * dt))
        .collect();
    // E(nu) = (1/2pi) ∫ E(t) e^{i nu t} dt is an inverse DFT up to scale and phase.
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let dnu = 2.0 * PI / (n as f64 * dt);
    let peak = (0..n).map(|k| buf[k].norm()).fold(0.0, f64::max) * dt / (2.0 * PI);
    for k in (0..n).step_by(37) {
        let m = if k < n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        };
        let nu = m * dnu;
        let numeric = buf[k] * dt / (2.0 * PI) * Complex::from_polar(1.0, nu * t0);
        let exact = f.spectrum_amplitude(nu);
        assert!(
            (numeric - exact).norm() < 1e-6 * peak,
            "nu = {nu:e}: {numeric} vs {exact}"
        );
    }
}

#[test]
fn centers_sit_at_minus_delay() {
    let f = field(1e-13, 0.0, 1.0, 1e-13, 0.0, 4e-13, 0.0);
    assert_eq!(f.centers(), vec![-4e-13, 0.0]);
    assert!(f.intensity_time(-4e-13) > 0.99 * f.intensity_time(0.0));
}
