//! Pump field as a coherent superposition of chirped Gaussian pulses.
//!
//! A pulse with amplitude `xi`, duration `tau` and chirp `a` has the envelope
//! `xi * exp(-alpha t^2)` with `alpha = (1 + i a) / tau^2`. Spectra use the
//! convention `E(nu) = (1/2pi) ∫ E(t) exp(i nu t) dt`, so a pulse entering as
//! `E(t + theta)` picks up the spectral phase `exp(-i nu theta)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One chirped Gaussian pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpPulse<T> {
    xi: T,
    tau: T,
    chirp: T,
}

impl<T: Real> PumpPulse<T> {
    pub fn new(xi: T, tau: T, chirp: T) -> Result<Self> {
        if !(xi.is_finite() && xi >= T::zero()) {
            return Err(Error::invalid(
                "pump.xi",
                format!("must be finite and >= 0, got {xi:e}"),
            ));
        }
        if !(tau.is_finite() && tau > T::zero()) {
            return Err(Error::invalid(
                "pump.tau",
                format!("must be finite and > 0, got {tau:e}"),
            ));
        }
        if !chirp.is_finite() {
            return Err(Error::invalid("pump.a", "must be finite"));
        }
        Ok(Self { xi, tau, chirp })
    }

    pub fn xi(&self) -> T {
        self.xi
    }
    pub fn tau(&self) -> T {
        self.tau
    }
    pub fn chirp(&self) -> T {
        self.chirp
    }

    /// `alpha = (1 + i a) / tau^2` (s⁻²); its real part is always positive.
    pub fn alpha(&self) -> Complex<T> {
        Complex::new(T::one(), self.chirp) / (self.tau * self.tau)
    }

    pub fn with_xi(self, xi: T) -> Result<Self> {
        Self::new(xi, self.tau, self.chirp)
    }

    /// Envelope at time `t` (pulse centred on `t = 0`).
    pub fn envelope(&self, t: T) -> Complex<T> {
        (-self.alpha() * (t * t)).exp() * self.xi
    }

    /// Closed-form spectral amplitude at angular frequency `nu`.
    pub fn spectrum(&self, nu: T) -> Complex<T> {
        let one_ia = Complex::new(T::one(), self.chirp);
        let two_sqrt_pi = T::lit(2.0) * T::PI().sqrt();
        let prefactor = Complex::from(self.xi * self.tau / two_sqrt_pi) / one_ia.sqrt();
        let exponent = -Complex::from(self.tau * self.tau * nu * nu) / (one_ia * T::lit(4.0));
        prefactor * exponent.exp()
    }

    /// Half-width in time beyond which `|E|^2 < eps * peak`.
    pub fn time_halfwidth(&self, eps: T) -> T {
        self.tau * (-eps.ln() / T::lit(2.0)).sqrt()
    }

    /// Half-width in frequency beyond which `|E(nu)|^2 < eps * peak`.
    pub fn spectral_halfwidth(&self, eps: T) -> T {
        let stretch = T::one() + self.chirp * self.chirp;
        (T::lit(2.0) * stretch * (-eps.ln())).sqrt() / self.tau
    }
}

/// A pulse together with its delay and phase inside the superposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpComponent<T> {
    pub pulse: PumpPulse<T>,
    /// Enters as `E(t + delay)`: positive values move the pulse earlier.
    pub delay: T,
    pub phase: T,
}

impl<T: Real> PumpComponent<T> {
    /// Time of the intensity maximum.
    pub fn center(&self) -> T {
        -self.delay
    }

    pub fn envelope(&self, t: T) -> Complex<T> {
        self.pulse.envelope(t + self.delay) * Complex::from_polar(T::one(), self.phase)
    }

    pub fn spectrum(&self, nu: T) -> Complex<T> {
        self.pulse.spectrum(nu) * Complex::from_polar(T::one(), self.phase - nu * self.delay)
    }
}

/// Pump envelope `E1(t) + exp(i phi) E2(t + theta)`, generalised internally to
/// any number of delayed and phased pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpField<T> {
    components: Vec<PumpComponent<T>>,
    theta: T,
    phi: T,
}

impl<T: Real> PumpField<T> {
    pub fn two_pulse(pulse1: PumpPulse<T>, pulse2: PumpPulse<T>, theta: T, phi: T) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::invalid("pump.theta", "must be finite"));
        }
        if !phi.is_finite() {
            return Err(Error::invalid("pump.phi", "must be finite"));
        }
        Ok(Self {
            components: vec![
                PumpComponent {
                    pulse: pulse1,
                    delay: T::zero(),
                    phase: T::zero(),
                },
                PumpComponent {
                    pulse: pulse2,
                    delay: theta,
                    phase: phi,
                },
            ],
            theta,
            phi,
        })
    }

    /// Two-pulse field whose second pulse has zero amplitude.
    pub fn single(pulse: PumpPulse<T>) -> Self {
        let silent = PumpPulse {
            xi: T::zero(),
            ..pulse
        };
        Self::two_pulse(pulse, silent, T::zero(), T::zero()).expect("finite defaults")
    }

    /// Arbitrary superposition. `pulse1`/`pulse2`/`theta`/`phi` then refer to the
    /// first two entries.
    pub fn from_components(components: Vec<PumpComponent<T>>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::invalid(
                "pump",
                "at least two components are required",
            ));
        }
        if components
            .iter()
            .any(|c| !c.delay.is_finite() || !c.phase.is_finite())
        {
            return Err(Error::invalid(
                "pump",
                "component delays and phases must be finite",
            ));
        }
        let base = components[0];
        if base.delay != T::zero() || base.phase != T::zero() {
            return Err(Error::invalid(
                "pump",
                "the first component is the reference and must have zero delay and phase",
            ));
        }
        let (theta, phi) = (components[1].delay, components[1].phase);
        Ok(Self {
            components,
            theta,
            phi,
        })
    }

    pub fn components(&self) -> &[PumpComponent<T>] {
        &self.components
    }
    pub fn pulse1(&self) -> &PumpPulse<T> {
        &self.components[0].pulse
    }
    pub fn pulse2(&self) -> &PumpPulse<T> {
        &self.components[1].pulse
    }
    pub fn theta(&self) -> T {
        self.theta
    }
    pub fn phi(&self) -> T {
        self.phi
    }

    /// True when this is exactly the two-pulse model (no extra components).
    pub fn is_two_pulse(&self) -> bool {
        self.components.len() == 2
    }

    pub fn with_theta(&self, theta: T) -> Result<Self> {
        Self::two_pulse(*self.pulse1(), *self.pulse2(), theta, self.phi)
    }

    pub fn with_phi(&self, phi: T) -> Result<Self> {
        Self::two_pulse(*self.pulse1(), *self.pulse2(), self.theta, phi)
    }

    pub fn with_pulses(&self, pulse1: PumpPulse<T>, pulse2: PumpPulse<T>) -> Result<Self> {
        Self::two_pulse(pulse1, pulse2, self.theta, self.phi)
    }

    /// Components with nonzero amplitude.
    pub fn active(&self) -> impl Iterator<Item = &PumpComponent<T>> + '_ {
        self.components.iter().filter(|c| c.pulse.xi > T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.active().next().is_none()
    }

    /// Complex envelope at time `t` (s).
    pub fn envelope_time(&self, t: T) -> Complex<T> {
        self.components
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, c| {
                acc + c.envelope(t)
            })
    }

    pub fn intensity_time(&self, t: T) -> T {
        self.envelope_time(t).norm_sqr()
    }

    /// Complex spectral amplitude at angular frequency `nu` (rad/s).
    pub fn spectrum_amplitude(&self, nu: T) -> Complex<T> {
        self.components
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, c| {
                acc + c.spectrum(nu)
            })
    }

    /// `|E(nu)|^2`.
    pub fn spectral_intensity(&self, nu: T) -> T {
        self.spectrum_amplitude(nu).norm_sqr()
    }

    /// Interval outside which the pump intensity is below `eps` of any pulse peak.
    /// Zero pump yields `None`.
    pub fn time_support(&self, eps: T) -> Option<(T, T)> {
        self.active().fold(None, |acc, c| {
            let w = c.pulse.time_halfwidth(eps);
            let (lo, hi) = (c.center() - w, c.center() + w);
            Some(match acc {
                None => (lo, hi),
                Some((a, b)) => (a.min(lo), b.max(hi)),
            })
        })
    }

    /// Intensity maxima of the individual pulses, sorted; handy quadrature breakpoints.
    pub fn centers(&self) -> Vec<T> {
        let mut c: Vec<T> = self.active().map(|c| c.center()).collect();
        c.sort_by(|a, b| a.partial_cmp(b).expect("finite centers"));
        c.dedup();
        c
    }

    /// Half-width of the frequency band holding the spectral intensity above `eps` of peak.
    pub fn spectral_halfwidth(&self, eps: T) -> T {
        self.active()
            .map(|c| c.pulse.spectral_halfwidth(eps))
            .fold(T::zero(), T::max)
    }

    /// Largest mutual delay between active pulses: the fastest spectral beat is
    /// `cos(nu * max_delay_spread)`.
    pub fn max_delay_spread(&self) -> T {
        let c = self.centers();
        match (c.first(), c.last()) {
            (Some(&a), Some(&b)) => b - a,
            _ => T::zero(),
        }
    }

    /// Copy with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        let mut out = self.clone();
        for c in &mut out.components {
            c.pulse = c.pulse.with_xi(c.pulse.xi * factor)?;
        }
        Ok(out)
    }
}
