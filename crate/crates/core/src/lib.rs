//! Simulation of pulsed entangled photon pairs from spontaneous parametric
//! down-conversion pumped by coherent superpositions of chirped Gaussian pulses.
//!
//! One-photon observables (time-resolved mean photon number, spectra, the
//! partner-spectrum relation and pump-spectrum inversion) live in
//! [`one_photon`]; the Hong-Ou-Mandel coincidence interferogram, its
//! two-pulse decomposition and Gaussian closed forms live in [`two_photon`].
//! All math is generic over [`Real`]; the `*64` aliases below fix `f64`.
//!
//! Units: seconds, millimetres and rad/s throughout.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod materials;
pub mod model;
pub mod numerics;
pub mod one_photon;
pub mod pump;
pub mod scalar;
pub mod two_photon;

pub use error::{Error, Result};
pub use model::{
    rect, sinc, CrystalParams, DelayLine, FieldIndex, Mismatch, NormalizationConstants,
};
pub use numerics::{GridSpec, QuadSpec};
pub use pump::{PumpField, PumpPulse};
pub use scalar::Real;

pub type CrystalParams64 = CrystalParams<f64>;
pub type DelayLine64 = DelayLine<f64>;
pub type NormalizationConstants64 = NormalizationConstants<f64>;
pub type PumpPulse64 = PumpPulse<f64>;
pub type PumpField64 = PumpField<f64>;
pub type GridSpec64 = GridSpec<f64>;
pub type QuadSpec64 = QuadSpec<f64>;
pub type SpectrumCurve64 = one_photon::SpectrumCurve<f64>;
pub type PhotonNumberCurve64 = one_photon::PhotonNumberCurve<f64>;
pub type Interferogram64 = two_photon::Interferogram<f64>;
pub type VisibilityResult64 = two_photon::VisibilityResult<f64>;
pub type CrystalParams32 = CrystalParams<f32>;
pub type PumpField32 = PumpField<f32>;

/// Scale of the time axis in CSV output and figure captions (10⁻¹³ s).
pub const TIME_UNIT: f64 = 1e-13;
/// Scale of the frequency axis in CSV output (10¹³ rad/s).
pub const FREQ_UNIT: f64 = 1e13;
