//! Material constants used by the figure presets.
//!
//! Type-II BBO at a 413 nm pump and 826 nm degenerate down-conversion, and a
//! quartz delay line. Inverse group velocities in s/mm.

use crate::error::Result;
use crate::model::{CrystalParams, DelayLine};
use crate::scalar::Real;

pub const BBO_INV_VP: f64 = 56.85e-13;
pub const BBO_INV_V1: f64 = 56.14e-13;
pub const BBO_INV_V2: f64 = 54.30e-13;
pub const QUARTZ_INV_G1: f64 = 51.25e-13;
pub const QUARTZ_INV_G2: f64 = 51.59e-13;

/// BBO crystal of the given length (mm).
pub fn bbo<T: Real>(length: T) -> Result<CrystalParams<T>> {
    CrystalParams::new(
        length,
        T::lit(BBO_INV_VP),
        T::lit(BBO_INV_V1),
        T::lit(BBO_INV_V2),
    )
}

/// Quartz delay line: `tau_l = 0.34e-13 s` per mm.
pub fn quartz<T: Real>() -> Result<DelayLine<T>> {
    DelayLine::new(T::lit(QUARTZ_INV_G1), T::lit(QUARTZ_INV_G2))
}
