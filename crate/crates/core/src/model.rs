//! Crystal, delay-line and normalization parameters plus the small special
//! functions shared by the observables.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Down-converted field label: 1 is the signal, 2 the idler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldIndex {
    Signal,
    Idler,
}

impl FieldIndex {
    pub fn number(self) -> u8 {
        match self {
            FieldIndex::Signal => 1,
            FieldIndex::Idler => 2,
        }
    }

    /// The other field of the pair.
    pub fn partner(self) -> Self {
        match self {
            FieldIndex::Signal => FieldIndex::Idler,
            FieldIndex::Idler => FieldIndex::Signal,
        }
    }
}

impl TryFrom<u8> for FieldIndex {
    type Error = Error;

    fn try_from(j: u8) -> Result<Self> {
        match j {
            1 => Ok(FieldIndex::Signal),
            2 => Ok(FieldIndex::Idler),
            other => Err(Error::invalid(
                "field",
                format!("index must be 1 or 2, got {other}"),
            )),
        }
    }
}

/// Nonlinear crystal: length and inverse group velocities of pump, signal and idler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalParams<T> {
    length: T,
    inv_vp: T,
    inv_v1: T,
    inv_v2: T,
    omega0_1: T,
    omega0_2: T,
    relabeled: bool,
}

/// Group-velocity mismatch quantities derived from a crystal (s/mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mismatch<T> {
    pub d_p1: T,
    pub d_p2: T,
    pub lambda: T,
    pub d: T,
}

impl<T: Real> Mismatch<T> {
    /// `D_pj` for the given field.
    pub fn d_p(&self, j: FieldIndex) -> T {
        match j {
            FieldIndex::Signal => self.d_p1,
            FieldIndex::Idler => self.d_p2,
        }
    }

    /// Ratio `d = D_p2 / D_p1`.
    pub fn ratio(&self) -> Result<T> {
        if self.d_p1 == T::zero() {
            return Err(Error::DegenerateGeometry(
                "D_p1 = 0: the ratio D_p2/D_p1 is undefined".into(),
            ));
        }
        Ok(self.d_p2 / self.d_p1)
    }
}

fn positive_finite<T: Real>(name: &'static str, x: T) -> Result<T> {
    if x.is_finite() && x > T::zero() {
        Ok(x)
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and positive, got {x:e}"),
        ))
    }
}

impl<T: Real> CrystalParams<T> {
    /// `length` in mm; inverse group velocities in s/mm.
    pub fn new(length: T, inv_vp: T, inv_v1: T, inv_v2: T) -> Result<Self> {
        Ok(Self {
            length: positive_finite("crystal.length", length)?,
            inv_vp: positive_finite("crystal.inv_vp", inv_vp)?,
            inv_v1: positive_finite("crystal.inv_v1", inv_v1)?,
            inv_v2: positive_finite("crystal.inv_v2", inv_v2)?,
            omega0_1: T::zero(),
            omega0_2: T::zero(),
            relabeled: false,
        })
    }

    /// Central angular frequencies (rad/s). They only ever enter as a global phase.
    pub fn with_central_frequencies(mut self, omega0_1: T, omega0_2: T) -> Result<Self> {
        if !omega0_1.is_finite() || !omega0_2.is_finite() {
            return Err(Error::invalid("crystal.omega0", "must be finite"));
        }
        self.omega0_1 = omega0_1;
        self.omega0_2 = omega0_2;
        Ok(self)
    }

    pub fn with_length(mut self, length: T) -> Result<Self> {
        self.length = positive_finite("crystal.length", length)?;
        Ok(self)
    }

    pub fn length(&self) -> T {
        self.length
    }
    pub fn inv_vp(&self) -> T {
        self.inv_vp
    }
    pub fn inv_v1(&self) -> T {
        self.inv_v1
    }
    pub fn inv_v2(&self) -> T {
        self.inv_v2
    }
    pub fn omega0_1(&self) -> T {
        self.omega0_1
    }
    pub fn omega0_2(&self) -> T {
        self.omega0_2
    }

    /// True when [`Self::oriented`] swapped the field labels.
    pub fn relabeled(&self) -> bool {
        self.relabeled
    }

    pub fn mismatch(&self) -> Mismatch<T> {
        let half = T::lit(0.5);
        Mismatch {
            d_p1: self.inv_vp - self.inv_v1,
            d_p2: self.inv_vp - self.inv_v2,
            lambda: self.inv_vp - half * (self.inv_v1 + self.inv_v2),
            d: self.inv_v1 - self.inv_v2,
        }
    }

    /// Copy with `D = 1/v1 - 1/v2 > 0`, swapping signal and idler labels if needed.
    pub fn oriented(&self) -> Result<Self> {
        let d = self.inv_v1 - self.inv_v2;
        if d == T::zero() {
            return Err(Error::DegenerateGeometry(
                "D = 1/v1 - 1/v2 = 0: the coincidence dip has zero width".into(),
            ));
        }
        if d > T::zero() {
            return Ok(*self);
        }
        Ok(Self {
            inv_v1: self.inv_v2,
            inv_v2: self.inv_v1,
            omega0_1: self.omega0_2,
            omega0_2: self.omega0_1,
            relabeled: !self.relabeled,
            ..*self
        })
    }

    /// Dip width `D L` in seconds.
    pub fn dip_width(&self) -> T {
        (self.inv_v1 - self.inv_v2).abs() * self.length
    }
}

/// Birefringent delay material scanned in front of the beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayLine<T> {
    inv_g1: T,
    inv_g2: T,
}

impl<T: Real> DelayLine<T> {
    pub fn new(inv_g1: T, inv_g2: T) -> Result<Self> {
        positive_finite("delay.inv_g1", inv_g1)?;
        positive_finite("delay.inv_g2", inv_g2)?;
        if inv_g1 == inv_g2 {
            return Err(Error::invalid(
                "delay",
                "inv_g1 == inv_g2: the delay line cannot scan the dip",
            ));
        }
        Ok(Self { inv_g1, inv_g2 })
    }

    pub fn inv_g1(&self) -> T {
        self.inv_g1
    }
    pub fn inv_g2(&self) -> T {
        self.inv_g2
    }

    /// Relative delay `tau_l` (s) introduced by `l` mm of material.
    pub fn tau_l_of_length(&self, l: T) -> T {
        (self.inv_g2 - self.inv_g1) * l
    }

    /// Material length (mm) producing the relative delay `tau_l`.
    pub fn length_of_tau_l(&self, tau_l: T) -> T {
        tau_l / (self.inv_g2 - self.inv_g1)
    }
}

/// User-set scale factors standing in for the absolute normalization constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationConstants<T> {
    c_n: T,
    c_s: T,
    c_a_sq: T,
}

impl<T: Real> Default for NormalizationConstants<T> {
    fn default() -> Self {
        Self {
            c_n: T::one(),
            c_s: T::one(),
            c_a_sq: T::lit(10.0),
        }
    }
}

impl<T: Real> NormalizationConstants<T> {
    pub fn new(c_n: T, c_s: T, c_a_sq: T) -> Result<Self> {
        for (name, v) in [
            ("consts.c_n", c_n),
            ("consts.c_s", c_s),
            ("consts.c_a_sq", c_a_sq),
        ] {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and non-negative, got {v:e}"),
                ));
            }
        }
        Ok(Self { c_n, c_s, c_a_sq })
    }

    /// |C_N|², scale of the mean photon number.
    pub fn c_n(&self) -> T {
        self.c_n
    }
    /// |C_S|², scale of the spectra.
    pub fn c_s(&self) -> T {
        self.c_s
    }
    /// |C_A|², scale of the two-photon quantities.
    pub fn c_a_sq(&self) -> T {
        self.c_a_sq
    }
}

/// Indicator of the open interval (0, 1).
pub fn rect<T: Real>(x: T) -> T {
    if x > T::zero() && x < T::one() {
        T::one()
    } else {
        T::zero()
    }
}

/// `sin(x)/x`, continued to 1 at the origin.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}
