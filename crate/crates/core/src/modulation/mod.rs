//! Constant-envelope symbols whose harmonics carry QAM.
//!
//! A symbol sweeps the reflection phase linearly by `Δφ` over one period
//! `Ts`, circularly shifted by `t0`. The Fourier coefficient of order `l`
//! of that periodic waveform is the information-bearing quantity: `Δφ`
//! sets its amplitude and `t0` its phase.

mod harmonic;
mod qam;
mod solver;
mod waveform;

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::arg_2pi;

pub use harmonic::{discrete_harmonic_coefficient, discretization_ratio, harmonic_coefficient};
pub use qam::{demap_symbol, map_bits_16qam, Constellation, QamMapEntry, TABLE_16QAM};
pub use solver::{
    a1_max, profile_harmonic, solve_discrete_mapping, solve_mapping, solve_table_16qam,
    DiscreteDesign,
    MappingSolution, QUADRATURE_PANELS,
};
pub use waveform::{discrete_waveform, ideal_waveform, Waveform};

/// Number of constant phase segments per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Steps {
    /// Continuous phase ramp.
    Unbounded,
    Finite(u32),
}

impl Steps {
    pub fn finite(self) -> Option<u32> {
        match self {
            Steps::Unbounded => None,
            Steps::Finite(q) => Some(q),
        }
    }
}

impl fmt::Display for Steps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Steps::Unbounded => write!(f, "inf"),
            Steps::Finite(q) => write!(f, "{q}"),
        }
    }
}

impl std::str::FromStr for Steps {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "unbounded" | "∞" => Ok(Steps::Unbounded),
            other => {
                let q: u32 = other
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid step count `{other}`")))?;
                if q == 0 {
                    return Err(Error::Parse("step count must be at least 1".into()));
                }
                Ok(Steps::Finite(q))
            }
        }
    }
}

/// One constant-envelope baseband symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolParams {
    t0: f64,
    delta_phi: f64,
    ts: f64,
    steps: Steps,
}

impl SymbolParams {
    pub fn new(t0: f64, delta_phi: f64, ts: f64, steps: Steps) -> Result<Self> {
        if !(ts > 0.0) || !ts.is_finite() {
            return Err(Error::Domain("symbol period must be positive".into()));
        }
        if !(0.0..ts).contains(&t0) {
            return Err(Error::Domain(format!("t0 = {t0} outside [0, Ts)")));
        }
        if !(delta_phi >= 0.0) || !delta_phi.is_finite() {
            return Err(Error::Domain("Δφ must be finite and non-negative".into()));
        }
        if steps == Steps::Finite(0) {
            return Err(Error::Domain("step count must be at least 1".into()));
        }
        Ok(SymbolParams {
            t0,
            delta_phi,
            ts,
            steps,
        })
    }

    /// Params with `Ts = 1`, so `t0` is a fraction of the symbol period.
    pub fn normalized(t0_frac: f64, delta_phi: f64, steps: Steps) -> Result<Self> {
        SymbolParams::new(t0_frac, delta_phi, 1.0, steps)
    }

    /// Continuous-phase params; `t0_frac` is wrapped into `[0, 1)`.
    pub fn ideal(t0_frac: f64, delta_phi: f64) -> Result<Self> {
        let t0 = t0_frac.rem_euclid(1.0);
        SymbolParams::normalized(if t0 >= 1.0 { 0.0 } else { t0 }, delta_phi, Steps::Unbounded)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t0_frac(&self) -> f64 {
        self.t0 / self.ts
    }

    pub fn delta_phi(&self) -> f64 {
        self.delta_phi
    }

    pub fn ts(&self) -> f64 {
        self.ts
    }

    pub fn steps(&self) -> Steps {
        self.steps
    }

    pub fn with_steps(mut self, steps: Steps) -> Self {
        self.steps = steps;
        self
    }
}

/// Complex Fourier coefficient of order `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicCoefficient {
    pub order: i32,
    pub value: Complex64,
}

impl HarmonicCoefficient {
    pub fn amplitude(&self) -> f64 {
        self.value.norm()
    }

    /// Phase in `[0, 2π)`.
    pub fn phase(&self) -> f64 {
        arg_2pi(self.value)
    }
}
