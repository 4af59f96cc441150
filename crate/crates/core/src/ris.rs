//! Unit-cell reflection physics and surface geometry.

use std::f64::consts::{PI, TAU};
use std::io::Read;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{arg_2pi, wrap_phase};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Characteristic impedance of free space used when none is configured.
pub const DEFAULT_Z0: f64 = 377.0;

/// Normalized power radiation pattern of a unit cell or receive antenna.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadiationPattern {
    Isotropic,
    /// `cos θ` clipped to `[0, 1]`.
    #[default]
    Cosine,
}

impl RadiationPattern {
    /// Pattern value at elevation `theta` (from boresight) and azimuth `phi`.
    pub fn gain(&self, theta: f64, _phi: f64) -> f64 {
        match self {
            RadiationPattern::Isotropic => 1.0,
            RadiationPattern::Cosine => theta.cos().clamp(0.0, 1.0),
        }
    }
}

/// Surface layout and per-cell antenna parameters.
///
/// Cells sit on the `z = 0` plane centred at the origin; columns run along
/// `x` with pitch `cell_width`, rows along `y` with pitch `cell_length`.
#[derive(Debug, Clone, PartialEq)]
pub struct RisGeometry {
    rows: usize,
    cols: usize,
    cell_width: f64,
    cell_length: f64,
    cell_gain: f64,
    pattern: RadiationPattern,
    carrier_freq: f64,
}

impl RisGeometry {
    pub fn new(
        rows: usize,
        cols: usize,
        cell_width: f64,
        cell_length: f64,
        cell_gain: f64,
        pattern: RadiationPattern,
        carrier_freq: f64,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Domain("surface needs at least one row and column".into()));
        }
        if !(cell_width > 0.0 && cell_length > 0.0) {
            return Err(Error::Domain("cell dimensions must be positive".into()));
        }
        if !(cell_gain > 0.0) {
            return Err(Error::Domain("cell gain must be positive".into()));
        }
        if !(carrier_freq > 0.0) {
            return Err(Error::Domain("carrier frequency must be positive".into()));
        }
        Ok(RisGeometry {
            rows,
            cols,
            cell_width,
            cell_length,
            cell_gain,
            pattern,
            carrier_freq,
        })
    }

    /// The 32×8 surface at 4.25 GHz with 9 dBi cells and half-wavelength pitch.
    pub fn prototype() -> Self {
        let lambda = SPEED_OF_LIGHT / 4.25e9;
        RisGeometry::new(
            32,
            8,
            lambda / 2.0,
            lambda / 2.0,
            10f64.powf(0.9),
            RadiationPattern::Cosine,
            4.25e9,
        )
        .expect("valid prototype geometry")
    }

    pub fn with_pattern(mut self, pattern: RadiationPattern) -> Self {
        self.pattern = pattern;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    pub fn cell_length(&self) -> f64 {
        self.cell_length
    }

    pub fn cell_gain(&self) -> f64 {
        self.cell_gain
    }

    pub fn pattern(&self) -> RadiationPattern {
        self.pattern
    }

    pub fn carrier_freq(&self) -> f64 {
        self.carrier_freq
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    /// Power collected by one cell from an incident flux density `flux` (W/m²).
    pub fn cell_power(&self, flux: f64) -> f64 {
        flux * self.cell_width * self.cell_length
    }

    /// Centre of cell `(n, m)` (zero-based row, column).
    pub fn cell_center(&self, n: usize, m: usize) -> [f64; 3] {
        let x = (m as f64 - (self.cols as f64 - 1.0) / 2.0) * self.cell_width;
        let y = (n as f64 - (self.rows as f64 - 1.0) / 2.0) * self.cell_length;
        [x, y, 0.0]
    }

    /// Flat index of cell `(n, m)` in row-major order.
    pub fn cell_index(&self, n: usize, m: usize) -> usize {
        n * self.cols + m
    }
}

/// Complex reflection coefficient `A·e^{jφ}` of one unit cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionCoefficient {
    amplitude: f64,
    phase: f64,
}

impl ReflectionCoefficient {
    /// Builds a passive coefficient; the phase is reduced to `[0, 2π)`.
    pub fn new(amplitude: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0 + 1e-12).contains(&amplitude) {
            return Err(Error::Domain(format!(
                "reflection amplitude {amplitude} outside [0, 1]"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::Domain("reflection phase must be finite".into()));
        }
        Ok(ReflectionCoefficient {
            amplitude,
            phase: wrap_phase(phase),
        })
    }

    pub fn unit(phase: f64) -> Self {
        ReflectionCoefficient {
            amplitude: 1.0,
            phase: wrap_phase(phase),
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// Equivalent load seen by the incident wave at one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadImpedance {
    pub z_load: Complex64,
    pub z0: f64,
}

impl LoadImpedance {
    pub fn new(z_load: Complex64, z0: f64) -> Result<Self> {
        if !(z0 > 0.0) {
            return Err(Error::Domain("characteristic impedance must be positive".into()));
        }
        if z_load.re < 0.0 {
            return Err(Error::Domain("load must be passive (Re Z >= 0)".into()));
        }
        Ok(LoadImpedance { z_load, z0 })
    }
}

/// Reflection coefficient `(Z − Z0)/(Z + Z0)` as amplitude and
/// full-quadrant phase. A matched load reports phase 0.
pub fn reflection_from_impedance(z: LoadImpedance) -> Result<ReflectionCoefficient> {
    let den = z.z_load + z.z0;
    if den.norm() == 0.0 {
        return Err(Error::Domain("Z_load = -Z0 makes the reflection singular".into()));
    }
    let gamma = (z.z_load - z.z0) / den;
    Ok(ReflectionCoefficient {
        amplitude: gamma.norm(),
        phase: arg_2pi(gamma),
    })
}

/// Reflection amplitude as a function of the commanded phase.
#[derive(Debug, Clone, PartialEq)]
pub enum AmplitudeProfile {
    /// Constant envelope, `A(φ) = 1`.
    Ideal,
    /// Linear interpolation between `(φ, A)` breakpoints covering `[0, 2π]`.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl AmplitudeProfile {
    /// Validated piecewise-linear profile.
    pub fn piecewise(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Domain("profile needs at least two breakpoints".into()));
        }
        if points[0].0.abs() > 1e-9 || (points[points.len() - 1].0 - TAU).abs() > 1e-9 {
            return Err(Error::Domain("profile breakpoints must span [0, 2π]".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Domain("profile phases must be strictly increasing".into()));
        }
        if let Some(&(phi, a)) = points.iter().find(|(_, a)| !(*a > 0.0 && *a <= 1.0)) {
            return Err(Error::Domain(format!(
                "profile amplitude {a} at φ = {phi} outside (0, 1]"
            )));
        }
        Ok(AmplitudeProfile::PiecewiseLinear(points))
    }

    /// Triangular profile with 3 dB ripple: 0.7 at φ = 0 and 2π, 1.0 at π.
    pub fn triangular_3db() -> Self {
        AmplitudeProfile::PiecewiseLinear(vec![(0.0, 0.7), (PI, 1.0), (TAU, 0.7)])
    }

    /// Phases where the profile has kinks (interior breakpoints).
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            AmplitudeProfile::Ideal => Vec::new(),
            AmplitudeProfile::PiecewiseLinear(p) => {
                p[1..p.len() - 1].iter().map(|&(phi, _)| phi).collect()
            }
        }
    }

    /// Reads `phase_rad,amplitude` CSV rows into a piecewise-linear profile.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
        if headers.len() != 2 || &headers[0] != "phase_rad" || &headers[1] != "amplitude" {
            return Err(Error::Parse(
                "profile header must be `phase_rad,amplitude`".into(),
            ));
        }
        let mut points = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            let phi = parse_field(&record, 0)?;
            let a = parse_field(&record, 1)?;
            points.push((phi, a));
        }
        AmplitudeProfile::piecewise(points)
    }
}

fn parse_field(record: &csv::StringRecord, idx: usize) -> Result<f64> {
    record
        .get(idx)
        .ok_or_else(|| Error::Parse(format!("missing column {idx}")))?
        .parse::<f64>()
        .map_err(|e| Error::Parse(e.to_string()))
}

/// Amplitude of the profile at commanded phase `phi ∈ [0, 2π]`.
pub fn amplitude_at_phase(profile: &AmplitudeProfile, phi: f64) -> Result<f64> {
    if !(0.0..=TAU).contains(&phi) {
        return Err(Error::Domain(format!("phase {phi} outside [0, 2π]")));
    }
    Ok(match profile {
        AmplitudeProfile::Ideal => 1.0,
        AmplitudeProfile::PiecewiseLinear(p) => interpolate(p, phi),
    })
}

fn interpolate(points: &[(f64, f64)], phi: f64) -> f64 {
    let idx = points.partition_point(|&(x, _)| x <= phi);
    if idx == 0 {
        return points[0].1;
    }
    if idx >= points.len() {
        return points[points.len() - 1].1;
    }
    let (x0, y0) = points[idx - 1];
    let (x1, y1) = points[idx];
    y0 + (y1 - y0) * (phi - x0) / (x1 - x0)
}
