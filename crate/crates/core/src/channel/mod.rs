//! Free-space propagation from unit cells to receive antennas, the
//! aggregated MIMO channel, and transmit beamforming.

mod beamforming;
mod matrix;

use std::f64::consts::{PI, TAU};
use std::io::Read;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::wrap_phase;
use crate::ris::{RadiationPattern, ReflectionCoefficient, RisGeometry};

pub use beamforming::{beamforming_matrix, BeamformingMatrix};
pub use matrix::{complex_gaussian, flat_fading_transmit, random_channel, ChannelMatrix};

/// A receive antenna. Its boresight points at the surface centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RxAntennaConfig {
    gain: f64,
    pattern: RadiationPattern,
    position: [f64; 3],
}

impl RxAntennaConfig {
    pub fn new(gain: f64, pattern: RadiationPattern, position: [f64; 3]) -> Result<Self> {
        if !(gain > 0.0) || !gain.is_finite() {
            return Err(Error::Domain("receive gain must be positive".into()));
        }
        if position.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("antenna position must be finite".into()));
        }
        if position.iter().all(|c| *c == 0.0) {
            return Err(Error::Domain("antenna cannot sit at the surface centre".into()));
        }
        Ok(RxAntennaConfig {
            gain,
            pattern,
            position,
        })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn pattern(&self) -> RadiationPattern {
        self.pattern
    }

    pub fn position(&self) -> [f64; 3] {
        self.position
    }
}

/// Distance and departure/arrival angles of one cell-to-antenna path.
///
/// Angles are `(elevation, azimuth)` with elevation measured from the
/// boresight of the radiating or receiving element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    distance: f64,
    aod: (f64, f64),
    aoa: (f64, f64),
}

impl LinkGeometry {
    pub fn new(distance: f64, aod: (f64, f64), aoa: (f64, f64)) -> Result<Self> {
        if !(distance > 0.0) || !distance.is_finite() {
            return Err(Error::Domain(format!(
                "singular geometry: path length {distance} must be positive"
            )));
        }
        for (name, (theta, _)) in [("departure", aod), ("arrival", aoa)] {
            if !(0.0..=PI).contains(&theta) {
                return Err(Error::Domain(format!(
                    "{name} elevation {theta} outside [0, π]"
                )));
            }
        }
        Ok(LinkGeometry {
            distance,
            aod: (aod.0, wrap_phase(aod.1)),
            aoa: (aoa.0, wrap_phase(aoa.1)),
        })
    }

    /// Boresight path of length `distance`.
    pub fn boresight(distance: f64) -> Result<Self> {
        LinkGeometry::new(distance, (0.0, 0.0), (0.0, 0.0))
    }

    /// Path from the centre of cell `(n, m)` to `rx`.
    pub fn between(geom: &RisGeometry, n: usize, m: usize, rx: &RxAntennaConfig) -> Result<Self> {
        let c = geom.cell_center(n, m);
        let p = rx.position;
        let v = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
        let d = norm(v);
        if !(d > 0.0) {
            return Err(Error::Domain("singular geometry: antenna on a cell".into()));
        }
        let aod = (v[0].hypot(v[1]).atan2(v[2]), v[1].atan2(v[0]));

        // local frame at the antenna: boresight toward the origin
        let b = scale(p, -1.0 / norm(p));
        let u = scale(v, -1.0 / d);
        let theta = norm(cross(u, b)).atan2(dot(u, b));
        let reference = if b[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let e1 = normalize(sub(reference, scale(b, dot(reference, b))));
        let e2 = cross(b, e1);
        let aoa = (theta, dot(u, e2).atan2(dot(u, e1)));
        LinkGeometry::new(d, aod, aoa)
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn aod(&self) -> (f64, f64) {
        self.aod
    }

    pub fn aoa(&self) -> (f64, f64) {
        self.aoa
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    scale(a, 1.0 / norm(a))
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Path table for every (antenna, cell) pair, cells in row-major order.
pub fn link_table(geom: &RisGeometry, rxs: &[RxAntennaConfig]) -> Result<Vec<Vec<LinkGeometry>>> {
    rxs.iter()
        .map(|rx| {
            let mut row = Vec::with_capacity(geom.cell_count());
            for n in 0..geom.rows() {
                for m in 0..geom.cols() {
                    row.push(LinkGeometry::between(geom, n, m, rx)?);
                }
            }
            Ok(row)
        })
        .collect()
}

/// Baseband gain of one cell-to-antenna path:
/// `√(G·G_r·λ²·F(AoD)·F_rx(AoA)) / (4πd) · e^{−j2πd/λ}`.
pub fn free_space_channel(
    geom: &RisGeometry,
    rx: &RxAntennaConfig,
    link: &LinkGeometry,
) -> Complex64 {
    let lambda = geom.wavelength();
    let f_tx = geom.pattern().gain(link.aod.0, link.aod.1);
    let f_rx = rx.pattern.gain(link.aoa.0, link.aoa.1);
    let amp = (geom.cell_gain() * rx.gain * lambda * lambda * f_tx * f_rx).sqrt()
        / (4.0 * PI * link.distance);
    Complex64::from_polar(amp, -TAU * link.distance / lambda)
}

/// Received baseband envelope at each antenna for per-cell reflection
/// coefficients `gammas` (row-major) under incident flux `flux` (W/m²).
pub fn received_signal_theorem1(
    geom: &RisGeometry,
    gammas: &[ReflectionCoefficient],
    rxs: &[RxAntennaConfig],
    flux: f64,
    links: &[Vec<LinkGeometry>],
) -> Result<Vec<Complex64>> {
    let cells = geom.cell_count();
    if gammas.len() != cells {
        return Err(Error::Length {
            expected: cells,
            got: gammas.len(),
        });
    }
    if links.len() != rxs.len() || links.iter().any(|row| row.len() != cells) {
        return Err(Error::Shape {
            expected: format!("{}×{cells}", rxs.len()),
            got: format!(
                "{}×{}",
                links.len(),
                links.first().map_or(0, |row| row.len())
            ),
        });
    }
    if !(flux > 0.0) {
        return Err(Error::Domain("incident flux must be positive".into()));
    }
    let sqrt_p = geom.cell_power(flux).sqrt();
    Ok(rxs
        .iter()
        .zip(links)
        .map(|(rx, row)| {
            row.iter()
                .zip(gammas)
                .map(|(link, g)| free_space_channel(geom, rx, link) * g.to_complex())
                .sum::<Complex64>()
                * sqrt_p
        })
        .collect())
}

/// Reads antenna positions from CSV with header `x_m,y_m,z_m`.
pub fn read_antenna_positions<R: Read>(reader: R) -> Result<Vec<[f64; 3]>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["x_m", "y_m", "z_m"] {
        return Err(Error::Parse("antenna header must be `x_m,y_m,z_m`".into()));
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let r = record.map_err(|e| Error::Parse(e.to_string()))?;
        let mut pos = [0.0; 3];
        for (i, slot) in pos.iter_mut().enumerate() {
            *slot = r
                .get(i)
                .ok_or_else(|| Error::Parse("missing coordinate".into()))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad coordinate in row {}", out.len() + 1)))?;
        }
        out.push(pos);
    }
    if out.is_empty() {
        return Err(Error::Parse("no antenna positions".into()));
    }
    Ok(out)
}
