use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::wrap_phase;
use crate::ris::ReflectionCoefficient;

/// Diagonal unit-modulus phase matrix, one phase per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingMatrix {
    phases: Vec<f64>,
}

impl BeamformingMatrix {
    pub fn from_phases(phases: Vec<f64>) -> Self {
        BeamformingMatrix {
            phases: phases.into_iter().map(wrap_phase).collect(),
        }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Diagonal entry `e^{jφ}` of cell `i`.
    pub fn entry(&self, i: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.phases[i])
    }

    /// Unit reflections realizing the diagonal, optionally on top of a common
    /// modulating reflection `base`.
    pub fn reflections(&self, base: ReflectionCoefficient) -> Result<Vec<ReflectionCoefficient>> {
        self.phases
            .iter()
            .map(|&p| ReflectionCoefficient::new(base.amplitude(), wrap_phase(base.phase() + p)))
            .collect()
    }
}

/// Phases `+2π·d/λ (mod 2π)` that cancel each path's propagation phase.
pub fn beamforming_matrix(distances: &[f64], wavelength: f64) -> Result<BeamformingMatrix> {
    if !(wavelength > 0.0) {
        return Err(Error::Domain("wavelength must be positive".into()));
    }
    if let Some(d) = distances.iter().find(|d| !(**d > 0.0)) {
        return Err(Error::Domain(format!("path length {d} must be positive")));
    }
    Ok(BeamformingMatrix::from_phases(
        distances.iter().map(|d| TAU * d / wavelength).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{free_space_channel, link_table, received_signal_theorem1, RxAntennaConfig};
    use crate::ris::{RadiationPattern, RisGeometry};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equidistant_cells_need_no_steering() {
        let lambda = 0.07;
        let b = beamforming_matrix(&[3.0 * lambda; 5], lambda).unwrap();
        for p in b.phases() {
            assert!(crate::math::circular_distance(*p, 0.0) < 1e-9);
        }
        assert!(beamforming_matrix(&[1.0, 0.0], lambda).is_err());
    }

    #[test]
    fn co_phases_every_path() {
        let g = RisGeometry::new(4, 4, 0.035, 0.035, 8.0, RadiationPattern::Cosine, 4.25e9).unwrap();
        let rx = RxAntennaConfig::new(5.0, RadiationPattern::Cosine, [0.3, -0.2, 1.0]).unwrap();
        let links = link_table(&g, &[rx]).unwrap();
        let d: Vec<f64> = links[0].iter().map(|l| l.distance()).collect();
        let b = beamforming_matrix(&d, g.wavelength()).unwrap();
        for (i, l) in links[0].iter().enumerate() {
            let z = free_space_channel(&g, &rx, l) * b.entry(i);
            assert!(z.arg().abs() < 1e-9);
        }
    }

    #[test]
    fn no_random_diagonal_beats_it() {
        let g = RisGeometry::new(4, 4, 0.035, 0.035, 8.0, RadiationPattern::Cosine, 4.25e9).unwrap();
        let rx = RxAntennaConfig::new(5.0, RadiationPattern::Cosine, [0.4, 0.1, 0.8]).unwrap();
        let links = link_table(&g, &[rx]).unwrap();
        let d: Vec<f64> = links[0].iter().map(|l| l.distance()).collect();
        let b = beamforming_matrix(&d, g.wavelength()).unwrap();
        let unit = ReflectionCoefficient::unit(0.0);
        let best = received_signal_theorem1(&g, &b.reflections(unit).unwrap(), &[rx], 1.0, &links).unwrap()[0].norm();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let phases: Vec<f64> = (0..16).map(|_| rng.random::<f64>() * TAU).collect();
            let r = BeamformingMatrix::from_phases(phases).reflections(unit).unwrap();
            let y = received_signal_theorem1(&g, &r, &[rx], 1.0, &links).unwrap()[0].norm();
            assert!(y <= best * (1.0 + 1e-12));
        }
    }
}
