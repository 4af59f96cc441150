use num_complex::Complex64;

use super::{Steps, SymbolParams};
use crate::error::{Error, Result};
use crate::ris::{amplitude_at_phase, AmplitudeProfile};
use crate::math::wrap_phase;

/// Uniformly sampled baseband reflection sequence covering one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<Complex64>,
    sample_period: f64,
}

impl Waveform {
    pub fn new(samples: Vec<Complex64>, sample_period: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("waveform needs at least one sample".into()));
        }
        if !(sample_period > 0.0) {
            return Err(Error::Domain("sample period must be positive".into()));
        }
        Ok(Waveform {
            samples,
            sample_period,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.sample_period * self.samples.len() as f64
    }

    /// Every `stride`-th sample, starting at the first.
    pub fn decimate(&self, stride: usize) -> Result<Waveform> {
        if stride == 0 || !self.samples.len().is_multiple_of(stride) {
            return Err(Error::Domain(format!(
                "stride {stride} does not divide {} samples",
                self.samples.len()
            )));
        }
        Waveform::new(
            self.samples.iter().step_by(stride).copied().collect(),
            self.sample_period * stride as f64,
        )
    }

    /// Scales each sample by the profile amplitude at its own phase.
    pub fn with_profile(&self, profile: &AmplitudeProfile) -> Result<Waveform> {
        let samples = self
            .samples
            .iter()
            .map(|z| {
                let phi = wrap_phase(z.arg());
                amplitude_at_phase(profile, phi).map(|a| z * a)
            })
            .collect::<Result<Vec<_>>>()?;
        Waveform::new(samples, self.sample_period)
    }
}

/// Samples the continuous linear-phase symbol at `samples_per_symbol`
/// uniformly spaced instants `t = i·Ts/n`.
pub fn ideal_waveform(params: &SymbolParams, samples_per_symbol: usize) -> Result<Waveform> {
    if params.steps() != Steps::Unbounded {
        return Err(Error::Domain("ideal waveform needs a continuous phase ramp".into()));
    }
    if samples_per_symbol < 2 {
        return Err(Error::Domain("need at least two samples per symbol".into()));
    }
    let ts = params.ts();
    let t0 = params.t0();
    let rate = params.delta_phi() / ts;
    let dt = ts / samples_per_symbol as f64;
    let samples = (0..samples_per_symbol)
        .map(|i| {
            let t = i as f64 * dt;
            let phase = if t <= t0 {
                rate * (t + ts - t0)
            } else {
                rate * (t - t0)
            };
            Complex64::from_polar(1.0, phase)
        })
        .collect();
    Waveform::new(samples, dt)
}

/// The `q`-step staircase; segment `p` holds `e^{jΔφ·p/q}` before the
/// circular shift by `t0`, which must be a whole number of steps.
pub fn discrete_waveform(params: &SymbolParams) -> Result<Waveform> {
    let q = params
        .steps()
        .finite()
        .ok_or_else(|| Error::Domain("discrete waveform needs a finite step count".into()))?;
    let shift = params.t0_frac() * f64::from(q);
    let k = shift.round();
    if (shift - k).abs() > 1e-9 {
        return Err(Error::UnrepresentableShift {
            t0_frac: params.t0_frac(),
            steps: q,
        });
    }
    let q_us = q as usize;
    let k = (k as usize) % q_us;
    let step = params.delta_phi() / f64::from(q);
    let samples = (0..q_us)
        .map(|p| {
            let src = (p + q_us - k) % q_us;
            Complex64::from_polar(1.0, step * src as f64)
        })
        .collect();
    Waveform::new(samples, params.ts() / f64::from(q))
}
