use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::receiver::extract_harmonic;
use super::Symbol;
use crate::error::Result;
use crate::modulation::{
    harmonic_coefficient, ideal_waveform, solve_discrete_mapping, solve_table_16qam,
    Constellation, QamMapEntry, Steps, SymbolParams, Waveform, TABLE_16QAM,
};
use crate::ris::AmplitudeProfile;

/// How one symbol is realized on the surface.
#[derive(Debug, Clone, PartialEq)]
enum Realization {
    /// Continuous phase ramp.
    Ramp(SymbolParams),
    /// One sample per phase step.
    Staircase(Waveform),
}

/// Transmit-side symbol bank for one step count.
///
/// Every symbol's first harmonic is computed from its realized waveform and
/// scaled so the 16-QAM points have unit mean energy; pilots use the same
/// scale.
#[derive(Debug, Clone)]
pub struct Modulator {
    steps: Steps,
    qam: Vec<(Realization, Complex64)>,
    bpsk: [(Realization, Complex64); 2],
    silent: (Realization, Complex64),
    scale: f64,
    receiver: Constellation,
}

fn realize_ramp(params: SymbolParams) -> Result<(Realization, Complex64)> {
    let a = harmonic_coefficient(&params, 1)?.value;
    Ok((Realization::Ramp(params), a))
}

fn realize_staircase(w: Waveform) -> Result<(Realization, Complex64)> {
    let a = extract_harmonic(w.samples(), w.len(), 1)?;
    Ok((Realization::Staircase(w), a))
}

impl Modulator {
    pub fn new(steps: Steps) -> Result<Self> {
        let (qam, bpsk, silent) = match steps {
            Steps::Unbounded => {
                let solved = solve_table_16qam(&AmplitudeProfile::Ideal)?;
                let qam = solved
                    .into_iter()
                    .map(|(_, sol)| realize_ramp(sol.params))
                    .collect::<Result<Vec<_>>>()?;
                let bpsk = [
                    realize_ramp(SymbolParams::ideal(0.0, TAU)?)?,
                    realize_ramp(SymbolParams::ideal(0.5, TAU)?)?,
                ];
                let silent = realize_ramp(SymbolParams::ideal(0.0, 0.0)?)?;
                (qam, bpsk, silent)
            }
            Steps::Finite(q) => {
                let design = |ring: f64, phase: f64| -> Result<(Realization, Complex64)> {
                    realize_staircase(solve_discrete_mapping(ring, phase, q)?.waveform())
                };
                let qam = TABLE_16QAM
                    .iter()
                    .map(|row| design(row.amp, row.phase))
                    .collect::<Result<Vec<_>>>()?;
                let bpsk = [design(1.0, 0.0)?, design(1.0, PI)?];
                let flat = Waveform::new(vec![Complex64::new(1.0, 0.0); q as usize], 1.0 / f64::from(q))?;
                let silent = realize_staircase(flat)?;
                (qam, bpsk, silent)
            }
        };
        let energy: f64 = qam.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>() / qam.len() as f64;
        let scale = 1.0 / energy.sqrt();
        let entries: Vec<QamMapEntry> = TABLE_16QAM
            .iter()
            .zip(&qam)
            .map(|(row, (_, a))| {
                let z = a * scale;
                QamMapEntry {
                    amp: z.norm(),
                    phase: crate::math::arg_2pi(z),
                    ..*row
                }
            })
            .collect();
        Ok(Modulator {
            steps,
            qam,
            bpsk,
            silent,
            scale,
            receiver: Constellation::new(entries)?,
        })
    }

    pub fn steps(&self) -> Steps {
        self.steps
    }

    fn slot(&self, symbol: Symbol) -> &(Realization, Complex64) {
        match symbol {
            Symbol::Qam(i) => &self.qam[usize::from(i & 0x0f)],
            Symbol::Bpsk(neg) => &self.bpsk[usize::from(neg)],
            Symbol::Silent => &self.silent,
        }
    }

    /// Unit-energy-normalized first harmonic of `symbol`.
    pub fn harmonic(&self, symbol: Symbol) -> Complex64 {
        self.slot(symbol).1 * self.scale
    }

    /// Scale applied to raw harmonics; raw 16-QAM energy is `1/scale²`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Constant-envelope waveform of `symbol`: one sample per step, or
    /// `samples` samples of the continuous ramp.
    pub fn waveform(&self, symbol: Symbol, samples: usize) -> Result<Waveform> {
        match &self.slot(symbol).0 {
            Realization::Staircase(w) => Ok(w.clone()),
            Realization::Ramp(p) => ideal_waveform(p, samples),
        }
    }

    /// Normalized receiver constellation used for demapping.
    pub fn constellation(&self) -> &Constellation {
        &self.receiver
    }

    pub fn demap(&self, raw: Complex64) -> u8 {
        self.receiver.demap(raw)
    }
}
