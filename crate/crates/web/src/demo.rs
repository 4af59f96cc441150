use std::f64::consts::PI;

use num_complex::Complex64;

use risqam::experiments::{ber_sweep, sweep_channel, BerSweepConfig, Seeds};
use risqam::modulation::{discrete_harmonic_coefficient, harmonic_coefficient, Steps, SymbolParams};
use risqam::transceiver::{random_payload, run_link, ChannelKnowledge, FrameConfig, Modulator};
use risqam::{Error, Result};

/// Largest frame count one BER point may request from the page.
pub const MAX_FRAMES: usize = 64;

fn steps(q: u32) -> Steps {
    if q == 0 {
        Steps::Unbounded
    } else {
        Steps::Finite(q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCurve {
    pub delta_phi: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

pub fn harmonic_curve(q: u32, points: usize) -> Result<HarmonicCurve> {
    if !(2..=4096).contains(&points) {
        return Err(Error::Config("points must lie in 2..=4096".into()));
    }
    let s = steps(q);
    let delta_phi: Vec<f64> = (0..points).map(|i| 4.0 * PI * i as f64 / (points - 1) as f64).collect();
    let amplitudes = delta_phi
        .iter()
        .map(|&d| {
            let p = SymbolParams::normalized(0.0, d, s)?;
            let a = match s {
                Steps::Unbounded => harmonic_coefficient(&p, 1)?,
                Steps::Finite(_) => discrete_harmonic_coefficient(&p, 1)?,
            };
            Ok(a.amplitude())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HarmonicCurve { delta_phi, amplitudes })
}

pub fn constellation(q: u32, snr_db: f64, seed: u64) -> Result<[Vec<Complex64>; 2]> {
    let s = steps(q);
    let frame = FrameConfig::default().with_steps(s);
    frame.validate()?;
    if snr_db.is_nan() {
        return Err(Error::Config("SNR must be a number".into()));
    }
    let h = sweep_channel(seed);
    let row = h.get(0, 0).norm_sqr() + h.get(0, 1).norm_sqr();
    let sigma2 = row / risqam::analysis::db_to_linear(snr_db);
    let seeds = Seeds::from_master(seed);
    let payload = random_payload(frame.payload_bits(), seeds.payload);
    let report = run_link(&frame, &Modulator::new(s)?, &h, 1.0, sigma2, &payload, seeds.noise, ChannelKnowledge::LsPerFrame)?;
    Ok(report.recovered)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub measured: f64,
    pub theory: f64,
}

pub fn ber_curve(q: u32, snr_lo: f64, snr_hi: f64, step: f64, frames: usize, seed: u64) -> Result<Vec<BerPoint>> {
    if !(step > 0.0) || !(snr_hi >= snr_lo) || !snr_lo.is_finite() || !snr_hi.is_finite() {
        return Err(Error::Config("need finite snr_lo ≤ snr_hi and a positive step".into()));
    }
    if frames == 0 || frames > MAX_FRAMES {
        return Err(Error::Config(format!("frames must lie in 1..={MAX_FRAMES}")));
    }
    let n = ((snr_hi - snr_lo) / step + 1e-9).floor() as usize;
    if n > 200 {
        return Err(Error::Config("at most 200 SNR points".into()));
    }
    let cfg = BerSweepConfig {
        snr_db: (0..=n).map(|i| snr_lo + i as f64 * step).collect(),
        bits: frames * FrameConfig::default().payload_bits(),
        steps: steps(q),
        seed,
        ..BerSweepConfig::default()
    };
    let rows = ber_sweep(&cfg, &sweep_channel(seed))?;
    Ok(rows
        .into_iter()
        .map(|r| BerPoint {
            snr_db: r.snr_rx1_db,
            measured: r.ber_total,
            theory: r.theory.ber_total,
        })
        .collect())
}
