//! Experiment runners behind the command-line tool: BER sweeps, the
//! step-count sweep, mapping-table solving and beamforming scans.
//!
//! Every runner is a pure function of its configuration; CSV writers end
//! with a `# seed=<s> version=<v>` line.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{db_to_linear, snr_from_rx1, BerMode, BerPrediction};
use crate::channel::{
    beamforming_matrix, link_table, random_channel, received_signal_theorem1, RxAntennaConfig,
};
use crate::error::{Error, Result};
use crate::math::{arg_2pi, Mat2};
use crate::modulation::{
    a1_max, discrete_harmonic_coefficient, solve_mapping, MappingSolution, QamMapEntry, Steps,
    SymbolParams, TABLE_16QAM,
};
use crate::ris::{AmplitudeProfile, RadiationPattern, ReflectionCoefficient, RisGeometry};
use crate::transceiver::{random_payload, run_link, ChannelKnowledge, FrameConfig, Modulator};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Smallest accepted Monte Carlo size per SNR point.
pub const MIN_BITS: usize = 10_000;

/// Seeds of the independent random ingredients of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeds {
    pub channel: u64,
    pub payload: u64,
    pub noise: u64,
}

impl Seeds {
    pub fn from_master(seed: u64) -> Self {
        Seeds {
            channel: seed,
            payload: seed.wrapping_add(1),
            noise: seed.wrapping_add(2),
        }
    }
}

/// The fixed 2×2 channel a sweep with master `seed` runs over.
pub fn sweep_channel(seed: u64) -> Mat2 {
    random_channel(Seeds::from_master(seed).channel)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerSweepConfig {
    /// SNR_Rx1 grid in dB, strictly increasing; `+inf` means noiseless.
    pub snr_db: Vec<f64>,
    /// Payload bits per point over both streams, rounded up to whole frames.
    pub bits: usize,
    pub steps: Steps,
    pub seed: u64,
    /// Transmit power `p`.
    pub power: f64,
    pub knowledge: ChannelKnowledge,
    pub theory: BerMode,
}

impl Default for BerSweepConfig {
    fn default() -> Self {
        BerSweepConfig {
            snr_db: (0..=12).map(|i| f64::from(2 * i)).collect(),
            bits: 1_000_000,
            steps: Steps::Finite(40),
            seed: 1,
            power: 1.0,
            knowledge: ChannelKnowledge::default(),
            theory: BerMode::Exact,
        }
    }
}

impl BerSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::Config("empty SNR grid".into()));
        }
        if self.snr_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(Error::Config("SNR grid values must be finite dB or +inf".into()));
        }
        if self.snr_db.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("SNR grid must be strictly increasing".into()));
        }
        if self.bits < MIN_BITS {
            return Err(Error::Config(format!("bits per point must be at least {MIN_BITS}")));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::Config("transmit power must be positive".into()));
        }
        FrameConfig::default().with_steps(self.steps).validate()
    }

    fn frame(&self) -> FrameConfig {
        FrameConfig::default().with_steps(self.steps)
    }

    /// Bits actually simulated per point.
    pub fn simulated_bits(&self) -> usize {
        let per = self.frame().payload_bits();
        self.bits.div_ceil(per) * per
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerRow {
    pub snr_rx1_db: f64,
    pub ber: [f64; 2],
    pub ber_total: f64,
    pub theory: BerPrediction,
    /// Bits over both streams.
    pub bits: u64,
}

impl BerRow {
    pub fn bits_per_stream(&self) -> u64 {
        self.bits / 2
    }
}

/// Measured and predicted BER over the grid, channel `h` held fixed.
///
/// Every point reuses the same payload and noise stream, so only the noise
/// scale changes along the sweep.
pub fn ber_sweep(cfg: &BerSweepConfig, h: &Mat2) -> Result<Vec<BerRow>> {
    ber_sweep_with_noise(cfg, h, Seeds::from_master(cfg.seed).noise)
}

fn ber_sweep_with_noise(cfg: &BerSweepConfig, h: &Mat2, noise_seed: u64) -> Result<Vec<BerRow>> {
    cfg.validate()?;
    let frame = cfg.frame();
    let modulator = Modulator::new(cfg.steps)?;
    let payload = random_payload(cfg.simulated_bits(), Seeds::from_master(cfg.seed).payload);
    let row_gain = h.get(0, 0).norm_sqr() + h.get(0, 1).norm_sqr();
    cfg.snr_db
        .iter()
        .map(|&db| {
            let (sigma2, theory) = if db == f64::INFINITY {
                let zero = BerPrediction {
                    ber1: 0.0,
                    ber2: 0.0,
                    ber_total: 0.0,
                    mode: cfg.theory,
                };
                (0.0, zero)
            } else {
                let snr = db_to_linear(db);
                let sigma2 = cfg.power * row_gain / snr;
                (sigma2, BerPrediction::new(snr_from_rx1(snr, h)?, cfg.theory))
            };
            let report = run_link(&frame, &modulator, h, cfg.power, sigma2, &payload, noise_seed, cfg.knowledge)?;
            Ok(BerRow {
                snr_rx1_db: db,
                ber: [report.ber(0), report.ber(1)],
                ber_total: report.ber_total(),
                theory,
                bits: report.bits_total(),
            })
        })
        .collect()
}

/// Standard deviation of an empirical error rate over `n` trials.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeRow {
    pub steps: Steps,
    pub amp: f64,
    pub phase: f64,
    /// `|ã₁| / |a₁|` against the continuous sweep.
    pub ratio: f64,
}

/// First-harmonic amplitude of a `t0 = 0`, `Δφ` sweep for each step count.
pub fn discretization_amplitudes(steps: &[Steps], delta_phi: f64) -> Result<Vec<AmplitudeRow>> {
    let ideal = crate::modulation::harmonic_coefficient(&SymbolParams::ideal(0.0, delta_phi)?, 1)?;
    steps
        .iter()
        .map(|&s| {
            let a = match s {
                Steps::Unbounded => ideal,
                Steps::Finite(_) => discrete_harmonic_coefficient(&SymbolParams::normalized(0.0, delta_phi, s)?, 1)?,
            };
            Ok(AmplitudeRow {
                steps: s,
                amp: a.amplitude(),
                phase: a.phase(),
                ratio: a.amplitude() / ideal.amplitude(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscSweepConfig {
    /// Step counts of the amplitude table.
    pub amplitude_steps: Vec<Steps>,
    /// Step counts simulated for BER.
    pub ber_steps: Vec<Steps>,
    /// Shared sweep settings; `steps` is ignored.
    pub sweep: BerSweepConfig,
}

impl Default for DiscSweepConfig {
    fn default() -> Self {
        DiscSweepConfig {
            amplitude_steps: [2, 4, 8, 16, 40, 10].map(Steps::Finite).to_vec(),
            ber_steps: vec![Steps::Finite(40), Steps::Finite(10)],
            sweep: BerSweepConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscSweep {
    pub amplitudes: Vec<AmplitudeRow>,
    pub ber: Vec<(Steps, Vec<BerRow>)>,
}

/// Amplitude table plus one BER sweep per step count. Each step count draws
/// its own noise so curves can be compared as independent samples.
pub fn disc_sweep(cfg: &DiscSweepConfig, h: &Mat2) -> Result<DiscSweep> {
    if cfg.ber_steps.is_empty() && cfg.amplitude_steps.is_empty() {
        return Err(Error::Config("no step counts requested".into()));
    }
    let amplitudes = discretization_amplitudes(&cfg.amplitude_steps, TAU)?;
    let noise = Seeds::from_master(cfg.sweep.seed).noise;
    let ber = cfg
        .ber_steps
        .iter()
        .map(|&steps| {
            let sweep = BerSweepConfig { steps, ..cfg.sweep.clone() };
            let tag = match steps {
                Steps::Finite(q) => u64::from(q),
                Steps::Unbounded => u64::from(u32::MAX) + 1,
            };
            let rows = ber_sweep_with_noise(&sweep, h, noise.wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)))?;
            Ok((steps, rows))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscSweep { amplitudes, ber })
}

/// One 16-QAM mapping entry solved under a profile.
#[derive(Debug)]
pub struct SolveRow {
    /// Target entry with the ring already scaled by the profile's maximum.
    pub target: QamMapEntry,
    pub outcome: std::result::Result<MappingSolution, Error>,
}

/// Solves every 16-QAM target, reporting failures per entry.
pub fn solve_map(profile: &AmplitudeProfile) -> Result<Vec<SolveRow>> {
    let scale = a1_max(profile)?;
    Ok(TABLE_16QAM
        .iter()
        .map(|row| {
            let target = QamMapEntry { amp: row.amp * scale, ..*row };
            let outcome = solve_mapping(profile, target.amp, target.phase, 1);
            let target = match &outcome {
                Ok(sol) => QamMapEntry {
                    t0_frac: sol.params.t0_frac(),
                    delta_phi: sol.params.delta_phi(),
                    ..target
                },
                Err(_) => QamMapEntry {
                    t0_frac: f64::NAN,
                    delta_phi: f64::NAN,
                    ..target
                },
            };
            SolveRow { target, outcome }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamScanConfig {
    /// Cell counts; each is laid out as the most square rows × cols grid.
    pub cells: Vec<usize>,
    /// Receiver distance from the surface centre (m).
    pub distance: f64,
    /// Receiver angle off boresight in the x–z plane (rad).
    pub angle: f64,
    pub carrier_freq: f64,
    /// Random-phase draws averaged per cell count.
    pub draws: usize,
    pub seed: u64,
}

impl Default for BeamScanConfig {
    fn default() -> Self {
        BeamScanConfig {
            cells: vec![1, 16, 64, 256],
            distance: 50.0,
            angle: 30f64.to_radians(),
            carrier_freq: 4.25e9,
            draws: 200,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamRow {
    pub rows: usize,
    pub cols: usize,
    pub beamformed: f64,
    /// All cells at the same phase.
    pub unsteered: f64,
    pub random_mean: f64,
    /// Beamformed amplitude over that of a single cell.
    pub gain: f64,
}

impl BeamRow {
    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }
}

fn grid_shape(cells: usize) -> (usize, usize) {
    let rows = (1..=cells)
        .take_while(|r| r * r <= cells)
        .filter(|r| cells.is_multiple_of(*r))
        .last()
        .unwrap_or(1);
    (rows, cells / rows)
}

/// Received amplitude `|y|` with co-phased, uniform and random cell phases.
pub fn beam_scan(cfg: &BeamScanConfig) -> Result<Vec<BeamRow>> {
    if cfg.cells.is_empty() || cfg.cells.contains(&0) {
        return Err(Error::Config("cell counts must be positive".into()));
    }
    if !(cfg.distance > 0.0 && cfg.carrier_freq > 0.0) || cfg.draws == 0 {
        return Err(Error::Config("distance, carrier and draws must be positive".into()));
    }
    let rx = RxAntennaConfig::new(
        1.0,
        RadiationPattern::Isotropic,
        [cfg.distance * cfg.angle.sin(), 0.0, cfg.distance * cfg.angle.cos()],
    )?;
    let rxs = [rx];
    let lambda = crate::ris::SPEED_OF_LIGHT / cfg.carrier_freq;
    let amplitude = |geom: &RisGeometry, links: &[Vec<crate::channel::LinkGeometry>], g: &[ReflectionCoefficient]| {
        received_signal_theorem1(geom, g, &rxs, 1.0, links).map(|y| y[0].norm())
    };
    let mut rows: Vec<BeamRow> = Vec::with_capacity(cfg.cells.len());
    let mut single = None;
    for &n in &cfg.cells {
        let (r, c) = grid_shape(n);
        let geom = RisGeometry::new(r, c, lambda / 2.0, lambda / 2.0, 10f64.powf(0.9), RadiationPattern::Cosine, cfg.carrier_freq)?;
        let links = link_table(&geom, &rxs)?;
        let distances: Vec<f64> = links[0].iter().map(|l| l.distance()).collect();
        let steer = beamforming_matrix(&distances, lambda)?.reflections(ReflectionCoefficient::unit(0.0))?;
        let beamformed = amplitude(&geom, &links, &steer)?;
        let unsteered = amplitude(&geom, &links, &vec![ReflectionCoefficient::unit(0.0); n])?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ n as u64);
        let mut total = 0.0;
        for _ in 0..cfg.draws {
            let g: Vec<ReflectionCoefficient> = (0..n)
                .map(|_| ReflectionCoefficient::unit(rng.random_range(0.0..TAU)))
                .collect();
            total += amplitude(&geom, &links, &g)?;
        }
        let base = match single {
            Some(b) => b,
            None => {
                let one = RisGeometry::new(1, 1, lambda / 2.0, lambda / 2.0, 10f64.powf(0.9), RadiationPattern::Cosine, cfg.carrier_freq)?;
                let l = link_table(&one, &rxs)?;
                let b = amplitude(&one, &l, &[ReflectionCoefficient::unit(0.0)])?;
                single = Some(b);
                b
            }
        };
        rows.push(BeamRow {
            rows: r,
            cols: c,
            beamformed,
            unsteered,
            random_mean: total / cfg.draws as f64,
            gain: beamformed / base,
        });
    }
    Ok(rows)
}

fn meta<W: Write>(w: &mut W, seed: u64) -> Result<()> {
    writeln!(w, "# seed={seed} version={VERSION}")?;
    Ok(())
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

fn steps_label(s: Steps) -> String {
    s.to_string()
}

pub const BER_HEADER: &str =
    "snr_rx1_db,ber_stream1,ber_stream2,ber_total,ber_theory1,ber_theory2,ber_theory_total,bits";

fn ber_fields(r: &BerRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        num(r.snr_rx1_db),
        num(r.ber[0]),
        num(r.ber[1]),
        num(r.ber_total),
        num(r.theory.ber1),
        num(r.theory.ber2),
        num(r.theory.ber_total),
        r.bits
    )
}

pub fn write_ber_csv<W: Write>(rows: &[BerRow], seed: u64, mut w: W) -> Result<()> {
    writeln!(w, "{BER_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", ber_fields(r))?;
    }
    meta(&mut w, seed)
}

/// BER rows of every step count, prefixed with a `q` column.
pub fn write_disc_ber_csv<W: Write>(sweep: &DiscSweep, seed: u64, mut w: W) -> Result<()> {
    writeln!(w, "q,{BER_HEADER}")?;
    for (steps, rows) in &sweep.ber {
        for r in rows {
            writeln!(w, "{},{}", steps_label(*steps), ber_fields(r))?;
        }
    }
    meta(&mut w, seed)
}

pub fn write_amplitude_csv<W: Write>(rows: &[AmplitudeRow], seed: u64, mut w: W) -> Result<()> {
    writeln!(w, "q,a1_amp,a1_phase_rad,ratio_to_continuous")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", steps_label(r.steps), num(r.amp), num(r.phase), num(r.ratio))?;
    }
    meta(&mut w, seed)
}

/// Constellation schema followed by the re-evaluated harmonic and status.
pub fn write_solve_csv<W: Write>(rows: &[SolveRow], seed: u64, mut w: W) -> Result<()> {
    writeln!(
        w,
        "symbol_index,bits,amp,phase_rad,t0_frac,delta_phi_rad,achieved_amp,achieved_phase_rad,amp_residual,phase_residual,status"
    )?;
    for r in rows {
        let t = &r.target;
        let (achieved, amp_res, phase_res, status) = match &r.outcome {
            Ok(sol) => (sol.achieved, sol.amp_residual, sol.phase_residual, "ok".to_string()),
            Err(e) => (
                Complex64::new(f64::NAN, f64::NAN),
                f64::NAN,
                f64::NAN,
                format!("\"{}\"", e.to_string().replace('"', "'")),
            ),
        };
        let achieved_phase = if achieved.is_nan() { f64::NAN } else { arg_2pi(achieved) };
        writeln!(
            w,
            "{},{},{:.12},{:.12},{:.12},{:.12},{},{},{},{},{}",
            t.symbol_index,
            t.bit_string(),
            t.amp,
            t.phase,
            t.t0_frac,
            t.delta_phi,
            num(achieved.norm()),
            num(achieved_phase),
            num(amp_res),
            num(phase_res),
            status
        )?;
    }
    meta(&mut w, seed)
}

pub fn write_beam_csv<W: Write>(rows: &[BeamRow], seed: u64, mut w: W) -> Result<()> {
    writeln!(w, "cells,rows,cols,amp_beamformed,amp_uniform,amp_random_mean,gain")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.cells(),
            r.rows,
            r.cols,
            num(r.beamformed),
            num(r.unsteered),
            num(r.random_mean),
            num(r.gain)
        )?;
    }
    meta(&mut w, seed)
}
