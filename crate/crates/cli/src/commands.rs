use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use risqam::analysis::{
    linear_to_db, max_symbol_rate, raw_bit_rate, snr_from_rx1, BerMode, BerPrediction,
};
use risqam::channel::ChannelMatrix;
use risqam::experiments::{
    beam_scan, ber_sweep, disc_sweep, solve_map, sweep_channel, write_amplitude_csv,
    write_beam_csv, write_ber_csv, write_disc_ber_csv, write_solve_csv, BeamScanConfig,
    BerSweepConfig, DiscSweepConfig, Seeds, VERSION,
};
use risqam::math::Mat2;
use risqam::modulation::Steps;
use risqam::ris::AmplitudeProfile;
use risqam::transceiver::{
    bits_from_bytes, random_payload, run_link, write_constellation_csv, ChannelKnowledge,
    FrameConfig, Modulator,
};
use risqam::{Error, Result};

use crate::config::Settings;

const DEFAULT_GRID: &str = "0:24:2";

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))
}

/// Writes `bytes` to `path`, or stdout when absent.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(
                File::create(p).map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display())))?,
            );
            w.write_all(bytes)?;
            w.flush()?;
        }
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn seed(s: &Settings) -> Result<u64> {
    s.get_or("seed", 1)
}

fn channel(s: &Settings, seed: u64) -> Result<Mat2> {
    match s.path("channel") {
        Some(p) => ChannelMatrix::read_csv(open(&p)?, 1.0)?.to_mat2(),
        None => Ok(sweep_channel(seed)),
    }
}

fn sweep_config(s: &Settings, steps: Steps) -> Result<BerSweepConfig> {
    let theory = match s.raw("theory").unwrap_or("exact") {
        "exact" => BerMode::Exact,
        "approx" => BerMode::Approximate,
        other => return Err(Error::Config(format!("unknown theory `{other}` (exact, approx)"))),
    };
    Ok(BerSweepConfig {
        snr_db: s.snr_grid(DEFAULT_GRID)?,
        bits: s.get_or("bits", 1_000_000)?,
        steps,
        seed: seed(s)?,
        power: s.get_or("power", 1.0)?,
        knowledge: s.get_or("csi", ChannelKnowledge::LsPerFrame)?,
        theory,
    })
}

pub fn ber_sweep_cmd(s: &Settings) -> Result<()> {
    let cfg = sweep_config(s, s.steps(Steps::Finite(40))?)?;
    cfg.validate()?;
    let rows = ber_sweep(&cfg, &channel(s, cfg.seed)?)?;
    let mut out = Vec::new();
    write_ber_csv(&rows, cfg.seed, &mut out)?;
    emit(s.path("out").as_deref(), &out)
}

fn amplitude_path(s: &Settings) -> Option<PathBuf> {
    s.path("amp_out").or_else(|| {
        s.path("out").map(|p| {
            let stem = p.file_stem().map(|x| x.to_string_lossy().into_owned()).unwrap_or_default();
            p.with_file_name(format!("{stem}_amplitude.csv"))
        })
    })
}

pub fn disc_sweep_cmd(s: &Settings) -> Result<()> {
    let defaults = DiscSweepConfig::default();
    let sweep = sweep_config(s, Steps::Finite(40))?;
    let cfg = DiscSweepConfig {
        amplitude_steps: s.list("amp_q", &defaults.amplitude_steps)?,
        ber_steps: s.steps_list(&defaults.ber_steps)?,
        sweep,
    };
    for &steps in &cfg.ber_steps {
        BerSweepConfig { steps, ..cfg.sweep.clone() }.validate()?;
    }
    let result = disc_sweep(&cfg, &channel(s, cfg.sweep.seed)?)?;
    let mut amp = Vec::new();
    write_amplitude_csv(&result.amplitudes, cfg.sweep.seed, &mut amp)?;
    let mut ber = Vec::new();
    write_disc_ber_csv(&result, cfg.sweep.seed, &mut ber)?;
    let amp_path = amplitude_path(s);
    emit(amp_path.as_deref(), &amp)?;
    if amp_path.is_none() {
        emit(None, b"\n")?;
    }
    emit(s.path("out").as_deref(), &ber)
}

fn profile(s: &Settings) -> Result<AmplitudeProfile> {
    match s.raw("profile").unwrap_or("ideal") {
        "ideal" => Ok(AmplitudeProfile::Ideal),
        "triangular" => Ok(AmplitudeProfile::triangular_3db()),
        path => AmplitudeProfile::from_csv(open(Path::new(path))?),
    }
}

pub fn solve_map_cmd(s: &Settings) -> Result<()> {
    let rows = solve_map(&profile(s)?)?;
    for r in &rows {
        if let Err(e) = &r.outcome {
            eprintln!("warning: symbol {} ({}): {e}", r.target.symbol_index, r.target.bit_string());
        }
    }
    let mut out = Vec::new();
    write_solve_csv(&rows, seed(s)?, &mut out)?;
    emit(s.path("out").as_deref(), &out)
}

pub fn beam_scan_cmd(s: &Settings) -> Result<()> {
    let d = BeamScanConfig::default();
    let cfg = BeamScanConfig {
        cells: s.list("cells", &d.cells)?,
        distance: s.get_or("distance_m", d.distance)?,
        angle: s.get::<f64>("angle_deg")?.map_or(d.angle, f64::to_radians),
        carrier_freq: s.get_or("carrier_hz", d.carrier_freq)?,
        draws: s.get_or("draws", d.draws)?,
        seed: seed(s)?,
    };
    let rows = beam_scan(&cfg)?;
    let mut out = Vec::new();
    write_beam_csv(&rows, cfg.seed, &mut out)?;
    emit(s.path("out").as_deref(), &out)
}

fn db(x: f64) -> String {
    format!("{:e}", linear_to_db(x))
}

pub fn predict_cmd(s: &Settings) -> Result<()> {
    let seed = seed(s)?;
    let h = channel(s, seed)?;
    let grid = s.snr_grid(DEFAULT_GRID)?;
    let steps = s.steps(Steps::Finite(40))?;
    let r_dac: f64 = s.get_or("r_dac", 100e6)?;
    let symbol_rate = match s.get::<f64>("symbol_rate")? {
        Some(r) => r,
        None => match steps {
            Steps::Finite(q) => max_symbol_rate(r_dac, q).map_err(|e| Error::Config(e.to_string()))?,
            Steps::Unbounded => return Err(Error::Config("q = inf has no DAC-limited symbol rate; set symbol_rate".into())),
        },
    };
    let bit_rate = raw_bit_rate(symbol_rate, 2, 4);
    let mut out = Vec::new();
    writeln!(
        out,
        "snr_rx1_db,snr1_db,snr2_db,ber1,ber2,ber_total,ber1_approx,ber2_approx,ber_total_approx,symbol_rate,bit_rate"
    )?;
    for snr_db in grid {
        if snr_db == f64::INFINITY {
            return Err(Error::Config("predict needs finite SNR values".into()));
        }
        let snr = snr_from_rx1(risqam::analysis::db_to_linear(snr_db), &h)?;
        let exact = BerPrediction::new(snr, BerMode::Exact);
        let approx = BerPrediction::new(snr, BerMode::Approximate);
        if approx.out_of_range() {
            eprintln!("warning: at {snr_db} dB the two-term approximation exceeds 0.5; reported as computed");
        }
        writeln!(
            out,
            "{snr_db:e},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{symbol_rate:e},{bit_rate:e}",
            db(snr.snr1),
            db(snr.snr2),
            exact.ber1,
            exact.ber2,
            exact.ber_total,
            approx.ber1,
            approx.ber2,
            approx.ber_total
        )?;
    }
    writeln!(out, "# seed={seed} version={VERSION}")?;
    emit(s.path("out").as_deref(), &out)
}

pub fn dump_constellation_cmd(s: &Settings) -> Result<()> {
    let seed = seed(s)?;
    let steps = s.steps(Steps::Finite(40))?;
    let frame = FrameConfig::default().with_steps(steps);
    frame.validate()?;
    let snr_db = match s.snr_grid("20")?.as_slice() {
        [one] => *one,
        _ => return Err(Error::Config("dump-constellation takes a single snr_db".into())),
    };
    let h = channel(s, seed)?;
    let power: f64 = s.get_or("power", 1.0)?;
    if !(power > 0.0) {
        return Err(Error::Config("transmit power must be positive".into()));
    }
    let seeds = Seeds::from_master(seed);
    let per = frame.payload_bits();
    let mut payload = match s.path("payload") {
        Some(p) => {
            let bytes = std::fs::read(&p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            bits_from_bytes(&bytes)
        }
        None => random_payload(per, seeds.payload),
    };
    if payload.len() > per {
        eprintln!("warning: payload truncated to one frame ({per} bits)");
    }
    payload.resize(per, 0);
    let sigma2 = if snr_db == f64::INFINITY {
        0.0
    } else {
        power * (h.get(0, 0).norm_sqr() + h.get(0, 1).norm_sqr()) / risqam::analysis::db_to_linear(snr_db)
    };
    let modulator = Modulator::new(steps)?;
    let knowledge = s.get_or("csi", ChannelKnowledge::LsPerFrame)?;
    let report = run_link(&frame, &modulator, &h, power, sigma2, &payload, seeds.noise, knowledge)?;
    eprintln!(
        "BER stream 1 = {:e}, stream 2 = {:e} over {} bits per stream",
        report.ber(0),
        report.ber(1),
        report.bits_per_stream
    );
    let mut out = Vec::new();
    write_constellation_csv(&report, &mut out)?;
    writeln!(out, "# seed={seed} version={VERSION}")?;
    emit(s.path("out").as_deref(), &out)
}
