//! `risqam`: experiment runner for the RIS harmonic-QAM link simulator.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Settings;

#[derive(Parser, Debug)]
#[command(name = "risqam", version, about = "RIS harmonic 16-QAM 2x2 link experiments", long_about = None)]
struct Cli {
    /// Flat `key = value` settings file; flags below override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// SNR_Rx1 in dB: `start:stop:step`, comma list, or `inf`.
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "GRID")]
    snr_db: Option<String>,
    /// Payload bits per SNR point.
    #[arg(long, global = true)]
    bits: Option<String>,
    /// Phase steps per symbol (`inf` for a continuous ramp); lists for disc-sweep.
    #[arg(long, global = true)]
    q: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output CSV path; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Receiver channel knowledge: ls, ls-avg or perfect.
    #[arg(long, global = true)]
    csi: Option<String>,
    /// Any other setting, e.g. `--set profile=triangular`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Measured and theoretical BER versus SNR_Rx1 on a fixed seeded channel.
    BerSweep,
    /// First-harmonic amplitude versus q, and BER curves per q.
    DiscSweep,
    /// Solve (t0, Δφ) for the 16-QAM table under an amplitude profile.
    SolveMap,
    /// Received amplitude versus cell count with and without beamforming.
    BeamScan,
    /// Closed-form post-ZF SNR and BER predictions.
    Predict,
    /// Equalized data symbols of one frame.
    DumpConstellation,
    /// List configuration keys.
    Keys,
}

fn settings(cli: &Cli) -> risqam::Result<Settings> {
    let mut s = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    let flags = [
        ("snr_db", cli.snr_db.clone()),
        ("bits", cli.bits.clone()),
        ("q", cli.q.clone()),
        ("seed", cli.seed.clone()),
        ("out", cli.out.as_ref().map(|p| p.to_string_lossy().into_owned())),
        ("csi", cli.csi.clone()),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            s.set(k, &v)?;
        }
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| risqam::Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        s.set(k.trim(), v.trim())?;
    }
    Ok(s)
}

fn run(cli: &Cli) -> risqam::Result<()> {
    let s = settings(cli)?;
    match cli.command {
        Command::BerSweep => commands::ber_sweep_cmd(&s),
        Command::DiscSweep => commands::disc_sweep_cmd(&s),
        Command::SolveMap => commands::solve_map_cmd(&s),
        Command::BeamScan => commands::beam_scan_cmd(&s),
        Command::Predict => commands::predict_cmd(&s),
        Command::DumpConstellation => commands::dump_constellation_cmd(&s),
        Command::Keys => {
            for (k, help) in config::KEYS {
                println!("{k:<12} {help}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
