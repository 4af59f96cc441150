//! Flat `key = value` settings merged from a file and command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use risqam::modulation::Steps;
use risqam::{Error, Result};

/// Keys understood by at least one subcommand.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "master seed (channel, payload and noise streams)"),
    ("snr_db", "SNR_Rx1 grid in dB: `start:stop:step`, a comma list, `inf` for noiseless"),
    ("bits", "payload bits per SNR point, at least 10000"),
    ("q", "phase steps per symbol, or `inf`; disc-sweep takes a list"),
    ("out", "output CSV path (stdout when absent)"),
    ("csi", "receiver channel knowledge: ls, ls-avg or perfect"),
    ("power", "transmit power p"),
    ("theory", "theory columns: exact or approx"),
    ("channel", "2x2 channel CSV (row,col,re,im); random from seed when absent"),
    ("profile", "amplitude profile: ideal, triangular or a phase_rad,amplitude CSV"),
    ("amp_q", "disc-sweep amplitude-table step counts"),
    ("amp_out", "disc-sweep amplitude-table path"),
    ("cells", "beam-scan cell counts"),
    ("distance_m", "beam-scan receiver distance"),
    ("angle_deg", "beam-scan receiver angle off boresight"),
    ("carrier_hz", "carrier frequency"),
    ("draws", "beam-scan random-phase draws"),
    ("r_dac", "DAC sample rate for predict"),
    ("symbol_rate", "symbol rate for predict (defaults to r_dac/q)"),
    ("payload", "raw binary payload file for dump-constellation"),
];

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", n + 1)))?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Settings::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(config_err(format!("unknown key `{key}`")));
        }
        self.values.insert(key, value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| config_err(format!("bad value `{v}` for `{key}`")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    pub fn steps(&self, default: Steps) -> Result<Steps> {
        match self.steps_list(&[default])?.as_slice() {
            [one] => Ok(*one),
            _ => Err(config_err("`q` takes a single step count here")),
        }
    }

    pub fn steps_list(&self, default: &[Steps]) -> Result<Vec<Steps>> {
        self.list("q", default)
    }

    pub fn list<T: FromStr + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| config_err(format!("bad entry `{}` in `{key}`", s.trim())))
                })
                .collect(),
        }
    }

    pub fn snr_grid(&self, default: &str) -> Result<Vec<f64>> {
        parse_grid(self.raw("snr_db").unwrap_or(default))
    }
}

fn parse_db(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| config_err(format!("bad SNR `{t}`"))),
    }
}

/// `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(grid: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = grid.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, h) = (parse_db(start)?, parse_db(stop)?, parse_db(step)?);
            if !(h > 0.0) || !b.is_finite() || !a.is_finite() || b < a {
                return Err(config_err(format!("bad SNR range `{grid}`")));
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * h).collect())
        }
        [_] => grid.split(',').map(parse_db).collect(),
        _ => Err(config_err(format!("bad SNR grid `{grid}`"))),
    }
}
