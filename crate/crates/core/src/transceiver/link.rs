use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::modulator::Modulator;
use super::receiver::ls_channel_estimate;
use super::{build_frame, Frame, FrameConfig};
use crate::channel::complex_gaussian;
use crate::error::{Error, Result};
use crate::math::Mat2;

/// Channel state the receiver equalizes with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelKnowledge {
    /// LS estimate from each frame's own pilot subframe.
    #[default]
    LsPerFrame,
    /// LS estimates averaged over every frame of the run; the channel is
    /// constant across frames.
    LsAveraged,
    /// The true `√p·h̄`.
    Perfect,
}

impl std::str::FromStr for ChannelKnowledge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ls" | "ls-frame" => Ok(ChannelKnowledge::LsPerFrame),
            "ls-avg" | "ls-averaged" => Ok(ChannelKnowledge::LsAveraged),
            "perfect" => Ok(ChannelKnowledge::Perfect),
            other => Err(Error::Parse(format!(
                "unknown channel knowledge `{other}` (ls, ls-avg, perfect)"
            ))),
        }
    }
}

/// Outcome of a link run.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    /// Estimate of `√p·h̄` used for the first frame.
    pub h_est: Mat2,
    pub bits_per_stream: u64,
    pub errors: [u64; 2],
    /// Equalized data symbols of the first frame, per stream.
    pub recovered: [Vec<Complex64>; 2],
    pub frames: usize,
}

impl LinkReport {
    pub fn ber(&self, stream: usize) -> f64 {
        self.errors[stream] as f64 / self.bits_per_stream as f64
    }

    pub fn ber_total(&self) -> f64 {
        0.5 * (self.ber(0) + self.ber(1))
    }

    pub fn bits_total(&self) -> u64 {
        2 * self.bits_per_stream
    }
}

/// `n` pseudorandom bits (one per byte) from `seed`.
pub fn random_payload(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| u8::from(rng.random::<bool>())).collect()
}

/// Unpacks bytes into bits, most significant first.
pub fn bits_from_bytes(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1))
        .collect()
}

/// Estimate used, bit errors per stream, and (first frame only) the
/// equalized symbols.
type FrameOutcome = (Mat2, [u64; 2], Option<[Vec<Complex64>; 2]>);

struct Link<'a> {
    cfg: &'a FrameConfig,
    modulator: &'a Modulator,
    h: Mat2,
    sigma2: f64,
}

impl Link<'_> {
    fn rng(seed: u64, frame: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(frame as u64);
        rng
    }

    fn slot(&self, s: [Complex64; 2], rng: &mut ChaCha8Rng) -> [Complex64; 2] {
        let y = self.h.mul_vec(s);
        [
            y[0] + complex_gaussian(rng, self.sigma2),
            y[1] + complex_gaussian(rng, self.sigma2),
        ]
    }

    fn tx(&self, frame: &Frame, sub: usize, stream: usize, i: usize) -> Complex64 {
        let symbols = if sub == 0 { &frame.pilot } else { &frame.data };
        self.modulator.harmonic(symbols[stream][i])
    }

    /// Pilot observations and their LS estimate. Consumes the first part of
    /// the frame's noise stream.
    fn pilots(&self, frame: &Frame, rng: &mut ChaCha8Rng) -> Result<Mat2> {
        let n = self.cfg.pilot_symbols;
        let mut rx = [Vec::with_capacity(n), Vec::with_capacity(n)];
        let mut tx = [Vec::with_capacity(n), Vec::with_capacity(n)];
        for i in 0..n {
            let s = [self.tx(frame, 0, 0, i), self.tx(frame, 0, 1, i)];
            let y = self.slot(s, rng);
            for k in 0..2 {
                rx[k].push(y[k]);
                tx[k].push(s[k]);
            }
        }
        ls_channel_estimate([&rx[0], &rx[1]], [&tx[0], &tx[1]])
    }

    fn frame(&self, payload: &[u8], index: usize) -> Result<Frame> {
        let per = self.cfg.bits_per_stream();
        let base = index * 2 * per;
        build_frame(&payload[base..base + per], &payload[base + per..base + 2 * per], self.cfg)
    }
}

/// Runs whole frames of `payload` over `y = h̄·√p·S + w` on the first
/// harmonic and counts bit errors after LS/ZF and nearest-point demapping.
///
/// `payload` holds one bit per byte and must fill a whole number of frames;
/// each frame takes its first half for stream 1. Noise for frame `i` comes
/// from stream `i` of a ChaCha generator seeded with `seed`, so results do
/// not depend on thread count.
#[allow(clippy::too_many_arguments)]
pub fn run_link(
    cfg: &FrameConfig,
    modulator: &Modulator,
    h: &Mat2,
    p: f64,
    sigma2: f64,
    payload: &[u8],
    seed: u64,
    knowledge: ChannelKnowledge,
) -> Result<LinkReport> {
    cfg.validate()?;
    if modulator.steps() != cfg.steps {
        return Err(Error::Config(format!(
            "modulator built for q = {}, frame expects q = {}",
            modulator.steps(),
            cfg.steps
        )));
    }
    if !(p > 0.0) || !(sigma2 >= 0.0) {
        return Err(Error::Domain("power must be positive and noise non-negative".into()));
    }
    h.inverse()?;
    let per_frame = cfg.payload_bits();
    if payload.is_empty() || !payload.len().is_multiple_of(per_frame) {
        return Err(Error::Length {
            expected: payload.len().div_ceil(per_frame).max(1) * per_frame,
            got: payload.len(),
        });
    }
    let frames = payload.len() / per_frame;
    let link = Link {
        cfg,
        modulator,
        h: h.scale(Complex64::new(p.sqrt(), 0.0)),
        sigma2,
    };

    let shared = match knowledge {
        ChannelKnowledge::Perfect => Some(link.h),
        ChannelKnowledge::LsAveraged => {
            let sum = (0..frames)
                .into_par_iter()
                .map(|f| {
                    let frame = link.frame(payload, f)?;
                    link.pilots(&frame, &mut Link::rng(seed, f))
                })
                .try_reduce(
                    || Mat2::from_real([[0.0; 2]; 2]),
                    |a, b| Ok(Mat2(std::array::from_fn(|r| std::array::from_fn(|c| a.0[r][c] + b.0[r][c])))),
                )?;
            Some(sum.scale(Complex64::new(1.0 / frames as f64, 0.0)))
        }
        ChannelKnowledge::LsPerFrame => None,
    };

    let results = (0..frames)
        .into_par_iter()
        .map(|f| -> Result<FrameOutcome> {
            let frame = link.frame(payload, f)?;
            let mut rng = Link::rng(seed, f);
            let own = link.pilots(&frame, &mut rng)?;
            let h_est = shared.unwrap_or(own);
            let inv = h_est.inverse()?;
            let mut errors = [0u64; 2];
            let keep = f == 0;
            let mut recovered = [Vec::new(), Vec::new()];
            for i in 0..cfg.data_symbols() {
                let s = [link.tx(&frame, 1, 0, i), link.tx(&frame, 1, 1, i)];
                let y = link.slot(s, &mut rng);
                let est = inv.mul_vec(y);
                for k in 0..2 {
                    let sent = match frame.data[k][i] {
                        super::Symbol::Qam(b) => b,
                        _ => unreachable!("data slots carry QAM"),
                    };
                    let got = modulator.demap(est[k]);
                    errors[k] += u64::from((sent ^ got).count_ones());
                    if keep {
                        recovered[k].push(est[k]);
                    }
                }
            }
            Ok((h_est, errors, keep.then_some(recovered)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut errors = [0u64; 2];
    for (_, e, _) in &results {
        errors[0] += e[0];
        errors[1] += e[1];
    }
    let (h_est, _, first) = results.into_iter().next().expect("at least one frame");
    Ok(LinkReport {
        h_est,
        bits_per_stream: (frames * cfg.bits_per_stream()) as u64,
        errors,
        recovered: first.expect("first frame keeps its symbols"),
        frames,
    })
}

/// Writes equalized symbols as CSV `stream,slot,re,im` (streams 1-based).
pub fn write_constellation_csv<W: Write>(report: &LinkReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(["stream", "slot", "re", "im"]).map_err(err)?;
    for (k, symbols) in report.recovered.iter().enumerate() {
        for (i, z) in symbols.iter().enumerate() {
            w.write_record([(k + 1).to_string(), i.to_string(), format!("{:e}", z.re), format!("{:e}", z.im)])
                .map_err(err)?;
        }
    }
    w.flush()?;
    Ok(())
}
