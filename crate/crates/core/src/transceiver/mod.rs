//! 2×2 frame construction, harmonic-domain link and the LS/ZF receiver.
//!
//! Each stream drives half of the surface. A frame holds one sync
//! subframe, one pilot subframe and the data subframes; every slot carries
//! one symbol per stream.

mod link;
mod modulator;
mod receiver;

use crate::error::{Error, Result};
use crate::modulation::Steps;

pub use link::{
    bits_from_bytes, random_payload, run_link, write_constellation_csv, ChannelKnowledge,
    LinkReport,
};
pub use modulator::Modulator;
pub use receiver::{dft_bin, extract_harmonic, ls_channel_estimate, zf_equalize};

/// Frame layout and sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConfig {
    pub data_subframes: usize,
    pub symbols_per_subframe: usize,
    pub bits_per_symbol: usize,
    pub streams: usize,
    pub pilot_symbols: usize,
    pub oversampling: usize,
    /// Symbols per second.
    pub symbol_rate: f64,
    /// Phase steps per symbol.
    pub steps: Steps,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            data_subframes: 60,
            symbols_per_subframe: 64,
            bits_per_symbol: 4,
            streams: 2,
            pilot_symbols: 64,
            oversampling: 8,
            symbol_rate: 2.5e6,
            steps: Steps::Finite(40),
        }
    }
}

impl FrameConfig {
    pub fn with_steps(mut self, steps: Steps) -> Self {
        self.steps = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.streams != 2 {
            return Err(Error::Config(format!("{} streams; only 2×2 is supported", self.streams)));
        }
        if self.bits_per_symbol != 4 {
            return Err(Error::Config("only 16-QAM (4 bits per symbol) is supported".into()));
        }
        if self.data_subframes == 0 || self.symbols_per_subframe == 0 {
            return Err(Error::Config("frame has no data slots".into()));
        }
        if self.pilot_symbols < 2 || !self.pilot_symbols.is_multiple_of(2) {
            return Err(Error::Config("pilot subframe needs an even, non-zero length".into()));
        }
        if self.oversampling < 2 {
            return Err(Error::Config("oversampling must be at least 2".into()));
        }
        if !(self.symbol_rate > 0.0) {
            return Err(Error::Config("symbol rate must be positive".into()));
        }
        if let Steps::Finite(q) = self.steps {
            if q < 2 {
                return Err(Error::Config(format!("q = {q} has no first harmonic")));
            }
        }
        Ok(())
    }

    pub fn data_symbols(&self) -> usize {
        self.data_subframes * self.symbols_per_subframe
    }

    pub fn bits_per_stream(&self) -> usize {
        self.data_symbols() * self.bits_per_symbol
    }

    /// Payload of one frame over all streams.
    pub fn payload_bits(&self) -> usize {
        self.bits_per_stream() * self.streams
    }

    /// Pilot slots in which `stream` is active; the other stream is silent.
    pub fn pilot_slots(&self, stream: usize) -> std::ops::Range<usize> {
        let half = self.pilot_symbols / 2;
        stream * half..(stream + 1) * half
    }
}

/// What one stream transmits in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    /// 16-QAM table index (equal to its source bits).
    Qam(u8),
    /// Full-amplitude BPSK; `true` is the π phase.
    Bpsk(bool),
    /// Zero sweep, no first harmonic.
    Silent,
}

/// Fixed BPSK pattern of the sync subframe.
const SYNC_PATTERN: u64 = 0xB4C3_96A5_1E2D_F087;

/// One frame of both streams.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub sync: [Vec<Symbol>; 2],
    pub pilot: [Vec<Symbol>; 2],
    pub data: [Vec<Symbol>; 2],
    pub payload: [Vec<u8>; 2],
}

fn pilot_sign(slot: usize) -> bool {
    // fixed pseudo-random BPSK signs, known to the receiver
    (SYNC_PATTERN.rotate_left(17) >> (slot % 64)) & 1 == 1
}

/// Maps two payloads (one bit per byte, values 0/1) into a frame.
pub fn build_frame(bits1: &[u8], bits2: &[u8], cfg: &FrameConfig) -> Result<Frame> {
    cfg.validate()?;
    let need = cfg.bits_per_stream();
    for bits in [bits1, bits2] {
        if bits.len() != need {
            return Err(Error::Length {
                expected: need,
                got: bits.len(),
            });
        }
        if bits.iter().any(|b| *b > 1) {
            return Err(Error::Domain("payload bits must be 0 or 1".into()));
        }
    }
    let data = |bits: &[u8]| -> Vec<Symbol> {
        bits.chunks(cfg.bits_per_symbol)
            .map(|c| Symbol::Qam(c.iter().fold(0u8, |acc, b| (acc << 1) | b)))
            .collect()
    };
    let pilot = |stream: usize| -> Vec<Symbol> {
        (0..cfg.pilot_symbols)
            .map(|slot| {
                if cfg.pilot_slots(stream).contains(&slot) {
                    Symbol::Bpsk(pilot_sign(slot))
                } else {
                    Symbol::Silent
                }
            })
            .collect()
    };
    let sync: Vec<Symbol> = (0..cfg.symbols_per_subframe)
        .map(|i| Symbol::Bpsk((SYNC_PATTERN >> (i % 64)) & 1 == 1))
        .collect();
    Ok(Frame {
        sync: [sync.clone(), sync],
        pilot: [pilot(0), pilot(1)],
        data: [data(bits1), data(bits2)],
        payload: [bits1.to_vec(), bits2.to_vec()],
    })
}
