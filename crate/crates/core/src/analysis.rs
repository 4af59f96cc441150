//! Closed-form link predictions: post-ZF SNR, 16-QAM bit error rates and
//! the DAC-limited symbol rate.
//!
//! All BER expressions assume unit mean symbol energy, `E|S|² = 1`; the
//! transceiver normalizes its constellations to honour that.

use crate::error::{Error, Result};
use crate::math::Mat2;

/// Complementary error function (libm, fdlibm-derived rational
/// approximations, sub-ulp accuracy).
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Post-equalization SNRs of the two streams, linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPair {
    pub snr1: f64,
    pub snr2: f64,
}

fn check_invertible(h: &Mat2) -> Result<()> {
    h.inverse().map(|_| ())
}

/// SNR of each stream after zero-forcing with the true channel.
pub fn zf_snr(h: &Mat2, p: f64, sigma2: f64) -> Result<SnrPair> {
    if !(p > 0.0 && sigma2 > 0.0) {
        return Err(Error::Domain("power and noise variance must be positive".into()));
    }
    check_invertible(h)?;
    let det2 = h.det().norm_sqr();
    let n = |r: usize, c: usize| h.get(r, c).norm_sqr();
    Ok(SnrPair {
        snr1: p * det2 / ((n(1, 1) + n(0, 1)) * sigma2),
        snr2: p * det2 / ((n(1, 0) + n(0, 0)) * sigma2),
    })
}

/// SNR measured on the first receive chain, `p·(|h11|² + |h12|²)/σ²`.
pub fn snr_rx1(h: &Mat2, p: f64, sigma2: f64) -> f64 {
    p * (h.get(0, 0).norm_sqr() + h.get(0, 1).norm_sqr()) / sigma2
}

/// Per-stream post-ZF SNRs implied by a first-chain SNR measurement.
pub fn snr_from_rx1(snr_rx1: f64, h: &Mat2) -> Result<SnrPair> {
    if !(snr_rx1 > 0.0) {
        return Err(Error::Domain("measured SNR must be positive".into()));
    }
    check_invertible(h)?;
    let det2 = h.det().norm_sqr();
    let n = |r: usize, c: usize| h.get(r, c).norm_sqr();
    let row1 = n(0, 0) + n(0, 1);
    Ok(SnrPair {
        snr1: snr_rx1 * det2 / ((n(1, 1) + n(0, 1)) * row1),
        snr2: snr_rx1 * det2 / ((n(1, 0) + n(0, 0)) * row1),
    })
}

/// Leading two-term approximation of Gray 16-QAM BER over AWGN.
///
/// Exceeds 0.5 near zero SNR; the value is returned as computed.
pub fn ber_16qam_approx(snr: f64) -> f64 {
    let x = (snr / 10.0).sqrt();
    0.375 * erfc(x) + 0.25 * erfc(3.0 * x)
}

/// Exact Gray 16-QAM BER over AWGN with unit symbol energy.
///
/// Per real axis the levels are `±1, ±3` (over `√10`); the sign bit errs
/// when the noise crosses zero, the magnitude bit when it crosses `±2`.
pub fn ber_16qam_exact(snr: f64) -> f64 {
    let x = (snr / 10.0).sqrt();
    let q = |k: f64| 0.5 * erfc(k * x);
    let sign_bit = 0.5 * (q(1.0) + q(3.0));
    let magnitude_bit = 0.5 * (2.0 * q(1.0) + q(3.0) - q(5.0));
    0.5 * (sign_bit + magnitude_bit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BerMode {
    Approximate,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPrediction {
    pub ber1: f64,
    pub ber2: f64,
    pub ber_total: f64,
    pub mode: BerMode,
}

impl BerPrediction {
    pub fn new(snr: SnrPair, mode: BerMode) -> Self {
        let f = match mode {
            BerMode::Approximate => ber_16qam_approx,
            BerMode::Exact => ber_16qam_exact,
        };
        let (ber1, ber2) = (f(snr.snr1), f(snr.snr2));
        BerPrediction {
            ber1,
            ber2,
            ber_total: 0.5 * (ber1 + ber2),
            mode,
        }
    }

    /// True when the approximation left the range of a probability of error.
    pub fn out_of_range(&self) -> bool {
        self.ber1 > 0.5 || self.ber2 > 0.5
    }
}

/// Highest symbol rate a DAC of `r_dac` samples/s supports with `q` steps.
pub fn max_symbol_rate(r_dac: f64, q: u32) -> Result<f64> {
    if !(r_dac > 0.0) || q == 0 {
        return Err(Error::Domain("DAC rate and step count must be positive".into()));
    }
    Ok(r_dac / f64::from(q))
}

/// Raw bit rate of `streams` parallel streams, overhead ignored.
pub fn raw_bit_rate(symbol_rate: f64, streams: u32, bits_per_symbol: u32) -> f64 {
    symbol_rate * f64::from(streams) * f64::from(bits_per_symbol)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
