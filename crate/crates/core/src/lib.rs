//! Harmonic QAM modulation and 2×2 MIMO link simulation for
//! reconfigurable intelligent surface (RIS) transmitters.
//!
//! A RIS transmitter reflects an unmodulated carrier and sweeps each unit
//! cell's reflection phase linearly over a symbol period. The first
//! harmonic of that periodic phase ramp carries a QAM symbol whose
//! amplitude is set by the sweep depth and whose phase is set by a circular
//! time shift.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod math;
pub mod modulation;
pub mod ris;
pub mod transceiver;

pub use error::{Error, Result};
