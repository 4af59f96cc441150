//! Browser demo: three interactive views over the simulator, exported with
//! `wasm-bindgen`. Each export is a thin wrapper over a plain Rust function
//! in [`demo`], which is what the native tests exercise.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use wasm_bindgen::prelude::*;

pub mod demo;

fn js(e: risqam::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `|a₁|` over `points` sweeps in `[0, 4π]`; `q = 0` is the continuous ramp.
#[wasm_bindgen(js_name = harmonicCurve)]
pub fn harmonic_curve(q: u32, points: usize) -> Result<Vec<f64>, JsError> {
    demo::harmonic_curve(q, points).map(|c| c.amplitudes).map_err(js)
}

/// Equalized symbols of one frame as interleaved `re, im` pairs, stream 1
/// followed by stream 2.
#[wasm_bindgen(js_name = constellation)]
pub fn constellation(q: u32, snr_db: f64, seed: u64) -> Result<Vec<f64>, JsError> {
    demo::constellation(q, snr_db, seed)
        .map(|[a, b]| a.into_iter().chain(b).flat_map(|z| [z.re, z.im]).collect())
        .map_err(js)
}

/// Rows of `snr_db, measured, theory` (total BER) over an SNR_Rx1 grid.
#[wasm_bindgen(js_name = berCurve)]
pub fn ber_curve(q: u32, snr_lo: f64, snr_hi: f64, step: f64, frames: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    demo::ber_curve(q, snr_lo, snr_hi, step, frames, seed)
        .map(|rows| rows.into_iter().flat_map(|r| [r.snr_db, r.measured, r.theory]).collect())
        .map_err(js)
}
