use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::{HarmonicCoefficient, Steps, SymbolParams};
use crate::error::{Error, Result};
use crate::math::sinc;

/// Fourier coefficient `a_l` of the continuous linear-phase symbol.
///
/// Amplitude is `|sinc(Δφ/2 − lπ)|`. The phase is assembled from the
/// floor/mod/step terms so that it is the argument of the signed sinc, then
/// rotated by `−2πl·t0/Ts`. The resonant case `Δφ = 2lπ` returns a unit
/// coefficient carrying only the time-shift rotation.
pub fn harmonic_coefficient(params: &SymbolParams, l: i32) -> Result<HarmonicCoefficient> {
    if params.steps() != Steps::Unbounded {
        return Err(Error::Domain(
            "closed-form coefficient needs a continuous phase ramp".into(),
        ));
    }
    let lf = f64::from(l);
    let dphi = params.delta_phi();
    let shift = -lf * TAU * params.t0_frac();

    if dphi == TAU * lf {
        return Ok(HarmonicCoefficient {
            order: l,
            value: Complex64::from_polar(1.0, shift),
        });
    }

    let x = dphi / 2.0 - lf * PI;
    let amplitude = sinc(x).abs();
    let floor_term = (dphi / TAU - lf).floor().rem_euclid(2.0);
    let step_term = if TAU * lf - dphi > 0.0 { 1.0 } else { 0.0 };
    let phase = shift + x + floor_term * PI + step_term * PI;
    Ok(HarmonicCoefficient {
        order: l,
        value: Complex64::from_polar(amplitude, phase),
    })
}

/// `sin(x) / (q·sin(x/q))`, the periodic-sinc ratio `sinc(x)/sinc(x/q)`
/// with its removable points filled in.
fn dirichlet(x: f64, q: f64) -> f64 {
    let s = (x / q).sin();
    if s.abs() < 1e-12 {
        x.cos() / (x / q).cos()
    } else {
        x.sin() / (q * s)
    }
}

fn finite_steps(params: &SymbolParams) -> Result<u32> {
    params
        .steps()
        .finite()
        .ok_or_else(|| Error::Domain("discrete coefficient needs a finite step count".into()))
}

/// Fourier coefficient `ã_l` of the `q`-step staircase symbol.
///
/// Computed for `t0 = 0` and rotated by `−2πl·t0/Ts`; that rotation is exact
/// when `t0` is a whole number of steps.
pub fn discrete_harmonic_coefficient(
    params: &SymbolParams,
    l: i32,
) -> Result<HarmonicCoefficient> {
    let q = f64::from(finite_steps(params)?);
    if l == 0 {
        return Err(Error::UnsupportedOrder(l));
    }
    let lf = f64::from(l);
    let dphi = params.delta_phi();
    let x = dphi / 2.0 - lf * PI;
    let magnitude = sinc(lf * PI / q) * dirichlet(x, q);
    let phase = x - dphi / (2.0 * q) - lf * TAU * params.t0_frac();
    Ok(HarmonicCoefficient {
        order: l,
        value: Complex64::from_polar(magnitude, phase),
    })
}

/// Ratio `ã_l / a_l` between the staircase and continuous coefficients.
pub fn discretization_ratio(params: &SymbolParams, l: i32) -> Result<Complex64> {
    let q = f64::from(finite_steps(params)?);
    if l == 0 {
        return Err(Error::UnsupportedOrder(l));
    }
    let lf = f64::from(l);
    let dphi = params.delta_phi();
    let x = dphi / 2.0 - lf * PI;
    if sinc(x).abs() < 1e-12 {
        return Err(Error::UndefinedRatio {
            delta_phi: dphi,
            order: l,
        });
    }
    let magnitude = sinc(lf * PI / q) / sinc(x / q);
    Ok(Complex64::from_polar(magnitude, -dphi / (2.0 * q)))
}
