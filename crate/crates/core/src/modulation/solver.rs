use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::harmonic::discrete_harmonic_coefficient;
use super::qam::{QamMapEntry, TABLE_16QAM};
use super::waveform::Waveform;
use super::{Steps, SymbolParams};
use crate::error::{Error, Result};
use crate::math::{arg_2pi, circular_distance, simpson, sinc, wrap_phase};
use crate::ris::{amplitude_at_phase, AmplitudeProfile};

/// Simpson panels per smooth piece of the integrand.
pub const QUADRATURE_PANELS: usize = 4096;

const MAX_ITERATIONS: usize = 200;

/// Fourier coefficient of order `l` of the linear-phase symbol whose
/// reflection amplitude follows `profile`, by piecewise Simpson quadrature.
///
/// The integrand is split at the wrap instant `t0`, at every profile kink
/// and at every multiple of `2π` of the commanded phase, so each piece is
/// smooth.
pub fn profile_harmonic(
    profile: &AmplitudeProfile,
    delta_phi: f64,
    t0_frac: f64,
    l: i32,
) -> Result<Complex64> {
    if !(0.0..1.0).contains(&t0_frac) {
        return Err(Error::Domain(format!("t0 = {t0_frac} Ts outside [0, Ts)")));
    }
    if !(delta_phi >= 0.0) || !delta_phi.is_finite() {
        return Err(Error::Domain("Δφ must be finite and non-negative".into()));
    }
    let phase = |tau: f64, before_wrap: bool| {
        if before_wrap {
            delta_phi * (tau + 1.0 - t0_frac)
        } else {
            delta_phi * (tau - t0_frac)
        }
    };

    let mut cuts = vec![0.0, t0_frac, 1.0];
    if delta_phi > 0.0 {
        let turns = (delta_phi / TAU).ceil() as i64;
        let mut marks: Vec<f64> = profile.kinks();
        marks.push(0.0);
        for k in 0..=turns {
            for &m in &marks {
                let c = m + TAU * k as f64;
                let before = c / delta_phi - 1.0 + t0_frac;
                let after = c / delta_phi + t0_frac;
                if before > 0.0 && before < t0_frac {
                    cuts.push(before);
                }
                if after > t0_frac && after < 1.0 {
                    cuts.push(after);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let lf = f64::from(l);
    let mut total = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 1e-15 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let before = mid < t0_frac;
        let turn = (phase(mid, before) / TAU).floor() * TAU;
        total += simpson(
            |tau| {
                let phi = phase(tau, before);
                let local = (phi - turn).clamp(0.0, TAU);
                let amp = amplitude_at_phase(profile, local).unwrap_or(1.0);
                Complex64::from_polar(amp, phi - TAU * lf * tau)
            },
            a,
            b,
            QUADRATURE_PANELS,
        );
    }
    Ok(total)
}

/// Largest first-harmonic amplitude reachable under `profile`, attained by
/// the full `2π` sweep.
pub fn a1_max(profile: &AmplitudeProfile) -> Result<f64> {
    Ok(profile_harmonic(profile, TAU, 0.0, 1)?.norm())
}

/// Bisection for `f(x) = target` on `[lo, hi]` with `f(lo) ≤ target ≤ f(hi)`.
fn bisect<F>(f: F, target: f64, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if !(f_lo <= target && target <= f_hi) {
        return Err(Error::Domain(format!(
            "target {target} not bracketed by [{f_lo}, {f_hi}]"
        )));
    }
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if (v - target).abs() <= 1e-14 || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence(MAX_ITERATIONS))
}

/// Result of solving `(t0, Δφ)` for a target harmonic, with the residuals of
/// an independent re-evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingSolution {
    pub params: SymbolParams,
    /// Coefficient re-integrated at the solved parameters.
    pub achieved: Complex64,
    pub amp_residual: f64,
    pub phase_residual: f64,
}

/// Finds a continuous-ramp symbol whose order-`l` harmonic under `profile`
/// equals `target_amp·e^{j·target_phase}`.
///
/// `Δφ` is found by bisection on `(0, 2πl]`, where the amplitude rises from
/// zero to its maximum; `t0` then follows from the time-shift rotation.
pub fn solve_mapping(
    profile: &AmplitudeProfile,
    target_amp: f64,
    target_phase: f64,
    l: i32,
) -> Result<MappingSolution> {
    if l < 1 {
        return Err(Error::UnsupportedOrder(l));
    }
    if !(target_amp > 0.0) || !target_phase.is_finite() {
        return Err(Error::Domain(format!("target amplitude {target_amp} must be positive")));
    }
    let lf = f64::from(l);
    let top = TAU * lf;
    let reach = profile_harmonic(profile, top, 0.0, l)?.norm();
    if target_amp > reach * (1.0 + 1e-12) {
        return Err(Error::Unreachable {
            target: target_amp,
            max: reach,
        });
    }
    let delta_phi = if target_amp >= reach {
        top
    } else {
        bisect(
            |d| Ok(profile_harmonic(profile, d, 0.0, l)?.norm()),
            target_amp,
            0.0,
            top,
        )?
    };

    let unshifted = profile_harmonic(profile, delta_phi, 0.0, l)?;
    let period = 1.0 / lf;
    let mut t0 = ((arg_2pi(unshifted) - target_phase) / (TAU * lf)).rem_euclid(period);
    if t0 >= period {
        t0 = 0.0;
    }
    let params = SymbolParams::normalized(t0, delta_phi, Steps::Unbounded)?;

    let achieved = profile_harmonic(profile, delta_phi, t0, l)?;
    Ok(MappingSolution {
        params,
        achieved,
        amp_residual: (achieved.norm() - target_amp).abs(),
        phase_residual: circular_distance(arg_2pi(achieved), target_phase),
    })
}

/// Solves every 16-QAM entry under `profile`, scaling the rings so the
/// outer ring sits at the profile's reachable maximum.
pub fn solve_table_16qam(profile: &AmplitudeProfile) -> Result<Vec<(QamMapEntry, MappingSolution)>> {
    let scale = a1_max(profile)?;
    TABLE_16QAM
        .iter()
        .map(|row| {
            let amp = row.amp * scale;
            let sol = solve_mapping(profile, amp, row.phase, 1)?;
            let entry = QamMapEntry {
                amp,
                t0_frac: sol.params.t0_frac(),
                delta_phi: sol.params.delta_phi(),
                ..*row
            };
            Ok((entry, sol))
        })
        .collect()
}

/// A `q`-step symbol realizing a target first harmonic exactly: sweep `Δφ`,
/// circular shift by whole steps, and a constant phase trim of at most
/// half a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteDesign {
    pub steps: u32,
    pub delta_phi: f64,
    pub shift: u32,
    pub trim: f64,
}

impl DiscreteDesign {
    /// Phase of segment `p`.
    pub fn segment_phase(&self, p: u32) -> f64 {
        let q = self.steps;
        let src = (p + q - self.shift % q) % q;
        self.trim + self.delta_phi * f64::from(src) / f64::from(q)
    }

    /// One constant-envelope sample per segment, `Ts = 1`.
    pub fn waveform(&self) -> Waveform {
        let samples = (0..self.steps)
            .map(|p| Complex64::from_polar(1.0, self.segment_phase(p)))
            .collect();
        Waveform::new(samples, 1.0 / f64::from(self.steps)).expect("at least one segment")
    }

    /// First-harmonic coefficient of the staircase in closed form.
    pub fn harmonic(&self) -> Result<Complex64> {
        let p = SymbolParams::normalized(0.0, self.delta_phi, Steps::Finite(self.steps))?;
        let base = discrete_harmonic_coefficient(&p, 1)?.value;
        let rotation = self.trim - TAU * f64::from(self.shift) / f64::from(self.steps);
        Ok(base * Complex64::from_polar(1.0, rotation))
    }

    /// Params of the untrimmed shifted staircase.
    pub fn params(&self) -> Result<SymbolParams> {
        SymbolParams::normalized(
            f64::from(self.shift) / f64::from(self.steps),
            self.delta_phi,
            Steps::Finite(self.steps),
        )
    }
}

/// Designs a `q`-step symbol with first harmonic
/// `ring·sinc(π/q)·e^{j·phase}`, where `ring ∈ (0, 1]` is relative to the
/// full-sweep staircase amplitude.
pub fn solve_discrete_mapping(ring: f64, phase: f64, q: u32) -> Result<DiscreteDesign> {
    if q < 2 {
        return Err(Error::Domain(format!("q = {q} has no first harmonic")));
    }
    if !(ring > 0.0 && ring <= 1.0 + 1e-12) || !phase.is_finite() {
        return Err(Error::Domain(format!("ring amplitude {ring} outside (0, 1]")));
    }
    let qf = f64::from(q);
    let peak = sinc(PI / qf);
    let magnitude = |d: f64| -> Result<f64> {
        let p = SymbolParams::normalized(0.0, d, Steps::Finite(q))?;
        Ok(discrete_harmonic_coefficient(&p, 1)?.amplitude())
    };
    let delta_phi = if ring >= 1.0 {
        TAU
    } else {
        bisect(magnitude, ring * peak, 0.0, TAU)?
    };

    let p = SymbolParams::normalized(0.0, delta_phi, Steps::Finite(q))?;
    let base = discrete_harmonic_coefficient(&p, 1)?.value;
    let theta = phase - base.arg();
    let k = (-theta * qf / TAU).round();
    let trim = theta + TAU * k / qf;
    let shift = (k as i64).rem_euclid(i64::from(q)) as u32;
    Ok(DiscreteDesign {
        steps: q,
        delta_phi,
        shift,
        trim: wrap_to_pi(trim),
    })
}

fn wrap_to_pi(x: f64) -> f64 {
    let w = wrap_phase(x);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::harmonic::harmonic_coefficient;
    use crate::modulation::waveform::ideal_waveform;
    use proptest::prelude::*;

    /// Rectangle-rule Fourier coefficient of a densely sampled waveform.
    fn riemann_harmonic(w: &Waveform, l: i32) -> Complex64 {
        let n = w.len() as f64;
        w.samples()
            .iter()
            .enumerate()
            .map(|(i, s)| s * Complex64::from_polar(1.0, -TAU * f64::from(l) * i as f64 / n))
            .sum::<Complex64>()
            / n
    }

    #[test]
    fn triangular_profile_peak() {
        let a = a1_max(&AmplitudeProfile::triangular_3db()).unwrap();
        assert!((a - 0.85).abs() < 1e-6);
        assert!((a1_max(&AmplitudeProfile::Ideal).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_profile_matches_closed_form() {
        for &(t0, d, l) in &[(0.0, TAU, 1), (0.3, 1.7, 1), (0.81, 3.9, -2), (0.5, 10.0, 2)] {
            let q = profile_harmonic(&AmplitudeProfile::Ideal, d, t0, l).unwrap();
            let c = harmonic_coefficient(&SymbolParams::ideal(t0, d).unwrap(), l).unwrap();
            assert!((q - c.value).norm() < 1e-12, "{t0} {d} {l}");
        }
    }

    #[test]
    fn ideal_solution_reproduces_first_table_row() {
        let s = solve_mapping(&AmplitudeProfile::Ideal, 1.0, 1.25 * PI, 1).unwrap();
        assert!((s.params.t0_frac() - 0.375).abs() < 1e-9);
        assert!((s.params.delta_phi() - TAU).abs() < 1e-12);
        assert!(s.amp_residual < 1e-10 && s.phase_residual < 1e-10);
    }

    #[test]
    fn ideal_table_matches_listed_params() {
        for (entry, sol) in solve_table_16qam(&AmplitudeProfile::Ideal).unwrap() {
            let listed = TABLE_16QAM[usize::from(entry.symbol_index)];
            assert!((entry.delta_phi - listed.delta_phi).abs() < 1e-2 * PI);
            assert!(circular_distance(TAU * entry.t0_frac, TAU * listed.t0_frac) < 1e-2 * TAU);
            assert!(sol.amp_residual < 1e-4 && sol.phase_residual < 1e-4);
        }
    }

    #[test]
    fn triangular_inner_ring_against_dense_samples() {
        let profile = AmplitudeProfile::triangular_3db();
        let target = 0.85 / 3.0;
        let s = solve_mapping(&profile, target, 1.25 * PI, 1).unwrap();
        let w = ideal_waveform(&s.params, 1 << 18)
            .unwrap()
            .with_profile(&profile)
            .unwrap();
        let oracle = riemann_harmonic(&w, 1);
        assert!((oracle.norm() - target).abs() < 1e-4);
        assert!(circular_distance(arg_2pi(oracle), 1.25 * PI) < 1e-4);
    }

    #[test]
    fn solver_errors() {
        let profile = AmplitudeProfile::triangular_3db();
        assert!(matches!(
            solve_mapping(&profile, 0.9, 0.0, 1),
            Err(Error::Unreachable { .. })
        ));
        assert!(matches!(
            solve_mapping(&profile, 0.5, 0.0, 0),
            Err(Error::UnsupportedOrder(0))
        ));
        assert!(solve_mapping(&profile, 0.0, 0.0, 1).is_err());
        let full = solve_mapping(&profile, 0.85, 0.0, 1).unwrap();
        assert_eq!(full.params.delta_phi(), TAU);
        assert!((full.achieved.norm() - 0.85).abs() < 1e-9);
    }

    #[test]
    fn second_harmonic_target() {
        let s = solve_mapping(&AmplitudeProfile::Ideal, 0.5, 2.0, 2).unwrap();
        let c = harmonic_coefficient(&s.params, 2).unwrap();
        assert!((c.amplitude() - 0.5).abs() < 1e-9);
        assert!(circular_distance(c.phase(), 2.0) < 1e-9);
    }

    #[test]
    fn discrete_design_rejects_bad_input() {
        assert!(solve_discrete_mapping(1.0, 0.0, 1).is_err());
        assert!(solve_discrete_mapping(1.5, 0.0, 8).is_err());
        assert!(solve_discrete_mapping(0.0, 0.0, 8).is_err());
    }

    proptest! {
        #[test]
        fn discrete_design_hits_target(ring in 0.05f64..=1.0, phase in 0.0f64..TAU, q in 2u32..=64) {
            let d = solve_discrete_mapping(ring, phase, q).unwrap();
            let want = Complex64::from_polar(ring * sinc(PI / f64::from(q)), phase);
            prop_assert!(d.trim.abs() <= PI / f64::from(q) + 1e-12);
            prop_assert!((d.harmonic().unwrap() - want).norm() < 1e-9);
            // the sampled staircase, analysed segment by segment
            let w = d.waveform();
            let qf = f64::from(q);
            let seg = w.samples().iter().enumerate().map(|(p, s)| {
                let p = p as f64;
                let j = Complex64::i();
                s * ((-j * TAU * (p + 1.0) / qf).exp() - (-j * TAU * p / qf).exp()) / (-j * TAU)
            }).sum::<Complex64>();
            prop_assert!((seg - want).norm() < 1e-9);
            prop_assert!(w.samples().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        }

        #[test]
        fn ideal_solver_roundtrip(amp in 0.05f64..1.0, phase in 0.0f64..TAU) {
            let s = solve_mapping(&AmplitudeProfile::Ideal, amp, phase, 1).unwrap();
            let c = harmonic_coefficient(&s.params, 1).unwrap();
            prop_assert!((c.amplitude() - amp).abs() < 1e-9);
            prop_assert!(circular_distance(c.phase(), phase) < 1e-9);
        }
    }
}
