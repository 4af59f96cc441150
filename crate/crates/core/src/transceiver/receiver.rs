use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{sinc, Mat2};

/// Plain DFT bin `l`, normalized by the sample count.
pub fn dft_bin(samples: &[Complex64], l: i32) -> Complex64 {
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(p, s)| s * Complex64::from_polar(1.0, -TAU * f64::from(l) * p as f64 / n))
        .sum::<Complex64>()
        / n
}

/// Order-`l` harmonic of a symbol from `oversampling` uniformly spaced
/// samples, each held for one sample period.
///
/// The DFT bin is corrected by the hold's transfer `sinc(lπ/N)·e^{−jlπ/N}`,
/// so a staircase with one step per sample is analysed exactly.
pub fn extract_harmonic(samples: &[Complex64], oversampling: usize, l: i32) -> Result<Complex64> {
    if samples.len() != oversampling {
        return Err(Error::Length {
            expected: oversampling,
            got: samples.len(),
        });
    }
    let n = oversampling as f64;
    let x = f64::from(l) * PI / n;
    Ok(dft_bin(samples, l) * Complex64::from_polar(sinc(x), -x))
}

/// Least-squares estimate of `√p·h̄` from the pilot subframe.
///
/// `rx[k]` are the pilot-slot values at antenna `k`; `tx[j]` the known
/// pilots of stream `j`, (numerically) zero where the stream is silent. Entry `(k, j)` is
/// the mean of `rx[k]/tx[j]` over the slots where only stream `j` is active.
pub fn ls_channel_estimate(rx: [&[Complex64]; 2], tx: [&[Complex64]; 2]) -> Result<Mat2> {
    let n = tx[0].len();
    for s in rx.iter().chain(tx.iter()) {
        if s.len() != n {
            return Err(Error::Length {
                expected: n,
                got: s.len(),
            });
        }
    }
    // a silent slot's harmonic vanishes up to rounding
    let active = |s: &[Complex64]| -> Vec<bool> {
        let peak = s.iter().map(|z| z.norm()).fold(0.0, f64::max);
        s.iter().map(|z| z.norm() > 1e-9 * peak).collect()
    };
    let on = [active(tx[0]), active(tx[1])];
    let mut h = Mat2::identity();
    for j in 0..2 {
        let other = 1 - j;
        let slots: Vec<usize> = (0..n).filter(|&i| on[j][i]).collect();
        if slots.is_empty() {
            return Err(Error::Domain(format!("stream {} has no pilot slots", j + 1)));
        }
        if slots.iter().any(|&i| on[other][i]) {
            return Err(Error::Domain("pilot slots of the two streams overlap".into()));
        }
        for (k, rk) in rx.iter().enumerate() {
            let sum: Complex64 = slots.iter().map(|&i| rk[i] / tx[j][i]).sum();
            h.0[k][j] = sum / slots.len() as f64;
        }
    }
    Ok(h)
}

/// Zero-forcing: `S̃ = ĥ⁻¹·Y`.
pub fn zf_equalize(h_est: &Mat2, y: [Complex64; 2]) -> Result<[Complex64; 2]> {
    Ok(h_est.inverse()?.mul_vec(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{complex_gaussian, random_channel};
    use crate::modulation::{discrete_harmonic_coefficient, discrete_waveform, Steps, SymbolParams};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eight_step_ramp() {
        let p = SymbolParams::normalized(0.0, TAU, Steps::Finite(8)).unwrap();
        let w = discrete_waveform(&p).unwrap();
        let a = extract_harmonic(w.samples(), 8, 1).unwrap();
        assert!((a.norm() - 0.9745).abs() < 5e-5);
        assert!((a.arg() + PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn constant_has_no_harmonic() {
        let s = vec![c(0.3, -0.9); 8];
        assert!(extract_harmonic(&s, 8, 1).unwrap().norm() < 1e-15);
    }

    #[test]
    fn pure_tone_bin() {
        let s: Vec<Complex64> = (0..8).map(|i| Complex64::from_polar(1.0, TAU * i as f64 / 8.0)).collect();
        assert!((dft_bin(&s, 1) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn wrong_sample_count() {
        assert!(matches!(
            extract_harmonic(&[c(1.0, 0.0); 7], 8, 1),
            Err(Error::Length { expected: 8, got: 7 })
        ));
    }

    fn pilots() -> [Vec<Complex64>; 2] {
        let mut a = vec![c(0.0, 0.0); 64];
        let mut b = vec![c(0.0, 0.0); 64];
        for i in 0..32 {
            a[i] = c(if i % 3 == 0 { -1.0 } else { 1.0 }, 0.0);
            b[i + 32] = c(if i % 5 == 0 { -1.0 } else { 1.0 }, 0.0);
        }
        [a, b]
    }

    fn receive(h: &Mat2, tx: &[Vec<Complex64>; 2], sigma2: f64, rng: &mut ChaCha8Rng) -> [Vec<Complex64>; 2] {
        let mut rx = [Vec::new(), Vec::new()];
        for i in 0..tx[0].len() {
            let y = h.mul_vec([tx[0][i], tx[1][i]]);
            for k in 0..2 {
                rx[k].push(y[k] + complex_gaussian(rng, sigma2));
            }
        }
        rx
    }

    #[test]
    fn ls_noiseless() {
        let tx = pilots();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rx = receive(&Mat2::identity(), &tx, 0.0, &mut rng);
        let h = ls_channel_estimate([&rx[0], &rx[1]], [&tx[0], &tx[1]]).unwrap();
        for r in 0..2 {
            for col in 0..2 {
                assert!((h.get(r, col) - Mat2::identity().get(r, col)).norm() < 1e-12);
            }
        }
        let true_h = random_channel(9).scale(c(3f64.sqrt(), 0.0));
        let rx = receive(&true_h, &tx, 0.0, &mut rng);
        let h = ls_channel_estimate([&rx[0], &rx[1]], [&tx[0], &tx[1]]).unwrap();
        for r in 0..2 {
            for col in 0..2 {
                assert!((h.get(r, col) - true_h.get(r, col)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn ls_error_variance() {
        let tx = pilots();
        let h = random_channel(3);
        let sigma2 = 0.2;
        let trials = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut acc = [[0.0; 2]; 2];
        for _ in 0..trials {
            let rx = receive(&h, &tx, sigma2, &mut rng);
            let e = ls_channel_estimate([&rx[0], &rx[1]], [&tx[0], &tx[1]]).unwrap();
            for r in 0..2 {
                for col in 0..2 {
                    acc[r][col] += (e.get(r, col) - h.get(r, col)).norm_sqr();
                }
            }
        }
        for row in acc {
            for v in row {
                let var = v / trials as f64;
                assert!((var / (sigma2 / 32.0) - 1.0).abs() < 0.1, "{var}");
            }
        }
    }

    #[test]
    fn ls_estimate_tightens_as_noise_vanishes() {
        let tx = pilots();
        let h = random_channel(4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut last = f64::INFINITY;
        for sigma2 in [1e-2, 1e-4, 1e-6] {
            let mut err = 0.0;
            for _ in 0..100 {
                let rx = receive(&h, &tx, sigma2, &mut rng);
                let e = ls_channel_estimate([&rx[0], &rx[1]], [&tx[0], &tx[1]]).unwrap();
                err += (0..4).map(|i| (e.get(i / 2, i % 2) - h.get(i / 2, i % 2)).norm_sqr()).sum::<f64>();
            }
            assert!(err < last);
            last = err;
        }
    }

    #[test]
    fn ls_rejects_overlap_and_length() {
        let tx = pilots();
        let both = vec![c(1.0, 0.0); 64];
        let rx = [vec![c(0.0, 0.0); 64], vec![c(0.0, 0.0); 64]];
        assert!(ls_channel_estimate([&rx[0], &rx[1]], [&tx[0], &both]).is_err());
        assert!(ls_channel_estimate([&rx[0][..10], &rx[1]], [&tx[0], &tx[1]]).is_err());
    }

    #[test]
    fn zf_examples() {
        let y = [c(0.3, 0.4), c(-1.0, 2.0)];
        assert_eq!(zf_equalize(&Mat2::identity(), y).unwrap(), y);
        let s = zf_equalize(&Mat2::from_real([[2.0, 0.0], [0.0, 2.0]]), [y[0] * 2.0, y[1] * 2.0]).unwrap();
        assert!((s[0] - y[0]).norm() < 1e-15 && (s[1] - y[1]).norm() < 1e-15);
        assert!(matches!(
            zf_equalize(&Mat2::from_real([[1.0, 2.0], [0.5, 1.0]]), y),
            Err(Error::SingularChannel { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn zf_inverts_random_channels(seed in 0u64..10_000, a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let h = random_channel(seed);
            prop_assume!(h.det().norm() > 1e-3);
            let s = [c(a, b), c(b, -a)];
            let out = zf_equalize(&h, h.mul_vec(s)).unwrap();
            prop_assert!((out[0] - s[0]).norm() < 1e-10 && (out[1] - s[1]).norm() < 1e-10);
        }

        #[test]
        fn extraction_matches_staircase_closed_form(k in 0u32..8, dphi in 0.0f64..(4.0 * PI)) {
            let p = SymbolParams::normalized(f64::from(k) / 8.0, dphi, Steps::Finite(8)).unwrap();
            let w = discrete_waveform(&p).unwrap();
            let got = extract_harmonic(w.samples(), 8, 1).unwrap();
            let want = discrete_harmonic_coefficient(&p, 1).unwrap().value;
            prop_assert!((got - want).norm() < 1e-12);
        }
    }
}
