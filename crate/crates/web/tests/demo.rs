use std::f64::consts::PI;

use risqam_web::demo::{ber_curve, constellation, harmonic_curve, MAX_FRAMES};

#[test]
fn harmonic_curve_peaks_at_one_sweep() {
    let c = harmonic_curve(8, 5).unwrap();
    assert_eq!(c.delta_phi, vec![0.0, PI, 2.0 * PI, 3.0 * PI, 4.0 * PI]);
    assert!(c.amplitudes[0].abs() < 1e-12);
    assert!((c.amplitudes[2] - 0.9745).abs() < 5e-5);
    let ideal = harmonic_curve(0, 5).unwrap();
    assert!((ideal.amplitudes[2] - 1.0).abs() < 1e-12);
    assert!(ideal.amplitudes[4].abs() < 1e-12);
    assert!(harmonic_curve(8, 1).is_err());
}

#[test]
fn noiseless_constellation_sits_on_the_grid() {
    let [a, b] = constellation(10, f64::INFINITY, 3).unwrap();
    assert_eq!((a.len(), b.len()), (3840, 3840));
    let levels = [-3.0, -1.0, 1.0, 3.0].map(|v: f64| v / 10f64.sqrt());
    for z in a.iter().chain(&b) {
        let near = |v: f64| levels.iter().any(|l| (v - l).abs() < 1e-9);
        assert!(near(z.re) && near(z.im), "{z}");
    }
}

#[test]
fn ber_curve_rows_and_limits() {
    let rows = ber_curve(40, 0.0, 12.0, 6.0, 1, 1).unwrap();
    assert_eq!(rows.iter().map(|r| r.snr_db).collect::<Vec<_>>(), [0.0, 6.0, 12.0]);
    assert!(rows.windows(2).all(|w| w[1].theory < w[0].theory));
    assert!(rows.iter().all(|r| r.measured > 0.0 && r.measured < 0.5));
    assert!(ber_curve(40, 0.0, 12.0, 0.0, 1, 1).is_err());
    assert!(ber_curve(40, 0.0, 12.0, 6.0, MAX_FRAMES + 1, 1).is_err());
    assert!(ber_curve(1, 0.0, 12.0, 6.0, 1, 1).is_err());
}
