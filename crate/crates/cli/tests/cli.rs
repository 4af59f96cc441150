use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use risqam::analysis::ber_16qam_exact;
use risqam::modulation::Constellation;

fn risqam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risqam"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = risqam(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    risqam(args).status.code().unwrap()
}

/// Data rows as numbers, header and comments dropped.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(|f| f.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn ber_sweep_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        ok(&["ber-sweep", "--snr-db", "0:8:4", "--bits", "30720", "--seed", "5", "--out", p.to_str().unwrap()]);
    }
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "snr_rx1_db,ber_stream1,ber_stream2,ber_total,ber_theory1,ber_theory2,ber_theory_total,bits"
    );
    assert!(text.lines().last().unwrap().starts_with("# seed=5 version="));
    assert_eq!(rows(&text).len(), 3);
}

#[test]
fn noiseless_sentinel_row() {
    let csv = ok(&["ber-sweep", "--snr-db", "10,inf", "--bits", "30720"]);
    let r = rows(&csv);
    assert_eq!(r[1][0], f64::INFINITY);
    assert_eq!(&r[1][1..7], &[0.0; 6]);
}

#[test]
fn full_grid_tracks_exact_theory_with_true_channel() {
    let csv = ok(&["ber-sweep", "--snr-db", "0:24:2", "--bits", "1000000", "--csi", "perfect"]);
    let r = rows(&csv);
    assert_eq!(r.len(), 13);
    for row in &r {
        let n = row[7] / 2.0;
        for k in 0..2 {
            let th = row[4 + k];
            if th >= 1e-4 {
                let sigma = (th * (1.0 - th) / n).sqrt();
                assert!((row[1 + k] - th).abs() <= 3.0 * sigma, "{row:?}");
            }
        }
    }
}

#[test]
fn identity_channel_file_gives_awgn_theory() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "h.csv", "row,col,re,im\n0,0,1,0\n0,1,0,0\n1,0,0,0\n1,1,1,0\n");
    let csv = ok(&["predict", "--snr-db", "5,10,15", "--set", &format!("channel={h}")]);
    for row in rows(&csv) {
        assert!((row[1] - row[0]).abs() < 1e-9 && (row[2] - row[0]).abs() < 1e-9);
        let want = ber_16qam_exact(10f64.powf(row[0] / 10.0));
        assert!((row[3] - want).abs() <= 1e-12 * want);
        assert_eq!(row[9], 2.5e6);
        assert_eq!(row[10], 2.0e7);
    }
}

#[test]
fn predict_warns_below_approximation_range() {
    let out = risqam(&["predict", "--snr-db", "-30"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds 0.5"));
}

#[test]
fn disc_sweep_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("disc.csv");
    ok(&["disc-sweep", "--snr-db", "0:12:6", "--bits", "30720", "--out", out.to_str().unwrap()]);
    let amp = fs::read_to_string(dir.path().join("disc_amplitude.csv")).unwrap();
    assert!(amp.starts_with("q,a1_amp,a1_phase_rad,ratio_to_continuous\n"));
    let table: Vec<(String, f64)> = amp
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap())
        })
        .collect();
    let get = |q: &str| table.iter().find(|(k, _)| k == q).unwrap().1;
    assert!((get("8") - 0.9745).abs() < 5e-5);
    assert!((get("2") - 2.0 / std::f64::consts::PI).abs() < 1e-12);
    let ber = fs::read_to_string(out).unwrap();
    let qs: Vec<&str> = ber
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(qs, ["40", "40", "40", "10", "10", "10"]);
}

#[test]
fn solve_map_profiles() {
    let ideal = ok(&["solve-map"]);
    let table = Constellation::read_csv(ideal.as_bytes()).unwrap();
    assert_eq!(table.entries()[2].bit_string(), "0010");
    assert!((table.entries()[2].t0_frac - 0.125).abs() < 1e-2);
    for row in rows(&ideal) {
        assert!(row[8] < 1e-4 && row[9] < 1e-4);
    }
    let tri = ok(&["solve-map", "--set", "profile=triangular"]);
    let outer = rows(&tri).iter().map(|r| r[2]).fold(0.0, f64::max);
    assert!((outer - 0.85).abs() < 1e-6);
    assert!(tri.lines().skip(1).filter(|l| !l.starts_with('#')).all(|l| l.ends_with(",ok")));
}

#[test]
fn solve_map_reads_profile_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.csv", "phase_rad,amplitude\n0,1\n3.141592653589793,0.5\n6.283185307179586,1\n");
    let csv = ok(&["solve-map", "--set", &format!("profile={p}")]);
    assert_eq!(rows(&csv).len(), 16);
}

#[test]
fn beam_scan_columns() {
    let csv = ok(&["beam-scan", "--set", "draws=50"]);
    let r = rows(&csv);
    assert_eq!(r.iter().map(|x| x[0]).collect::<Vec<_>>(), [1.0, 16.0, 64.0, 256.0]);
    assert!((r[0][6] - 1.0).abs() < 1e-12);
    assert!((r[3][3] / r[2][3] / 4.0 - 1.0).abs() < 0.01);
    assert!(r.iter().skip(1).all(|x| x[5] < x[3]));
}

#[test]
fn dump_constellation_rows() {
    let csv = ok(&["dump-constellation", "--snr-db", "25", "--q", "10"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "stream,slot,re,im");
    assert_eq!(lines.len(), 1 + 2 * 3840 + 1);
    assert!(lines[1].starts_with("1,0,"));
    assert!(lines[3841].starts_with("2,0,"));
}

#[test]
fn dump_constellation_payload_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("payload.bin");
    fs::write(&p, [0xffu8; 16]).unwrap();
    let out = risqam(&["dump-constellation", "--snr-db", "inf", "--set", &format!("payload={}", p.display())]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("stream 1 = 0e0"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "# demo\nseed = 3\nsnr_db = 0:4:2\nbits = 30720\n");
    let from_file = ok(&["ber-sweep", "--config", &cfg]);
    assert_eq!(rows(&from_file).len(), 3);
    assert!(from_file.contains("# seed=3 "));
    let overridden = ok(&["ber-sweep", "--config", &cfg, "--snr-db", "6", "--seed", "4"]);
    assert_eq!(rows(&overridden).len(), 1);
    assert!(overridden.contains("# seed=4 "));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["ber-sweep", "--bits", "100"]), 2);
    assert_eq!(code(&["ber-sweep", "--snr-db", "4,2"]), 2);
    assert_eq!(code(&["ber-sweep", "--set", "colour=red"]), 2);
    assert_eq!(code(&["ber-sweep", "--q", "1"]), 2);
    assert_eq!(code(&["predict", "--set", "channel=/nonexistent/h.csv"]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
    let dir = tempfile::tempdir().unwrap();
    let singular = write(dir.path(), "h.csv", "row,col,re,im\n0,0,1,0\n0,1,2,0\n1,0,0.5,0\n1,1,1,0\n");
    assert_eq!(code(&["predict", "--set", &format!("channel={singular}")]), 3);
    assert_eq!(code(&["dump-constellation", "--set", &format!("channel={singular}")]), 3);
}
