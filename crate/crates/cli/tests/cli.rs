use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn devices() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../devices")
}

fn kerrlaw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kerrlaw")).args(args).output().expect("spawn kerrlaw")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited by signal")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn dev(rel: &str) -> String {
    devices().join(rel).to_string_lossy().into_owned()
}

fn json_lines(o: &Output) -> Vec<serde_json::Map<String, Value>> {
    stdout(o)
        .lines()
        .map(|l| match serde_json::from_str(l).unwrap() {
            Value::Object(m) => m,
            v => panic!("not an object: {v}"),
        })
        .collect()
}

#[test]
fn predict_prints_chain_and_exits_zero() {
    let o = kerrlaw(&["predict", &dev("table/01_quarton.device")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    for name in ["phi_zpf", "eta_analytic", "eta_used", "chi_hz", "deviation_pct"] {
        assert!(out.contains(name), "missing {name}:\n{out}");
    }
    assert!(out.contains("paper-kernel"));
}

#[test]
fn machine_output_is_byte_identical_across_runs_and_modes() {
    for format in ["csv", "json-lines"] {
        let args = ["--output", format, "validate", &dev("table")];
        let a = kerrlaw(&args);
        let b = kerrlaw(&args);
        let mut seq = vec!["--sequential"];
        seq.extend(args);
        let c = kerrlaw(&seq);
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.stdout, c.stdout);
    }
}

#[test]
fn json_lines_round_trip_floats() {
    let o = kerrlaw(&["--output", "json-lines", "predict", &dev("table/01_quarton.device")]);
    assert_eq!(code(&o), 0);
    let rows = json_lines(&o);
    let chi = rows.iter().find(|r| r["quantity"] == "chi_hz").unwrap();
    assert_eq!(chi["value"].as_f64().unwrap(), 0.0244 * 14.8e9);
    assert_eq!(chi["unit"], "Hz");
}

#[test]
fn validate_flags_deviation_mismatches_with_exit_4() {
    let o = kerrlaw(&["--output", "csv", "validate", &dev("table")]);
    assert_eq!(code(&o), 4);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 6, "{out}");
    assert!(out.lines().any(|l| l.starts_with("01_quarton.device,") && l.contains(",PASS,")));
    assert!(out.lines().any(|l| l.starts_with("02_snail.device,") && l.contains(",PASS,")));
}

#[test]
fn validate_passing_subset_exits_zero_and_quiet_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["01_quarton.device", "02_snail.device", "04_blockade.device"] {
        std::fs::copy(devices().join("table").join(f), dir.path().join(f)).unwrap();
    }
    let path = dir.path().to_string_lossy().into_owned();
    let o = kerrlaw(&["validate", &path]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let q = kerrlaw(&["--quiet", "validate", &path]);
    assert_eq!(code(&q), 0);
    assert!(q.stdout.is_empty());
}

#[test]
fn empty_directory_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("notes.txt"), "not a device").unwrap();
    let o = kerrlaw(&["validate", &dir.path().to_string_lossy()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("no .device files"), "{}", stderr(&o));
}

#[test]
fn corrupted_device_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(devices().join("table/01_quarton.device"), dir.path().join("a.device")).unwrap();
    std::fs::write(dir.path().join("b.device"), "platform = squid\nEJ = 9.2 GHz\nEC = 0.2 parsecs\n").unwrap();
    let o = kerrlaw(&["validate", &dir.path().to_string_lossy()]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("b.device:3"), "{err}");
    assert!(err.contains("EC"), "{err}");
}

#[test]
fn missing_file_and_bad_arguments_exit_2() {
    assert_eq!(code(&kerrlaw(&["predict", "/nonexistent/x.device"])), 2);
    assert_eq!(code(&kerrlaw(&["predict"])), 2);
    assert_eq!(code(&kerrlaw(&["--output", "xml", "predict", &dev("table/01_quarton.device")])), 2);
    let help = kerrlaw(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(stdout(&help).contains("oracle-check"));
}

#[test]
fn lossless_enz_at_its_crossing_is_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("lossless.device");
    std::fs::write(
        &p,
        "platform = enz\neta_kernel = 1e-7\nomega_p = 2.9e15 rad/s\nchi3_eff = 1e-18 m2/V2\nV_eff = 1 um3\n",
    )
    .unwrap();
    let o = kerrlaw(&["predict", &p.to_string_lossy()]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn zero_width_sweep_gives_one_row() {
    let o = kerrlaw(&[
        "--output", "csv", "sweep", &dev("table/02_snail.device"), "--param", "flux", "--from", "0.25", "--to", "0.25",
        "--points", "50",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 2, "{out}");
    assert!(out.lines().nth(1).unwrap().starts_with("0.25,"));
}

#[test]
fn sweep_bounds_take_units_and_reject_fixed_keys() {
    let o = kerrlaw(&[
        "--output", "json-lines", "sweep", &dev("table/03_transmon.device"), "--param", "EJ", "--from", "8 GHz", "--to",
        "10GHz", "--points", "3",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = json_lines(&o);
    let ej: Vec<f64> = rows.iter().map(|r| r["sweep_EJ"].as_f64().unwrap()).collect();
    assert_eq!(ej, vec![8e9, 9e9, 10e9]);

    let o = kerrlaw(&[
        "sweep", &dev("table/02_snail.device"), "--param", "N", "--from", "2", "--to", "4", "--points", "3",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("sweepable"), "{}", stderr(&o));
}

#[test]
fn enz_probe_sweep_peaks_at_the_crossing() {
    let o = kerrlaw(&[
        "--output", "json-lines", "sweep", &dev("extra/enz_drude.device"), "--param", "omega_probe", "--from",
        "0.8e15 rad/s", "--to", "2.2e15 rad/s", "--points", "141",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = json_lines(&o);
    let e4: Vec<f64> = rows.iter().map(|r| r["e4_hz"].as_f64().unwrap()).collect();
    let peak = (0..e4.len()).max_by(|&a, &b| e4[a].total_cmp(&e4[b])).unwrap();
    let w_peak = rows[peak]["sweep_omega_probe"].as_f64().unwrap();
    let w_enz = rows[0]["omega_enz_rad_s"].as_f64().unwrap();
    let step = 1.4e15 / 140.0;
    assert!((w_peak - w_enz).abs() <= step, "peak {w_peak:e} vs crossing {w_enz:e}");
    // ε_∞ = 3.8, γ = 1e14: ω² = ω_p²/ε_∞ − γ²
    let expected = (2.9e15f64.powi(2) / 3.8 - 1e28).sqrt();
    assert!((w_enz / expected - 1.0).abs() < 1e-12, "{w_enz:e}");
}

#[test]
fn oracle_check_exit_codes() {
    let q = dev("table/01_quarton.device");
    let ok = kerrlaw(&["--output", "json-lines", "oracle-check", &q, "--lambda", "1e-3"]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    let rows = json_lines(&ok);
    let status = rows.iter().find(|r| r["quantity"] == "status").unwrap();
    assert_eq!(status["value"], "PASS");

    let strong = kerrlaw(&["oracle-check", &q, "--lambda", "1"]);
    assert_eq!(code(&strong), 4);
    assert!(stdout(&strong).contains("FAIL"));

    assert_eq!(code(&kerrlaw(&["oracle-check", &dev("table/05_enz.device"), "--lambda", "1e-3"])), 2);
    assert_eq!(code(&kerrlaw(&["oracle-check", &q, "--lambda", "-1"])), 2);
    assert_eq!(code(&kerrlaw(&["oracle-check", &dev("table/03_transmon.device"), "--lambda", "1e-3"])), 0);
}

#[test]
fn every_shipped_device_predicts() {
    for sub in ["table", "extra"] {
        for e in std::fs::read_dir(devices().join(sub)).unwrap() {
            let p = e.unwrap().path();
            if p.extension().is_some_and(|x| x == "device") {
                let o = kerrlaw(&["predict", &p.to_string_lossy()]);
                assert_eq!(code(&o), 0, "{}: {}", p.display(), stderr(&o));
            }
        }
    }
}
