use std::path::Path;
use std::process::{Command, Output};

use swipt::design_io::design_from_toml;

const SMALL: &str = r#"
[grid]
center_hz = 2.4e9
bandwidth_hz = 1.0e6
n = 4

[array]
m = 2

[[taps]]
delay_s = 0.0
amplitude = 0.01

[[taps]]
delay_s = 2.0e-7
amplitude = 0.006
phase_rad = 1.0
angle_rad = 1.2

[rectenna]
k2 = 0.0034
k4 = 0.3829

[budget]
p_watt = 1.0

[noise]
sigma2_watt = 1.0e-6
"#;

fn swipt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swipt"))
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .args(args)
        .output()
        .expect("binary runs")
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    dir
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn optimize_writes_result_and_manifest() {
    let dir = setup();
    let o = swipt(
        dir.path(),
        &[
            "optimize",
            "--scenario",
            "small.toml",
            "--rate-floor",
            "4",
            "--out",
            "run",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("run/optimize.toml")).unwrap();
    assert!(text.contains("timestamp = \"2023-11-14T22:13:20Z\""));
    assert!(text.contains("rate_floor = \"4\""));
    assert!(text.contains("status = \"converged\""));
    let design = design_from_toml(&text).unwrap();
    assert_eq!(design.shape(), (4, 2));
    assert!(dir.path().join("run/manifest.toml").exists());
}

#[test]
fn infeasible_floor_exits_2_with_max() {
    let dir = setup();
    let o = swipt(
        dir.path(),
        &["optimize", "--scenario", "small.toml", "--rate-floor", "1000"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("maximum achievable rate"));
}

#[test]
fn schema_errors_name_the_field() {
    let dir = setup();
    std::fs::write(dir.path().join("bad.toml"), SMALL.replace("k4 = 0.3829", "k4 = -1.0")).unwrap();
    let o = swipt(dir.path(), &["optimize", "--scenario", "bad.toml"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("rectenna.k4"), "{}", stderr(&o));

    std::fs::write(dir.path().join("typo.toml"), SMALL.replace("k4 =", "k3 =")).unwrap();
    let o = swipt(dir.path(), &["optimize", "--scenario", "typo.toml"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("rectenna.k3"), "{}", stderr(&o));

    let o = swipt(dir.path(), &["optimize", "--scenario", "missing.toml"]);
    assert_eq!(o.status.code(), Some(64));
    let o = swipt(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(64));
    let o = swipt(
        dir.path(),
        &["optimize", "--scenario", "small.toml", "--freeze-rho", "1.5"],
    );
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn oracle_checks_design_against_simulation() {
    let dir = setup();
    let o = swipt(
        dir.path(),
        &["optimize", "--scenario", "small.toml", "--rate-floor", "2"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = swipt(
        dir.path(),
        &[
            "oracle",
            "--scenario",
            "small.toml",
            "--design",
            "optimize.toml",
            "--symbols",
            "2000",
            "--seed",
            "7",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = std::fs::read_to_string(dir.path().join("oracle.toml")).unwrap();
    assert!(report.contains("within_3_sigma = true"));
    assert!(report.contains("seed = 7"));

    // the 4x2 design against the 16x1 reference scenario
    let o = swipt(dir.path(), &["oracle", "--design", "optimize.toml", "--symbols", "10"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("N = 16"));
}

#[test]
fn sweep_emits_csv_and_svg() {
    let dir = setup();
    let o = swipt(
        dir.path(),
        &[
            "sweep",
            "--scenario",
            "small.toml",
            "--grid",
            "4",
            "--wit-only",
            "--normalize-rate",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = swipt::cli::output::read_region_csv(&dir.path().join("sweep.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].rate_bits.unwrap() < 1e-6);
    assert_eq!(rows[3].zdc, Some(0.0));
    let wit = swipt::cli::output::read_region_csv(&dir.path().join("sweep_wit_only.csv")).unwrap();
    for (s, w) in rows.iter().zip(&wit).skip(1).take(2) {
        assert!(s.zdc.unwrap() >= w.zdc.unwrap() * (1.0 - 1e-9));
    }
    let svg = std::fs::read_to_string(dir.path().join("sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("OFDM only"));
    assert!(svg.contains("bits/tone"));
}

#[test]
fn repeated_runs_are_identical() {
    let dir = setup();
    let args = ["sweep", "--scenario", "small.toml", "--grid", "3"];
    let mut outputs = Vec::new();
    for out in ["a", "b"] {
        let mut a = args.to_vec();
        a.extend(["--out", out]);
        assert_eq!(swipt(dir.path(), &a).status.code(), Some(0));
        outputs.push(std::fs::read(dir.path().join(out).join("sweep.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn validate_passes_on_reference() {
    let dir = setup();
    let o = swipt(dir.path(), &["validate"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 5);
}
