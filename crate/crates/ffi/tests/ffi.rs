use std::ffi::{CStr, CString};
use std::ptr;

use swipt_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(swipt_last_error()) }
        .to_string_lossy()
        .into_owned()
}

const SMALL: &str = r#"
[grid]
center_hz = 5.18e9
bandwidth_hz = 1.0e6
n = 2

[[taps]]
delay_s = 0.0
amplitude = 0.01

[rectenna]
k2 = 0.0034
k4 = 0.3829

[budget]
p_watt = 1.0

[noise]
sigma2_watt = 1.0e-6
"#;

fn small() -> *mut SwiptScenario {
    let src = CString::new(SMALL).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { swipt_scenario_from_toml(src.as_ptr(), &mut s) },
        SwiptStatus::Ok
    );
    s
}

#[test]
fn reference_scenario_dimensions() {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(swipt_scenario_reference(&mut s), SwiptStatus::Ok);
        assert_eq!(swipt_scenario_num_tones(s), 16);
        assert_eq!(swipt_scenario_num_antennas(s), 1);
        swipt_scenario_free(s);
    }
    assert_eq!(last_error(), "");
}

#[test]
fn optimize_round_trip() {
    let s = small();
    unsafe {
        let mut r_max = 0.0;
        assert_eq!(swipt_max_rate(s, ptr::null(), &mut r_max), SwiptStatus::Ok);
        let mut opts = swipt_options_default();
        opts.rate_floor = 0.5 * r_max;
        let mut res = ptr::null_mut();
        assert_eq!(swipt_optimize(s, &opts, &mut res), SwiptStatus::Ok, "{}", last_error());
        assert!(swipt_result_rate(res) >= 0.5 * r_max * (1.0 - 1e-9));
        assert!(swipt_result_zdc(res) > 0.0);
        let rho = swipt_result_rho(res);
        assert!(rho > 0.0 && rho < 1.0);
        assert!(swipt_result_iterations(res) <= 100);

        let mut sp = [0.0; 2];
        let mut si = [0.0; 2];
        assert_eq!(
            swipt_result_amplitudes(res, SwiptWaveform::Power, sp.as_mut_ptr(), 2),
            SwiptStatus::Ok
        );
        assert_eq!(
            swipt_result_amplitudes(res, SwiptWaveform::Info, si.as_mut_ptr(), 2),
            SwiptStatus::Ok
        );
        let power = 0.5 * sp.iter().chain(&si).map(|v| v * v).sum::<f64>();
        assert!(power <= 1.0 + 1e-9);
        assert_eq!(
            swipt_result_amplitudes(res, SwiptWaveform::Info, si.as_mut_ptr(), 3),
            SwiptStatus::InvalidArgument
        );
        assert!(last_error().contains("N*M = 2"));
        swipt_result_free(res);
        swipt_scenario_free(s);
    }
}

#[test]
fn error_codes() {
    let s = small();
    unsafe {
        let mut opts = swipt_options_default();
        opts.rate_floor = 1e6;
        let mut res = ptr::null_mut();
        assert_eq!(swipt_optimize(s, &opts, &mut res), SwiptStatus::RateInfeasible);
        assert!(res.is_null());
        assert!(last_error().contains("maximum achievable rate"));

        opts.rate_floor = 0.0;
        opts.freeze_rho = 2.0;
        assert_eq!(swipt_optimize(s, &opts, &mut res), SwiptStatus::InvalidArgument);
        assert_eq!(
            swipt_optimize(ptr::null(), ptr::null(), &mut res),
            SwiptStatus::InvalidArgument
        );

        let bad = CString::new(SMALL.replace("k2 = 0.0034", "k2 = -1")).unwrap();
        let mut t = ptr::null_mut();
        assert_eq!(swipt_scenario_from_toml(bad.as_ptr(), &mut t), SwiptStatus::Schema);
        assert!(last_error().contains("rectenna.k2"));
        assert_eq!(
            swipt_scenario_from_toml(ptr::null(), &mut t),
            SwiptStatus::InvalidArgument
        );

        let missing = CString::new("/nonexistent/scenario.toml").unwrap();
        assert_eq!(swipt_scenario_load(missing.as_ptr(), &mut t), SwiptStatus::Io);

        assert!(swipt_result_zdc(ptr::null()).is_nan());
        swipt_scenario_free(ptr::null_mut());
        swipt_result_free(ptr::null_mut());
        swipt_scenario_free(s);
    }
}

#[test]
fn sweep_fills_buffers() {
    let s = small();
    let mut rates = [f64::NAN; 4];
    let mut zdc = [f64::NAN; 4];
    unsafe {
        assert_eq!(
            swipt_sweep(s, ptr::null(), 4, rates.as_mut_ptr(), zdc.as_mut_ptr()),
            SwiptStatus::Ok,
            "{}",
            last_error()
        );
        swipt_scenario_free(s);
    }
    for w in zdc.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-6));
    }
    assert_eq!(zdc[3], 0.0);
    assert!(rates[3] > rates[0]);
}

#[test]
fn header_declares_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/swipt.h")).unwrap();
    for name in [
        "swipt_last_error",
        "swipt_options_default",
        "swipt_scenario_reference",
        "swipt_scenario_from_toml",
        "swipt_scenario_load",
        "swipt_scenario_free",
        "swipt_max_rate",
        "swipt_optimize",
        "swipt_sweep",
        "swipt_result_amplitudes",
        "swipt_result_free",
        "typedef struct SwiptScenario SwiptScenario",
        "SWIPT_STATUS_RATE_INFEASIBLE = 3",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
