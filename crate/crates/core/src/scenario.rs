//! Scenario files: link geometry, rectenna, budget and noise in linear units.
//!
//! ```toml
//! [grid]            # exactly one of f0_hz / center_hz, one of delta_f_hz / bandwidth_hz
//! center_hz = 5.18e9
//! bandwidth_hz = 1.0e6
//! n = 16
//!
//! [array]           # optional; m = 1 by default
//! m = 2
//! spacing_m = 0.029 # optional; half a wavelength at the band centre
//!
//! [[taps]]          # at least one
//! delay_s = 0.0
//! amplitude = 1.0e-3
//! phase_rad = 0.0   # optional, 0
//! angle_rad = 1.57  # optional, broadside
//!
//! [rectenna]        # k2 and k4, or a [rectenna.diode] table
//! k2 = 0.0034
//! k4 = 0.3829
//! r_ant_ohm = 50.0  # optional, 50
//!
//! [budget]
//! p_watt = 3.98
//!
//! [noise]
//! sigma2_watt = 1.0e-7   # scalar or one entry per tone
//! ```

use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use crate::channel::{frequency_response, ArrayGeometry, FrequencyGrid, FrequencyResponse, PathTap, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::harvester::{k_coefficients, DiodeParams, NoiseProfile, RectennaParams};
use crate::optimizer::Instance;
use crate::waveform::PowerBudget;

/// The reference scenario shipped with the crate.
pub const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.toml");

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub taps: Vec<PathTap>,
    pub grid: FrequencyGrid,
    pub geometry: ArrayGeometry,
    pub rect: RectennaParams,
    pub budget: PowerBudget,
    pub noise: NoiseProfile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    grid: RawGrid,
    array: Option<RawArray>,
    taps: Vec<RawTap>,
    rectenna: RawRectenna,
    budget: RawBudget,
    noise: RawNoise,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    f0_hz: Option<f64>,
    center_hz: Option<f64>,
    delta_f_hz: Option<f64>,
    bandwidth_hz: Option<f64>,
    n: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    m: i64,
    spacing_m: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTap {
    delay_s: f64,
    amplitude: f64,
    #[serde(default)]
    phase_rad: f64,
    angle_rad: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRectenna {
    k2: Option<f64>,
    k4: Option<f64>,
    r_ant_ohm: Option<f64>,
    diode: Option<RawDiode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiode {
    i_s_a: f64,
    bias_v: f64,
    ideality: f64,
    thermal_v: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudget {
    p_watt: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    sigma2_watt: RawSigma,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawSigma {
    Scalar(f64),
    PerTone(Vec<f64>),
}

fn schema(field: &str, reason: impl Into<String>) -> Error {
    Error::Schema {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Re-labels a validation error with the field it came from.
fn at<T>(field: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidScenario(msg) => schema(field, msg),
        other => other,
    })
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(schema(field, format!("{v} must be > 0")))
    }
}

fn count(field: &str, v: i64) -> Result<usize> {
    usize::try_from(v)
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| schema(field, format!("{v} must be a positive integer")))
}

/// Key path of the TOML node a parse error points at, e.g. `grid.n`.
fn key_at(src: &str, offset: usize) -> String {
    let mut table = String::new();
    let mut key = String::new();
    for line in src[..offset.min(src.len())].lines() {
        let t = line.trim();
        if t.starts_with('[') {
            table = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key.clear();
        } else if let Some((k, _)) = t.split_once('=') {
            key = k.trim().to_string();
        }
    }
    let rest = &src[offset.min(src.len())..];
    let line = rest.lines().next().unwrap_or("").trim();
    if let Some((k, _)) = line.split_once('=') {
        key = k.trim().to_string();
    } else if line.starts_with('[') {
        return line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
    }
    match (table.is_empty(), key.is_empty()) {
        (true, _) => key,
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}

impl Scenario {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(src).map_err(|e| {
            let field = e.span().map(|s| key_at(src, s.start)).unwrap_or_default();
            schema(
                if field.is_empty() { "<document>" } else { &field },
                e.message().trim().to_string(),
            )
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawScenario) -> Result<Self> {
        let n = count("grid.n", raw.grid.n)?;
        let delta_f = match (raw.grid.delta_f_hz, raw.grid.bandwidth_hz) {
            (Some(df), None) => positive("grid.delta_f_hz", df)?,
            (None, Some(b)) => positive("grid.bandwidth_hz", b)? / n as f64,
            _ => return Err(schema("grid", "give exactly one of delta_f_hz, bandwidth_hz")),
        };
        let grid = match (raw.grid.f0_hz, raw.grid.center_hz) {
            (Some(f0), None) => at("grid.f0_hz", FrequencyGrid::new(f0, delta_f, n))?,
            (None, Some(c)) => at("grid.center_hz", FrequencyGrid::centered(c, delta_f, n))?,
            _ => return Err(schema("grid", "give exactly one of f0_hz, center_hz")),
        };

        let geometry = match raw.array {
            None => ArrayGeometry::single(),
            Some(a) => {
                let m = count("array.m", a.m)?;
                let centre = grid.f0 + 0.5 * (n - 1) as f64 * grid.delta_f;
                let d = match a.spacing_m {
                    Some(d) => positive("array.spacing_m", d)?,
                    None => SPEED_OF_LIGHT / centre / 2.0,
                };
                at("array", ArrayGeometry::new(m, d))?
            }
        };

        if raw.taps.is_empty() {
            return Err(schema("taps", "at least one tap is required"));
        }
        let taps = raw
            .taps
            .iter()
            .enumerate()
            .map(|(i, t)| {
                at(
                    &format!("taps[{i}]"),
                    PathTap::new(t.delay_s, t.amplitude, t.phase_rad, t.angle_rad.unwrap_or(PI / 2.0)),
                )
            })
            .collect::<Result<Vec<_>>>()?;

        let r = &raw.rectenna;
        let r_ant = positive(
            "rectenna.r_ant_ohm",
            r.r_ant_ohm.unwrap_or(RectennaParams::DEFAULT_R_ANT),
        )?;
        let (k2, k4) = match (&r.diode, r.k2, r.k4) {
            (None, Some(k2), Some(k4)) => (positive("rectenna.k2", k2)?, positive("rectenna.k4", k4)?),
            (Some(d), None, None) => k_coefficients(&at(
                "rectenna.diode",
                DiodeParams::new(d.i_s_a, d.bias_v, d.ideality, d.thermal_v),
            )?),
            (Some(_), _, _) => return Err(schema("rectenna", "give either k2/k4 or a diode table, not both")),
            (None, None, _) => return Err(schema("rectenna.k2", "missing")),
            (None, _, None) => return Err(schema("rectenna.k4", "missing")),
        };
        let rect = at("rectenna", RectennaParams::new(k2, k4, r_ant))?;

        let budget = at("budget.p_watt", PowerBudget::new(raw.budget.p_watt))?;
        let noise = match raw.noise.sigma2_watt {
            RawSigma::Scalar(s) => NoiseProfile::uniform(positive("noise.sigma2_watt", s)?, n)?,
            RawSigma::PerTone(v) => {
                if v.len() != n {
                    return Err(schema(
                        "noise.sigma2_watt",
                        format!("{} entries for {n} tones", v.len()),
                    ));
                }
                at("noise.sigma2_watt", NoiseProfile::new(v))?
            }
        };

        Ok(Self {
            taps,
            grid,
            geometry,
            rect,
            budget,
            noise,
        })
    }

    pub fn reference() -> Self {
        Self::from_toml_str(DEFAULT_SCENARIO).expect("shipped scenario is valid")
    }

    pub fn num_tones(&self) -> usize {
        self.grid.num_tones
    }

    pub fn num_antennas(&self) -> usize {
        self.geometry.num_antennas
    }

    pub fn channel(&self) -> Result<FrequencyResponse> {
        frequency_response(&self.taps, &self.grid, &self.geometry)
    }

    pub fn instance(&self) -> Result<Instance> {
        Instance::new(self.channel()?, self.rect, self.noise.clone(), self.budget)
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    Scenario::from_toml_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scenario() {
        let s = Scenario::reference();
        assert_eq!(s.num_tones(), 16);
        assert_eq!(s.num_antennas(), 1);
        assert_eq!(s.grid.delta_f, 62_500.0);
        assert_eq!(s.rect, RectennaParams::new(0.0034, 0.3829, 50.0).unwrap());
        assert_eq!(s.noise.sigma2, vec![1e-7; 16]);
        let h = s.channel().unwrap();
        // received power P·A² on a flat channel: -20 dBm
        let rx = s.budget.watts() * h.amplitudes()[(0, 0)].powi(2);
        assert!((10.0 * (rx / 1e-3).log10() + 20.0).abs() < 1e-9);
        assert!(h
            .amplitudes()
            .iter()
            .all(|a| (a - h.amplitudes()[(0, 0)]).abs() < 1e-15));
    }

    fn replace(from: &str, to: &str) -> String {
        let s = DEFAULT_SCENARIO.replace(from, to);
        assert_ne!(s, DEFAULT_SCENARIO);
        s
    }

    fn field_of(src: &str) -> String {
        match Scenario::from_toml_str(src) {
            Err(Error::Schema { field, .. }) => field,
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of(&replace("k4 = 0.3829", "k4 = 0.0")), "rectenna.k4");
        assert_eq!(field_of(&replace("n = 16", "n = 0")), "grid.n");
        assert_eq!(field_of(&replace("n = 16", "n = \"sixteen\"")), "grid.n");
        assert_eq!(
            field_of(&replace("p_watt = 3.9810717055349722", "p_watt = -1.0")),
            "budget.p_watt"
        );
        assert_eq!(
            field_of(&replace("k2 = 0.0034", "k2 = 0.0034\nk3 = 1.0")),
            "rectenna.k3"
        );
        assert_eq!(
            field_of(&replace("sigma2_watt = 1.0e-7", "sigma2_watt = [1.0e-7, 1.0e-7]")),
            "noise.sigma2_watt"
        );
        assert_eq!(
            field_of(&replace("amplitude = 0.001584893192461114", "amplitude = -1.0")),
            "taps[0]"
        );
        assert_eq!(
            field_of(&replace(
                "bandwidth_hz = 1.0e6",
                "bandwidth_hz = 1.0e6\ndelta_f_hz = 1.0"
            )),
            "grid"
        );
    }

    #[test]
    fn optional_fields_and_alternatives() {
        let src = r#"
            [grid]
            f0_hz = 2.4e9
            delta_f_hz = 1.0e5
            n = 2
            [array]
            m = 3
            [[taps]]
            delay_s = 1.0e-7
            amplitude = 0.5
            [[taps]]
            delay_s = 0.0
            amplitude = 0.25
            angle_rad = 0.3
            [rectenna.diode]
            i_s_a = 5.0e-6
            bias_v = 0.0
            ideality = 1.05
            thermal_v = 0.0259
            [budget]
            p_watt = 1.0
            [noise]
            sigma2_watt = [1.0e-3, 2.0e-3]
        "#;
        let s = Scenario::from_toml_str(src).unwrap();
        assert_eq!(s.grid.f0, 2.4e9);
        assert_eq!(s.geometry.num_antennas, 3);
        let lambda = SPEED_OF_LIGHT / (2.4e9 + 0.5e5);
        assert!((s.geometry.element_spacing - lambda / 2.0).abs() < 1e-15);
        assert_eq!(s.taps[0].departure_angle, PI / 2.0);
        assert_eq!(s.taps[1].departure_angle, 0.3);
        assert_eq!(s.rect.r_ant, 50.0);
        let (k2, k4) = k_coefficients(&DiodeParams::new(5e-6, 0.0, 1.05, 0.0259).unwrap());
        assert_eq!((s.rect.k2, s.rect.k4), (k2, k4));
        assert_eq!(s.noise.sigma2, vec![1e-3, 2e-3]);
        assert_eq!(s.channel().unwrap().shape(), (2, 3));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_scenario("/nonexistent/scenario.toml"), Err(Error::Io(_))));
    }
}
