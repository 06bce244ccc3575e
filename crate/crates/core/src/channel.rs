//! Frequency-domain channel from a tapped multipath description and a
//! uniform linear transmit array.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// One propagation path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathTap {
    /// Seconds.
    pub delay: f64,
    /// Linear gain, link budget included.
    pub amplitude: f64,
    /// Radians.
    pub phase: f64,
    /// Direction of departure w.r.t. the array axis, radians.
    pub departure_angle: f64,
}

impl PathTap {
    pub fn new(delay: f64, amplitude: f64, phase: f64, departure_angle: f64) -> Result<Self> {
        if !(delay >= 0.0) || !delay.is_finite() {
            return Err(Error::InvalidScenario(format!("tap delay {delay} must be >= 0")));
        }
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "tap amplitude {amplitude} must be >= 0"
            )));
        }
        Ok(Self {
            delay,
            amplitude,
            phase,
            departure_angle,
        })
    }

    /// Zero-delay path with the given gain, broadside to the array.
    pub fn direct(amplitude: f64) -> Self {
        Self {
            delay: 0.0,
            amplitude,
            phase: 0.0,
            departure_angle: PI / 2.0,
        }
    }
}

/// Tones `f_n = f0 + n·Δf`, `n = 0..N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub f0: f64,
    pub delta_f: f64,
    pub num_tones: usize,
}

impl FrequencyGrid {
    pub fn new(f0: f64, delta_f: f64, num_tones: usize) -> Result<Self> {
        if !(delta_f > 0.0) || !delta_f.is_finite() {
            return Err(Error::InvalidScenario(format!("delta_f {delta_f} must be > 0")));
        }
        if num_tones == 0 {
            return Err(Error::InvalidScenario("num_tones must be >= 1".into()));
        }
        if !(f0 >= 0.0) || !f0.is_finite() {
            return Err(Error::InvalidScenario(format!("f0 {f0} must be >= 0")));
        }
        Ok(Self { f0, delta_f, num_tones })
    }

    /// Grid whose tones are centered on `center` Hz.
    pub fn centered(center: f64, delta_f: f64, num_tones: usize) -> Result<Self> {
        let f0 = center - (num_tones.saturating_sub(1) as f64) * delta_f / 2.0;
        Self::new(f0, delta_f, num_tones)
    }

    pub fn frequency(&self, n: usize) -> f64 {
        self.f0 + n as f64 * self.delta_f
    }

    pub fn angular(&self, n: usize) -> f64 {
        2.0 * PI * self.frequency(n)
    }

    pub fn wavelength(&self, n: usize) -> f64 {
        SPEED_OF_LIGHT / self.frequency(n)
    }

    /// OFDM symbol duration `1/Δf`.
    pub fn symbol_duration(&self) -> f64 {
        1.0 / self.delta_f
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub num_antennas: usize,
    /// Meters; ignored for a single antenna.
    pub element_spacing: f64,
}

impl ArrayGeometry {
    pub fn new(num_antennas: usize, element_spacing: f64) -> Result<Self> {
        if num_antennas == 0 {
            return Err(Error::InvalidScenario("num_antennas must be >= 1".into()));
        }
        if num_antennas > 1 && !(element_spacing > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "element spacing {element_spacing} must be > 0 for an array"
            )));
        }
        Ok(Self {
            num_antennas,
            element_spacing,
        })
    }

    pub fn single() -> Self {
        Self {
            num_antennas: 1,
            element_spacing: 0.0,
        }
    }

    /// Phase of antenna `m` (0-based) relative to antenna 0 on tone `n` for a path
    /// departing at `angle`.
    pub fn phase_offset(&self, grid: &FrequencyGrid, n: usize, m: usize, angle: f64) -> f64 {
        if m == 0 {
            return 0.0;
        }
        2.0 * PI * m as f64 * (self.element_spacing / grid.wavelength(n)) * angle.cos()
    }
}

/// Per-tone, per-antenna complex channel gains `h[n, m]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyResponse {
    gains: DMatrix<Complex64>,
}

impl FrequencyResponse {
    pub fn from_gains(gains: DMatrix<Complex64>) -> Self {
        Self { gains }
    }

    pub fn from_polar(amplitudes: &DMatrix<f64>, phases: &DMatrix<f64>) -> Result<Self> {
        check_shape(phases, amplitudes.shape())?;
        Ok(Self {
            gains: amplitudes.zip_map(phases, Complex64::from_polar),
        })
    }

    pub fn num_tones(&self) -> usize {
        self.gains.nrows()
    }

    pub fn num_antennas(&self) -> usize {
        self.gains.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.gains.shape()
    }

    pub fn gains(&self) -> &DMatrix<Complex64> {
        &self.gains
    }

    pub fn gain(&self, n: usize, m: usize) -> Complex64 {
        self.gains[(n, m)]
    }

    /// `A[n, m] = |h[n, m]|`.
    pub fn amplitudes(&self) -> DMatrix<f64> {
        self.gains.map(|h| h.norm())
    }

    /// `ψ̄[n, m] = arg h[n, m]`.
    pub fn phases(&self) -> DMatrix<f64> {
        self.gains.map(|h| h.arg())
    }

    /// `‖h_n‖²` per tone.
    pub fn row_norms_sq(&self) -> Vec<f64> {
        self.gains
            .row_iter()
            .map(|r| r.iter().map(|h| h.norm_sqr()).sum())
            .collect()
    }
}

pub(crate) fn check_shape<T>(m: &DMatrix<T>, expected: (usize, usize)) -> Result<()> {
    if m.shape() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            found: m.shape(),
        });
    }
    Ok(())
}

/// `h[n, m] = Σ_l α_l exp(j(−w_n τ_l + Δ[n, m, l] + ξ_l))`.
pub fn frequency_response(
    taps: &[PathTap],
    grid: &FrequencyGrid,
    geometry: &ArrayGeometry,
) -> Result<FrequencyResponse> {
    if taps.is_empty() {
        return Err(Error::InvalidScenario("channel needs at least one tap".into()));
    }
    let gains = DMatrix::from_fn(grid.num_tones, geometry.num_antennas, |n, m| {
        let w = grid.angular(n);
        taps.iter()
            .map(|tap| {
                let arg = -w * tap.delay + geometry.phase_offset(grid, n, m, tap.departure_angle) + tap.phase;
                Complex64::from_polar(tap.amplitude, arg)
            })
            .sum()
    });
    Ok(FrequencyResponse { gains })
}

/// Unit gain on every tone and antenna.
pub fn flat_channel(grid: &FrequencyGrid, geometry: &ArrayGeometry) -> FrequencyResponse {
    FrequencyResponse {
        gains: DMatrix::from_element(grid.num_tones, geometry.num_antennas, Complex64::new(1.0, 0.0)),
    }
}
