//! Time-domain Monte-Carlo estimate of the harvester DC output.
//!
//! Each trial draws one Gaussian OFDM symbol vector, synthesizes the
//! transmit signal, propagates it through the taps and averages
//! `k₂ρR·y² + k₄ρ²R²·y⁴` over one symbol. The carrier is replaced by a
//! surrogate `f0' = K·Δf` so that every tone is a harmonic of `Δf`: the
//! signal is then periodic over the symbol and a uniform grid of more than
//! `4(K+N−1)` samples averages the 4th power exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{frequency_response, ArrayGeometry, FrequencyGrid, PathTap};
use crate::error::{Error, Result};
use crate::harvester::{zdc, RectennaParams};
use crate::waveform::{Propagator, SymbolDraw, TransmitSignal, WaveformDesign};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub num_symbols: usize,
    pub seed: u64,
    /// Surrogate carrier multiple `K`; defaults to `4N`.
    pub carrier_multiple: Option<usize>,
    /// Samples per symbol as a multiple of `(K + N)`.
    pub oversampling: usize,
}

impl OracleConfig {
    pub fn new(num_symbols: usize, seed: u64) -> Self {
        Self {
            num_symbols,
            seed,
            carrier_multiple: None,
            oversampling: 16,
        }
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
        }
    }

    /// `|mean − reference| ≤ k·σ`, with an absolute floor for deterministic estimates.
    pub fn within(&self, reference: f64, k: f64) -> bool {
        let slack = k * self.std_error + 1e-9 * reference.abs().max(self.mean.abs());
        (self.mean - reference).abs() <= slack
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// Monte-Carlo `z_DC`.
    pub estimate: Estimate,
    /// Analytic `z_DC` on the simulated (surrogate-carrier) channel.
    pub analytic: f64,
    /// Analytic `z_DC` on the channel at the true carrier.
    pub analytic_true_carrier: f64,
    /// `A{y_P·y_I}`, `A{y_P³·y_I}`, `A{y_P·y_I³}` averaged over symbols.
    pub cross_p_i: Estimate,
    pub cross_p3_i: Estimate,
    pub cross_p_i3: Estimate,
    pub num_symbols: usize,
    pub seed: u64,
    pub carrier_multiple: usize,
    pub samples_per_symbol: usize,
    pub sample_rate_hz: f64,
}

impl OracleReport {
    pub fn relative_error(&self) -> f64 {
        (self.estimate.mean - self.analytic).abs() / self.analytic.abs().max(f64::MIN_POSITIVE)
    }

    pub fn agrees(&self, k_sigma: f64) -> bool {
        self.estimate.within(self.analytic, k_sigma)
    }
}

/// Monte-Carlo `z_DC` of `design` over `num_symbols` independent symbols.
pub fn monte_carlo_zdc(
    design: &WaveformDesign,
    taps: &[PathTap],
    geometry: &ArrayGeometry,
    grid: &FrequencyGrid,
    rect: &RectennaParams,
    cfg: &OracleConfig,
) -> Result<OracleReport> {
    let n_tones = grid.num_tones;
    if design.shape() != (n_tones, geometry.num_antennas) {
        return Err(Error::ShapeMismatch {
            expected: (n_tones, geometry.num_antennas),
            found: design.shape(),
        });
    }
    if cfg.num_symbols == 0 {
        return Err(Error::OracleConfig("num_symbols must be >= 1".into()));
    }
    let k = cfg.carrier_multiple.unwrap_or(4 * n_tones);
    if k < 4 * n_tones {
        return Err(Error::OracleConfig(format!(
            "carrier multiple K = {k} must be >= 4N = {}",
            4 * n_tones
        )));
    }
    let samples = cfg.oversampling * (k + n_tones);
    // y⁴ contains harmonics up to 4(K+N−1); fewer samples alias onto DC
    if samples <= 4 * (k + n_tones - 1) {
        return Err(Error::OracleConfig(format!(
            "{samples} samples per symbol cannot average harmonics up to {}",
            4 * (k + n_tones - 1)
        )));
    }

    let sim_grid = FrequencyGrid::new(k as f64 * grid.delta_f, grid.delta_f, n_tones)?;
    let period = sim_grid.symbol_duration();
    let times: Vec<f64> = (0..samples).map(|i| i as f64 * period / samples as f64).collect();
    let max_delay = taps.iter().map(|t| t.delay).fold(0.0, f64::max);
    let window = (-max_delay, period);
    let propagator = Propagator::new(taps, geometry, &sim_grid, window, &times)?;

    let powers = design.info_tone_powers();
    let r1 = rect.k2 * design.rho * rect.r_ant;
    let r2 = rect.k4 * design.rho * design.rho * rect.r_ant * rect.r_ant;
    let inv = 1.0 / samples as f64;

    let trials: Vec<[f64; 4]> = (0..cfg.num_symbols)
        .into_par_iter()
        .map(|i| -> Result<[f64; 4]> {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let symbols = SymbolDraw::gaussian(&powers, &mut rng);
            let tx = TransmitSignal::new(design, &symbols, &sim_grid)?.with_cyclic_prefix(max_delay);
            let (yp, yi) = propagator.apply_parts(&tx)?;
            let mut acc = [0.0; 4];
            for (p, q) in yp.iter().zip(&yi) {
                let y = p + q;
                let y2 = y * y;
                acc[0] += r1 * y2 + r2 * y2 * y2;
                acc[1] += p * q;
                acc[2] += p * p * p * q;
                acc[3] += p * q * q * q;
            }
            Ok(acc.map(|v| v * inv))
        })
        .collect::<Result<Vec<_>>>()?;

    let column = |j: usize| Estimate::from_samples(&trials.iter().map(|t| t[j]).collect::<Vec<_>>());
    let sim_channel = frequency_response(taps, &sim_grid, geometry)?;
    let true_channel = frequency_response(taps, grid, geometry)?;
    Ok(OracleReport {
        estimate: column(0),
        analytic: zdc(design, &sim_channel, rect)?,
        analytic_true_carrier: zdc(design, &true_channel, rect)?,
        cross_p_i: column(1),
        cross_p3_i: column(2),
        cross_p_i3: column(3),
        num_symbols: cfg.num_symbols,
        seed: cfg.seed,
        carrier_multiple: k,
        samples_per_symbol: samples,
        sample_rate_hz: samples as f64 * grid.delta_f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn grid(n: usize) -> FrequencyGrid {
        FrequencyGrid::centered(5.18e9, 1e6 / n as f64, n).unwrap()
    }

    fn rect() -> RectennaParams {
        RectennaParams::new(0.0034, 0.3829, 50.0).unwrap()
    }

    #[test]
    fn deterministic_multisine_is_exact() {
        let g = grid(3);
        let sp = DMatrix::from_vec(3, 1, vec![0.02, 0.05, 0.03]);
        let ph = DMatrix::from_vec(3, 1, vec![0.3, -1.2, 2.0]);
        let d = WaveformDesign::new(sp, DMatrix::zeros(3, 1), ph, DMatrix::zeros(3, 1), 0.8).unwrap();
        let taps = [PathTap::direct(1.0)];
        let r = monte_carlo_zdc(
            &d,
            &taps,
            &ArrayGeometry::single(),
            &g,
            &rect(),
            &OracleConfig::new(3, 1),
        )
        .unwrap();
        assert_eq!(r.estimate.std_error, 0.0);
        assert!(r.relative_error() < 1e-6, "{r:?}");
    }

    #[test]
    fn single_ofdm_tone_converges() {
        let g = grid(1);
        let d = WaveformDesign::new(
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 0.05),
            DMatrix::zeros(1, 1),
            DMatrix::zeros(1, 1),
            1.0,
        )
        .unwrap();
        let r = monte_carlo_zdc(
            &d,
            &[PathTap::direct(1.0)],
            &ArrayGeometry::single(),
            &g,
            &rect(),
            &OracleConfig::new(10_000, 7),
        )
        .unwrap();
        assert!(r.agrees(3.0), "{r:?}");
    }

    #[test]
    fn bad_configuration() {
        let g = grid(2);
        let d = WaveformDesign::zeros(2, 1);
        let taps = [PathTap::direct(1.0)];
        let mut cfg = OracleConfig::new(10, 1);
        cfg.carrier_multiple = Some(3);
        assert!(matches!(
            monte_carlo_zdc(&d, &taps, &ArrayGeometry::single(), &g, &rect(), &cfg),
            Err(Error::OracleConfig(_))
        ));
        let mut cfg = OracleConfig::new(10, 1);
        cfg.oversampling = 2;
        assert!(monte_carlo_zdc(&d, &taps, &ArrayGeometry::single(), &g, &rect(), &cfg).is_err());
        assert!(monte_carlo_zdc(
            &d,
            &taps,
            &ArrayGeometry::single(),
            &g,
            &rect(),
            &OracleConfig::new(0, 1)
        )
        .is_err());
    }

    #[test]
    fn repeatable() {
        let g = grid(2);
        let a = DMatrix::from_element(2, 1, 0.03);
        let d = WaveformDesign::new(a.clone(), a, DMatrix::zeros(2, 1), DMatrix::zeros(2, 1), 0.5).unwrap();
        let taps = [PathTap::direct(1.0)];
        let cfg = OracleConfig::new(500, 42);
        let r1 = monte_carlo_zdc(&d, &taps, &ArrayGeometry::single(), &g, &rect(), &cfg).unwrap();
        let r2 = monte_carlo_zdc(&d, &taps, &ArrayGeometry::single(), &g, &rect(), &cfg).unwrap();
        assert_eq!(r1, r2);
    }
}
