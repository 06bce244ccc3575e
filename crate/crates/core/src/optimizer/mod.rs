//! Rate-energy waveform optimization by successive single condensation.

mod algorithm;
mod brute;
mod model;
mod sweep;
mod waterfilling;

pub use algorithm::{
    algorithm1, algorithm1_from, initial_design, max_rate, wpt_only, IterationRecord, OptimizeStatus, OptimizedDesign,
};
pub use brute::{brute_force, BruteForceResult};
pub use model::{build_condensed_gp, SwiptModel};
pub use sweep::{optimize, sweep_region, uniform_rate_grid, SweepOptions, SweepPoint};
pub use waterfilling::{waterfilling, WaterFilling};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::FrequencyResponse;
use crate::error::{Error, Result};
use crate::gp::SolverOptions;
use crate::harvester::{NoiseProfile, RectennaParams, ToneQuadruples};
use crate::waveform::PowerBudget;

/// Channel, rectenna, noise and power budget of one optimization problem.
#[derive(Clone, Debug)]
pub struct Instance {
    pub channel: FrequencyResponse,
    pub rect: RectennaParams,
    pub noise: NoiseProfile,
    pub budget: PowerBudget,
    amplitudes: DMatrix<f64>,
    quads: ToneQuadruples,
}

impl Instance {
    pub fn new(
        channel: FrequencyResponse,
        rect: RectennaParams,
        noise: NoiseProfile,
        budget: PowerBudget,
    ) -> Result<Self> {
        if noise.sigma2.len() != channel.num_tones() {
            return Err(Error::ShapeMismatch {
                expected: (channel.num_tones(), 1),
                found: (noise.sigma2.len(), 1),
            });
        }
        Ok(Self {
            amplitudes: channel.amplitudes(),
            quads: ToneQuadruples::new(channel.num_tones()),
            channel,
            rect,
            noise,
            budget,
        })
    }

    pub fn num_tones(&self) -> usize {
        self.channel.num_tones()
    }

    pub fn num_antennas(&self) -> usize {
        self.channel.num_antennas()
    }

    pub fn amplitudes(&self) -> &DMatrix<f64> {
        &self.amplitudes
    }

    pub fn quads(&self) -> &ToneQuadruples {
        &self.quads
    }
}

/// How the power-splitting ratio is treated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoMode {
    Free,
    Fixed(f64),
}

/// Which waveform components are optimized. An absent component is held
/// at exactly zero amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub power_waveform: bool,
    pub info_waveform: bool,
    pub rho: RhoMode,
}

impl Variant {
    /// Multisine and OFDM superposed, ρ free.
    pub const SUPERPOSED: Variant = Variant {
        power_waveform: true,
        info_waveform: true,
        rho: RhoMode::Free,
    };
    /// Multisine only, all received power to the harvester.
    pub const WPT_ONLY: Variant = Variant {
        power_waveform: true,
        info_waveform: false,
        rho: RhoMode::Fixed(1.0),
    };
    /// OFDM only, ρ free.
    pub const WIT_ONLY: Variant = Variant {
        power_waveform: false,
        info_waveform: true,
        rho: RhoMode::Free,
    };

    pub fn with_fixed_rho(self, rho: f64) -> Self {
        Self {
            rho: RhoMode::Fixed(rho),
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// Half the budget to each waveform, amplitudes proportional to the
    /// channel gains, ρ = ½.
    MatchedSplit,
    /// Water-filling information waveform with ρ backed off to meet the
    /// rate floor; used when the matched split misses it.
    WaterFilling,
}

#[derive(Clone, Debug)]
pub struct OptimizationConfig {
    /// Relative convergence threshold on successive `z_DC` values.
    pub epsilon: f64,
    pub i_max: usize,
    /// Minimum rate, bits per OFDM symbol.
    pub rate_floor: f64,
    pub init: InitStrategy,
    pub variant: Variant,
    pub solver: SolverOptions,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            i_max: 100,
            rate_floor: 0.0,
            init: InitStrategy::MatchedSplit,
            variant: Variant::SUPERPOSED,
            solver: SolverOptions::default(),
        }
    }
}

/// One boundary sample of the rate-energy region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEnergyPoint {
    /// Bits per OFDM symbol.
    pub rate: f64,
    /// `rate / N`.
    pub rate_per_tone: f64,
    pub zdc: f64,
    pub rho: f64,
}

/// Amplitudes and splitting variables carried between iterations.
#[derive(Clone, Debug, PartialEq)]
pub struct SwiptState {
    pub s_p: DMatrix<f64>,
    pub s_i: DMatrix<f64>,
    pub rho: f64,
    pub rho_bar: f64,
}
