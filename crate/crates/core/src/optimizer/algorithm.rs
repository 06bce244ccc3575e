use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::model::SwiptModel;
use super::waterfilling::{waterfilling, waterfilling_with_power};
use super::{InitStrategy, Instance, OptimizationConfig, RateEnergyPoint, RhoMode, SwiptState, Variant};
use crate::error::{Error, Result};
use crate::gp::{solve_gp, SolveStatus};
use crate::harvester::{rate_from_gains, tone_gains, zdc_matched_with, NoiseProfile};
use crate::waveform::WaveformDesign;

/// Rates within this relative distance of the maximum are served by the
/// water-filling endpoint directly.
const ENDPOINT_REL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizeStatus {
    /// Relative change of `z_DC` fell below ε, or no further ascent was possible.
    Converged,
    MaxIterations,
    /// The GP solver failed to return a usable point before convergence.
    SolverStalled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub zdc: f64,
    /// Bits per OFDM symbol at the iterate's `ρ̄`.
    pub rate: f64,
    /// Average transmit power in watts.
    pub power: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizedDesign {
    pub design: WaveformDesign,
    pub zdc: f64,
    /// Bits per OFDM symbol, evaluated with `rho_bar`.
    pub rate: f64,
    pub rho_bar: f64,
    /// Accepted GP iterations.
    pub iterations: usize,
    pub initial_zdc: f64,
    /// One record per accepted iteration.
    pub trajectory: Vec<IterationRecord>,
    pub status: OptimizeStatus,
    /// Newton steps spent in the GP solver over all iterations.
    pub newton_steps: usize,
}

impl OptimizedDesign {
    pub fn point(&self) -> RateEnergyPoint {
        let n = self.design.shape().0 as f64;
        RateEnergyPoint {
            rate: self.rate,
            rate_per_tone: self.rate / n,
            zdc: self.zdc,
            rho: self.design.rho,
        }
    }

    pub fn state(&self) -> SwiptState {
        SwiptState {
            s_p: self.design.s_p.clone(),
            s_i: self.design.s_i.clone(),
            rho: self.design.rho,
            rho_bar: self.rho_bar,
        }
    }
}

/// Largest rate the variant can reach: water-filling with the information
/// branch receiving a share `1 − ρ` (all of it when ρ is free).
pub fn max_rate(inst: &Instance, variant: Variant) -> Result<f64> {
    if !variant.info_waveform {
        return Ok(0.0);
    }
    match variant.rho {
        RhoMode::Free => Ok(waterfilling(inst)?.max_rate),
        RhoMode::Fixed(v) if v < 1.0 => {
            let scaled = NoiseProfile::new(inst.noise.sigma2.iter().map(|s| s / (1.0 - v)).collect())?;
            let tmp = Instance::new(inst.channel.clone(), inst.rect, scaled, inst.budget)?;
            Ok(waterfilling(&tmp)?.max_rate)
        }
        RhoMode::Fixed(_) => Ok(0.0),
    }
}

fn state_rate(inst: &Instance, s: &SwiptState) -> Result<f64> {
    rate_from_gains(&tone_gains(&s.s_i, inst.amplitudes()), s.rho_bar, &inst.noise)
}

fn state_zdc(inst: &Instance, s: &SwiptState) -> Result<f64> {
    zdc_matched_with(inst.quads(), &s.s_p, &s.s_i, s.rho, inst.amplitudes(), &inst.rect)
}

fn state_power(s: &SwiptState) -> f64 {
    0.5 * (s.s_p.norm_squared() + s.s_i.norm_squared())
}

/// Amplitudes proportional to the channel gains with average power `p`.
fn proportional(inst: &Instance, p: f64) -> DMatrix<f64> {
    let a = inst.amplitudes();
    let norm2 = a.norm_squared();
    if norm2 > 0.0 {
        a * (2.0 * p / norm2).sqrt()
    } else {
        DMatrix::from_element(a.nrows(), a.ncols(), (2.0 * p / a.len() as f64).sqrt())
    }
}

fn check_rate_floor(inst: &Instance, variant: Variant, rate_floor: f64) -> Result<f64> {
    if !(rate_floor >= 0.0) || !rate_floor.is_finite() {
        return Err(Error::InvalidScenario(format!(
            "rate floor {rate_floor} must be finite and >= 0"
        )));
    }
    let max = max_rate(inst, variant)?;
    if rate_floor > max * (1.0 + ENDPOINT_REL) {
        return Err(Error::RateInfeasible {
            requested: rate_floor,
            max,
        });
    }
    Ok(max)
}

/// Starting point of the successive approximation; always satisfies the
/// budget and the rate floor.
pub fn initial_design(inst: &Instance, cfg: &OptimizationConfig) -> Result<SwiptState> {
    let variant = cfg.variant;
    check_rate_floor(inst, variant, cfg.rate_floor)?;
    let p = inst.budget.watts();
    let (n, m) = (inst.num_tones(), inst.num_antennas());
    let rho = match variant.rho {
        RhoMode::Free => 0.5,
        RhoMode::Fixed(v) => v,
    };
    let share = if variant.power_waveform && variant.info_waveform {
        0.5
    } else {
        1.0
    };
    let block = |on: bool| {
        if on {
            proportional(inst, share * p)
        } else {
            DMatrix::zeros(n, m)
        }
    };
    let split = SwiptState {
        s_p: block(variant.power_waveform),
        s_i: block(variant.info_waveform),
        rho,
        rho_bar: 1.0 - rho,
    };
    if cfg.init == InitStrategy::MatchedSplit && state_rate(inst, &split)? >= cfg.rate_floor {
        return Ok(split);
    }
    waterfilling_init(inst, variant, cfg.rate_floor)
}

/// Water-filling information waveform at a fraction of the budget, the rest
/// on a proportional power waveform, and the largest ρ meeting the rate floor.
fn waterfilling_init(inst: &Instance, variant: Variant, rate_floor: f64) -> Result<SwiptState> {
    if !variant.info_waveform {
        return Err(Error::RateInfeasible {
            requested: rate_floor,
            max: 0.0,
        });
    }
    let p = inst.budget.watts();
    let (n, m) = (inst.num_tones(), inst.num_antennas());
    let fractions: &[f64] = if variant.power_waveform {
        &[0.5, 0.75, 0.9, 0.97, 0.99, 0.999, 1.0]
    } else {
        &[1.0]
    };
    let mut fallback = None;
    for &f in fractions {
        let wf = waterfilling_with_power(inst, 2.0 * p * f)?;
        let s_p = if variant.power_waveform && f < 1.0 {
            proportional(inst, (1.0 - f) * p)
        } else {
            DMatrix::zeros(n, m)
        };
        let gains = tone_gains(&wf.s_i, inst.amplitudes());
        let rate_at = |rho: f64| rate_from_gains(&gains, 1.0 - rho, &inst.noise);
        let rho = match variant.rho {
            RhoMode::Fixed(v) => {
                if rate_at(v)? >= rate_floor {
                    v
                } else {
                    continue;
                }
            }
            RhoMode::Free => {
                if rate_at(0.0)? < rate_floor {
                    continue;
                }
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if rate_at(mid)? >= rate_floor {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        };
        let state = SwiptState {
            s_p,
            s_i: wf.s_i,
            rho,
            rho_bar: 1.0 - rho,
        };
        if rho > 1e-6 {
            return Ok(state);
        }
        fallback.get_or_insert(state);
    }
    fallback.ok_or(Error::RateInfeasible {
        requested: rate_floor,
        max: max_rate(inst, variant)?,
    })
}

/// Maximizes `z_DC` subject to the budget and the rate floor by successive
/// single condensation, starting from [`initial_design`].
pub fn algorithm1(inst: &Instance, cfg: &OptimizationConfig) -> Result<OptimizedDesign> {
    let max = check_rate_floor(inst, cfg.variant, cfg.rate_floor)?;
    if cfg.rate_floor > 0.0 && cfg.rate_floor >= max * (1.0 - ENDPOINT_REL) {
        return rate_endpoint(inst, cfg.variant);
    }
    algorithm1_from(inst, cfg, initial_design(inst, cfg)?)
}

/// The maximum-rate corner: water-filling, no power waveform.
fn rate_endpoint(inst: &Instance, variant: Variant) -> Result<OptimizedDesign> {
    let rho = match variant.rho {
        RhoMode::Free => 0.0,
        RhoMode::Fixed(v) => v,
    };
    let noise = NoiseProfile::new(inst.noise.sigma2.iter().map(|s| s / (1.0 - rho)).collect())?;
    let wf = waterfilling(&Instance::new(inst.channel.clone(), inst.rect, noise, inst.budget)?)?;
    let state = SwiptState {
        s_p: DMatrix::zeros(inst.num_tones(), inst.num_antennas()),
        s_i: wf.s_i,
        rho,
        rho_bar: 1.0 - rho,
    };
    let z = state_zdc(inst, &state)?;
    finish(inst, state, z, z, Vec::new(), OptimizeStatus::Converged, 0)
}

/// Multisine-only design with all received power harvested.
pub fn wpt_only(inst: &Instance, cfg: &OptimizationConfig) -> Result<OptimizedDesign> {
    let cfg = OptimizationConfig {
        variant: Variant::WPT_ONLY,
        rate_floor: 0.0,
        ..cfg.clone()
    };
    algorithm1(inst, &cfg)
}

/// Runs the successive approximation from `init`, which must satisfy the
/// budget and the rate floor.
pub fn algorithm1_from(inst: &Instance, cfg: &OptimizationConfig, init: SwiptState) -> Result<OptimizedDesign> {
    let variant = cfg.variant;
    check_rate_floor(inst, variant, cfg.rate_floor)?;
    let model = SwiptModel::new(inst, variant)?;
    let mut state = init;
    if !variant.power_waveform {
        state.s_p.fill(0.0);
    }
    if !variant.info_waveform {
        state.s_i.fill(0.0);
    }
    if let RhoMode::Fixed(v) = variant.rho {
        state.rho = v;
        state.rho_bar = 1.0 - v;
    }
    let p = inst.budget.watts();
    if state_power(&state) > p * (1.0 + 1e-9) {
        return Err(Error::Design(format!(
            "initial design uses {} W of a {p} W budget",
            state_power(&state)
        )));
    }
    if state_rate(inst, &state)? < cfg.rate_floor * (1.0 - 1e-12) {
        return Err(Error::Design("initial design misses the rate floor".into()));
    }

    let initial_zdc = state_zdc(inst, &state)?;
    let mut z = initial_zdc;
    let mut trajectory = Vec::new();
    let mut status = OptimizeStatus::MaxIterations;
    let mut newton_steps = 0;
    for _ in 0..cfg.i_max {
        let (gp, x0) = model.condensed(&state, cfg.rate_floor)?;
        let sol = solve_gp(&gp, &x0, &cfg.solver)?;
        newton_steps += sol.newton_steps;
        if sol.status == SolveStatus::Infeasible {
            status = OptimizeStatus::SolverStalled;
            break;
        }
        let mut cand = model.state(&sol.values);
        let power = state_power(&cand);
        if power > p {
            let c = (p / power).sqrt();
            cand.s_p *= c;
            cand.s_i *= c;
        }
        let z_new = state_zdc(inst, &cand)?;
        let r_new = state_rate(inst, &cand)?;
        let feasible = r_new >= cfg.rate_floor - 1e-7 * cfg.rate_floor.max(1.0);
        // successive condensation ascends monotonically; anything else is numerical noise
        if !feasible || !(z_new >= z) {
            status = if sol.status == SolveStatus::Optimal {
                OptimizeStatus::Converged
            } else {
                OptimizeStatus::SolverStalled
            };
            break;
        }
        trajectory.push(IterationRecord {
            zdc: z_new,
            rate: r_new,
            power: state_power(&cand),
            rho: cand.rho,
        });
        state = cand;
        let done = (z_new - z).abs() < cfg.epsilon * z_new;
        z = z_new;
        if done {
            status = OptimizeStatus::Converged;
            break;
        }
    }
    finish(inst, state, z, initial_zdc, trajectory, status, newton_steps)
}

fn finish(
    inst: &Instance,
    state: SwiptState,
    z: f64,
    initial_zdc: f64,
    trajectory: Vec<IterationRecord>,
    status: OptimizeStatus,
    newton_steps: usize,
) -> Result<OptimizedDesign> {
    let rate = state_rate(inst, &state)?;
    let rho = state.rho.min(1.0);
    Ok(OptimizedDesign {
        iterations: trajectory.len(),
        design: WaveformDesign::matched(state.s_p, state.s_i, rho, &inst.channel)?,
        zdc: z,
        rate,
        rho_bar: state.rho_bar,
        initial_zdc,
        trajectory,
        status,
        newton_steps,
    })
}
