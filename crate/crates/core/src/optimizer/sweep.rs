use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::algorithm::{algorithm1, algorithm1_from, max_rate, wpt_only, OptimizedDesign};
use super::{Instance, OptimizationConfig, RateEnergyPoint, RhoMode, Variant};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Also start each point from its higher-rate neighbour's solution and
    /// keep the better of the two runs.
    pub warm_start: bool,
    /// Solve points independently on the rayon pool (disables warm starts).
    pub parallel: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            warm_start: true,
            parallel: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub rate_floor: f64,
    pub result: OptimizedDesign,
}

impl SweepPoint {
    pub fn point(&self) -> RateEnergyPoint {
        self.result.point()
    }
}

/// `points` rate floors evenly spaced on `[0, R_max]` of the configured variant.
pub fn uniform_rate_grid(inst: &Instance, cfg: &OptimizationConfig, points: usize) -> Result<Vec<f64>> {
    let max = max_rate(inst, cfg.variant)?;
    Ok(match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| max * i as f64 / (points - 1) as f64).collect(),
    })
}

fn better(a: OptimizedDesign, b: OptimizedDesign) -> OptimizedDesign {
    if b.zdc > a.zdc {
        b
    } else {
        a
    }
}

/// Best design at one rate floor. Besides the successive approximation
/// from its default start, the superposed variant is also run from the
/// OFDM-only optimum so it never falls below it, and at zero rate the
/// multisine-only design is kept unless beaten by more than ε.
pub fn optimize(inst: &Instance, cfg: &OptimizationConfig) -> Result<OptimizedDesign> {
    let mut best = algorithm1(inst, cfg)?;
    let superposed = cfg.variant.power_waveform && cfg.variant.info_waveform;
    if superposed && best.design.rho > 0.0 {
        let wit_cfg = OptimizationConfig {
            variant: Variant {
                power_waveform: false,
                ..cfg.variant
            },
            ..cfg.clone()
        };
        let wit = algorithm1(inst, &wit_cfg)?;
        best = better(best, algorithm1_from(inst, cfg, wit.state())?);
    }
    if cfg.rate_floor == 0.0 && cfg.variant.power_waveform && cfg.variant.rho == RhoMode::Free {
        let wpt = wpt_only(inst, cfg)?;
        if best.zdc <= wpt.zdc * (1.0 + cfg.epsilon) {
            best = wpt;
        }
    }
    Ok(best)
}

fn solve_point(inst: &Instance, cfg: &OptimizationConfig, rate_floor: f64) -> Result<OptimizedDesign> {
    optimize(
        inst,
        &OptimizationConfig {
            rate_floor,
            ..cfg.clone()
        },
    )
}

/// Traces the rate-energy boundary at the given rate floors. Results are
/// returned in the order of `rate_grid`.
pub fn sweep_region(
    inst: &Instance,
    cfg: &OptimizationConfig,
    rate_grid: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<SweepPoint>> {
    if opts.parallel {
        return rate_grid
            .par_iter()
            .map(|&r| {
                Ok(SweepPoint {
                    rate_floor: r,
                    result: solve_point(inst, cfg, r)?,
                })
            })
            .collect();
    }

    let mut order: Vec<usize> = (0..rate_grid.len()).collect();
    order.sort_by(|&a, &b| rate_grid[b].total_cmp(&rate_grid[a]));
    let mut out: Vec<Option<SweepPoint>> = vec![None; rate_grid.len()];
    let mut prev: Option<OptimizedDesign> = None;
    for idx in order {
        let r = rate_grid[idx];
        let mut best = solve_point(inst, cfg, r)?;
        // the zero-rate point is settled by `optimize`
        if opts.warm_start && r > 0.0 {
            if let Some(p) = prev.as_ref().filter(|p| p.rate >= r && p.zdc > 0.0) {
                let c = OptimizationConfig {
                    rate_floor: r,
                    ..cfg.clone()
                };
                best = better(best, algorithm1_from(inst, &c, p.state())?);
            }
        }
        prev = Some(best.clone());
        out[idx] = Some(SweepPoint {
            rate_floor: r,
            result: best,
        });
    }
    Ok(out.into_iter().flatten().collect())
}
