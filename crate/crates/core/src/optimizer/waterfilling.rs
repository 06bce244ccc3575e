use nalgebra::DMatrix;

use super::Instance;
use crate::error::Result;

/// Rate-maximizing OFDM allocation with no power waveform and ρ = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct WaterFilling {
    /// Amplitudes `√P_n · A_n,m / ‖h_n‖`.
    pub s_i: DMatrix<f64>,
    /// Per-tone symbol power `P_n`, summing to `2P`.
    pub tone_powers: Vec<f64>,
    pub water_level: f64,
    /// Bits per OFDM symbol.
    pub max_rate: f64,
}

/// Water-filling over the tones' matched-filter gains `‖h_n‖²/σ_n²`.
///
/// The symbol powers sum to `2P` because the average transmit power of an
/// amplitude `s` is `s²/2`.
pub fn waterfilling(inst: &Instance) -> Result<WaterFilling> {
    waterfilling_with_power(inst, 2.0 * inst.budget.watts())
}

pub(crate) fn waterfilling_with_power(inst: &Instance, total: f64) -> Result<WaterFilling> {
    let gains = inst.channel.row_norms_sq();
    let noise = &inst.noise.sigma2;
    let n = gains.len();
    // inverse SNR per unit power of each usable tone, ascending
    let mut floor: Vec<(usize, f64)> = (0..n)
        .filter(|&i| gains[i] > 0.0)
        .map(|i| (i, noise[i] / gains[i]))
        .collect();
    floor.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut level = 0.0;
    let mut active = 0;
    let mut cum = 0.0;
    for (k, &(_, f)) in floor.iter().enumerate() {
        let candidate = (total + cum + f) / (k + 1) as f64;
        if candidate <= f {
            break;
        }
        cum += f;
        active = k + 1;
        level = candidate;
    }

    let mut tone_powers = vec![0.0; n];
    for &(i, f) in &floor[..active] {
        tone_powers[i] = (level - f).max(0.0);
    }
    let a = inst.amplitudes();
    let s_i = DMatrix::from_fn(n, inst.num_antennas(), |i, j| {
        if gains[i] > 0.0 {
            tone_powers[i].sqrt() * a[(i, j)] / gains[i].sqrt()
        } else {
            0.0
        }
    });
    let max_rate = (0..n)
        .map(|i| (1.0 + tone_powers[i] * gains[i] / noise[i]).log2())
        .sum();
    Ok(WaterFilling {
        s_i,
        tone_powers,
        water_level: level,
        max_rate,
    })
}
