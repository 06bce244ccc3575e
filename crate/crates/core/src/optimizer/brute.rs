use nalgebra::DMatrix;

use super::Instance;
use crate::error::{Error, Result};
use crate::harvester::{rate, zdc_matched_with};

/// Largest number of power splits [`brute_force`] will enumerate.
const MAX_SPLITS: u128 = 5_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceResult {
    pub s_p: DMatrix<f64>,
    pub s_i: DMatrix<f64>,
    pub rho: f64,
    pub zdc: f64,
    pub rate: f64,
    pub evaluated: usize,
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Exhaustive search over the budget split among all `2NM` amplitudes in
/// steps of `resolution`, and over `ρ ∈ {r, 2r, …, 1 − r}`.
///
/// Only splits using the whole budget are visited since `z_DC` and the rate
/// both grow with every amplitude. For each split the largest grid `ρ` that
/// meets the rate floor is taken, `z_DC` being increasing in `ρ`.
/// Returns `None` when no grid point meets the floor.
pub fn brute_force(inst: &Instance, rate_floor: f64, resolution: f64) -> Result<Option<BruteForceResult>> {
    let steps = (1.0 / resolution).round();
    if !(resolution > 0.0) || steps < 2.0 || ((1.0 / resolution) - steps).abs() > 1e-9 * steps {
        return Err(Error::InvalidScenario(format!(
            "resolution {resolution} must be 1/k for an integer k >= 2"
        )));
    }
    let steps = steps as usize;
    let (n, m) = (inst.num_tones(), inst.num_antennas());
    let k = 2 * n * m;
    let splits = binomial((steps + k - 1) as u128, (k - 1) as u128);
    if splits > MAX_SPLITS {
        return Err(Error::InvalidScenario(format!(
            "{splits} grid points exceed the brute-force limit; use a coarser resolution or fewer tones"
        )));
    }

    let two_p = 2.0 * inst.budget.watts();
    let a = inst.amplitudes();
    let mut best: Option<BruteForceResult> = None;
    let mut evaluated = 0;
    let mut counts = vec![0usize; k];
    counts[k - 1] = steps;
    let mut s_p = DMatrix::zeros(n, m);
    let mut s_i = DMatrix::zeros(n, m);
    loop {
        for (idx, &c) in counts.iter().enumerate() {
            let s = (two_p * c as f64 / steps as f64).sqrt();
            let (i, j) = ((idx % (n * m)) / m, idx % m);
            if idx < n * m {
                s_p[(i, j)] = s;
            } else {
                s_i[(i, j)] = s;
            }
        }
        for step in (1..steps).rev() {
            let rho = step as f64 / steps as f64;
            evaluated += 1;
            let r = rate(&s_i, rho, a, &inst.noise)?;
            if r >= rate_floor {
                let z = zdc_matched_with(inst.quads(), &s_p, &s_i, rho, a, &inst.rect)?;
                if best.as_ref().is_none_or(|b| z > b.zdc) {
                    best = Some(BruteForceResult {
                        s_p: s_p.clone(),
                        s_i: s_i.clone(),
                        rho,
                        zdc: z,
                        rate: r,
                        evaluated: 0,
                    });
                }
                break;
            }
        }
        if !next_composition(&mut counts) {
            break;
        }
    }
    Ok(best.map(|b| BruteForceResult { evaluated, ..b }))
}

/// Advances to the next weak composition with the same total; the last
/// entry holds the remainder. Starts from `[0, …, 0, total]`.
fn next_composition(c: &mut [usize]) -> bool {
    let k = c.len();
    let total: usize = c.iter().sum();
    for i in 0..k.saturating_sub(1) {
        c[i] += 1;
        let head: usize = c[..k - 1].iter().sum();
        if head <= total {
            c[k - 1] = total - head;
            return true;
        }
        c[i] = 0;
    }
    false
}
