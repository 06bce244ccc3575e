//! Superposed multisine (power) + OFDM (information) transmit design.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{check_shape, ArrayGeometry, FrequencyGrid, FrequencyResponse, PathTap};
use crate::error::{Error, Result};

/// Amplitudes, phases and power-splitting ratio of a transmit design.
///
/// `s_i[n, m] = √P_I,n · |w_I,n,m|` is the expected amplitude of the OFDM
/// component; the split between symbol power and precoder magnitude is not
/// stored since only the product matters.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveformDesign {
    pub s_p: DMatrix<f64>,
    pub s_i: DMatrix<f64>,
    pub phi_p: DMatrix<f64>,
    pub phi_i: DMatrix<f64>,
    pub rho: f64,
}

impl WaveformDesign {
    pub fn new(
        s_p: DMatrix<f64>,
        s_i: DMatrix<f64>,
        phi_p: DMatrix<f64>,
        phi_i: DMatrix<f64>,
        rho: f64,
    ) -> Result<Self> {
        let shape = s_p.shape();
        check_shape(&s_i, shape)?;
        check_shape(&phi_p, shape)?;
        check_shape(&phi_i, shape)?;
        if s_p.iter().chain(s_i.iter()).any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Design("amplitudes must be finite and >= 0".into()));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Design(format!("rho {rho} outside [0, 1]")));
        }
        Ok(Self {
            s_p,
            s_i,
            phi_p,
            phi_i,
            rho,
        })
    }

    /// Design with the given amplitudes and channel-matched phases.
    pub fn matched(s_p: DMatrix<f64>, s_i: DMatrix<f64>, rho: f64, channel: &FrequencyResponse) -> Result<Self> {
        let (phi_p, phi_i) = matched_phases(channel);
        Self::new(s_p, s_i, phi_p, phi_i, rho)
    }

    pub fn zeros(num_tones: usize, num_antennas: usize) -> Self {
        let z = DMatrix::zeros(num_tones, num_antennas);
        Self {
            s_p: z.clone(),
            s_i: z.clone(),
            phi_p: z.clone(),
            phi_i: z,
            rho: 0.0,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.s_p.shape()
    }

    pub fn rho_bar(&self) -> f64 {
        1.0 - self.rho
    }

    /// Per-tone symbol power `P_I,n = Σ_m s_i[n, m]²` for a unit-norm precoder.
    pub fn info_tone_powers(&self) -> Vec<f64> {
        self.s_i.row_iter().map(|r| r.iter().map(|s| s * s).sum()).collect()
    }
}

/// Total average transmit power budget in watts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerBudget {
    p: f64,
}

impl PowerBudget {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidScenario(format!("power budget {p} must be > 0")));
        }
        Ok(Self { p })
    }

    pub fn watts(&self) -> f64 {
        self.p
    }
}

/// `φ*_P = φ*_I = −ψ̄`.
pub fn matched_phases(channel: &FrequencyResponse) -> (DMatrix<f64>, DMatrix<f64>) {
    let phi = -channel.phases();
    (phi.clone(), phi)
}

/// `½(‖S_P‖²_F + ‖S_I‖²_F)`.
pub fn average_power(design: &WaveformDesign) -> f64 {
    0.5 * (design.s_p.norm_squared() + design.s_i.norm_squared())
}

/// One OFDM symbol vector: `x̃_n` with `E|x̃_n|² = P_I,n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolDraw {
    pub values: Vec<Complex64>,
    pub powers: Vec<f64>,
}

impl SymbolDraw {
    /// Circularly-symmetric complex Gaussian symbols.
    pub fn gaussian<R: Rng + ?Sized>(powers: &[f64], rng: &mut R) -> Self {
        let values = powers
            .iter()
            .map(|p| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * (p / 2.0).sqrt()
            })
            .collect();
        Self {
            values,
            powers: powers.to_vec(),
        }
    }

    pub fn fixed(values: Vec<Complex64>, powers: Vec<f64>) -> Self {
        Self { values, powers }
    }
}

/// Transmit signal of one symbol as per-tone analytic phasors:
/// `x_m(t) = Re Σ_n (p[n, m] + q[n, m]) e^{j w_n t}` for `t` in the window.
#[derive(Clone, Debug)]
pub struct TransmitSignal {
    pub grid: FrequencyGrid,
    /// Multisine phasors `s_P e^{jφ_P}`.
    pub power: DMatrix<Complex64>,
    /// OFDM phasors `s̃_I e^{jφ̃_I}`.
    pub info: DMatrix<Complex64>,
    /// Valid time span `[start, end]`: cyclic prefix plus useful symbol.
    pub window: (f64, f64),
}

impl TransmitSignal {
    pub fn new(design: &WaveformDesign, symbols: &SymbolDraw, grid: &FrequencyGrid) -> Result<Self> {
        let (n_tones, n_ant) = design.shape();
        if grid.num_tones != n_tones || symbols.values.len() != n_tones || symbols.powers.len() != n_tones {
            return Err(Error::ShapeMismatch {
                expected: (n_tones, n_ant),
                found: (grid.num_tones.min(symbols.values.len()), n_ant),
            });
        }
        let power = DMatrix::from_fn(n_tones, n_ant, |n, m| {
            Complex64::from_polar(design.s_p[(n, m)], design.phi_p[(n, m)])
        });
        let info = DMatrix::from_fn(n_tones, n_ant, |n, m| {
            let p = symbols.powers[n];
            if p <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            // |w| = s_I / √P_I,n
            let w = Complex64::from_polar(design.s_i[(n, m)] / p.sqrt(), design.phi_i[(n, m)]);
            w * symbols.values[n]
        });
        Ok(Self {
            grid: *grid,
            power,
            info,
            window: (0.0, grid.symbol_duration()),
        })
    }

    /// Extends the valid window backwards by a cyclic prefix of `tg` seconds.
    pub fn with_cyclic_prefix(mut self, tg: f64) -> Self {
        self.window.0 = -tg;
        self
    }

    pub fn num_antennas(&self) -> usize {
        self.power.ncols()
    }

    fn check_times(&self, times: &[f64]) -> Result<()> {
        let (lo, hi) = self.window;
        if let Some(t) = times.iter().find(|t| **t < lo - 1e-15 || **t > hi + 1e-15) {
            return Err(Error::Window(format!("time {t} outside symbol window [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Real transmit samples, one series per antenna.
    pub fn sample(&self, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_times(times)?;
        let n_tones = self.grid.num_tones;
        Ok((0..self.num_antennas())
            .map(|m| {
                times
                    .iter()
                    .map(|&t| {
                        (0..n_tones)
                            .map(|n| {
                                let e = Complex64::from_polar(1.0, self.grid.angular(n) * t);
                                ((self.power[(n, m)] + self.info[(n, m)]) * e).re
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect())
    }
}

/// `x_m(t) = Σ_n s_P cos(w_n t + φ_P) + s̃_I cos(w_n t + φ̃_I)` sampled at `times`.
pub fn synthesize_transmit(
    design: &WaveformDesign,
    symbols: &SymbolDraw,
    grid: &FrequencyGrid,
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    TransmitSignal::new(design, symbols, grid)?.sample(times)
}

/// Tapped-delay-line propagation of a [`TransmitSignal`] to a single
/// receive antenna, evaluated at fixed sample times.
///
/// Path `l` reaches antenna `m`'s contribution delayed by `τ_l` with the
/// array offset `Δ[n, m, l]` and path phase `ξ_l`.
#[derive(Clone, Debug)]
pub struct Propagator {
    // per tone: Σ over (m, l) factors, stored as [n][m]
    path_factors: DMatrix<Complex64>,
    // per tone, per sample: e^{j w_n t_k}
    tone_table: DMatrix<Complex64>,
    grid: FrequencyGrid,
    times_len: usize,
}

impl Propagator {
    pub fn new(
        taps: &[PathTap],
        geometry: &ArrayGeometry,
        grid: &FrequencyGrid,
        window: (f64, f64),
        times: &[f64],
    ) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidScenario("channel needs at least one tap".into()));
        }
        let max_delay = taps.iter().map(|t| t.delay).fold(0.0, f64::max);
        for &t in times {
            if t - max_delay < window.0 - 1e-15 || t > window.1 + 1e-15 {
                return Err(Error::Window(format!(
                    "sample at {t} needs input over [{}, {t}] but the signal covers [{}, {}]",
                    t - max_delay,
                    window.0,
                    window.1
                )));
            }
        }
        let m_ant = geometry.num_antennas;
        let path_factors = DMatrix::from_fn(grid.num_tones, m_ant, |n, m| {
            let w = grid.angular(n);
            taps.iter()
                .map(|tap| {
                    let delta = geometry.phase_offset(grid, n, m, tap.departure_angle);
                    Complex64::from_polar(tap.amplitude, -w * tap.delay + tap.phase + delta)
                })
                .sum()
        });
        let tone_table = DMatrix::from_fn(grid.num_tones, times.len(), |n, k| {
            Complex64::from_polar(1.0, grid.angular(n) * times[k])
        });
        Ok(Self {
            path_factors,
            tone_table,
            grid: *grid,
            times_len: times.len(),
        })
    }

    fn received(&self, phasors: &DMatrix<Complex64>) -> Result<Vec<f64>> {
        check_shape(phasors, self.path_factors.shape())?;
        let tones: Vec<Complex64> = (0..self.grid.num_tones)
            .map(|n| {
                phasors
                    .row(n)
                    .iter()
                    .zip(self.path_factors.row(n).iter())
                    .map(|(c, f)| c * f)
                    .sum()
            })
            .collect();
        Ok((0..self.times_len)
            .map(|k| {
                tones
                    .iter()
                    .enumerate()
                    .map(|(n, r)| (r * self.tone_table[(n, k)]).re)
                    .sum()
            })
            .collect())
    }

    /// Received power-waveform and information-waveform contributions `(y_P, y_I)`.
    pub fn apply_parts(&self, tx: &TransmitSignal) -> Result<(Vec<f64>, Vec<f64>)> {
        if tx.grid != self.grid {
            return Err(Error::InvalidScenario(
                "transmit grid differs from propagator grid".into(),
            ));
        }
        Ok((self.received(&tx.power)?, self.received(&tx.info)?))
    }

    pub fn apply(&self, tx: &TransmitSignal) -> Result<Vec<f64>> {
        let (p, i) = self.apply_parts(tx)?;
        Ok(p.iter().zip(&i).map(|(a, b)| a + b).collect())
    }
}

/// `y(t) = Σ_m Σ_l α_l x_m(t − τ_l)` with per-tone array phase shifts.
pub fn propagate(
    transmit: &TransmitSignal,
    taps: &[PathTap],
    geometry: &ArrayGeometry,
    times: &[f64],
) -> Result<Vec<f64>> {
    Propagator::new(taps, geometry, &transmit.grid, transmit.window, times)?.apply(transmit)
}

/// Wraps a phase into `(−π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let r = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}
