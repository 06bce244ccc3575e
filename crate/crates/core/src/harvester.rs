//! Rectenna DC output and information rate, evaluated analytically.
//!
//! The harvester output is the 4th-order truncated diode model
//! `z_DC = k₂ρR·E{A{y²}} + k₄ρ²R²·E{A{y⁴}}`, expanded into the power-waveform
//! and information-waveform moments below. `A{·}` is the DC component over
//! one symbol and the expectation is over Gaussian OFDM symbols.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::{check_shape, FrequencyResponse};
use crate::error::{Error, Result};
use crate::waveform::WaveformDesign;

/// Diode nonlinearity coefficients and antenna impedance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectennaParams {
    pub k2: f64,
    pub k4: f64,
    pub r_ant: f64,
}

impl RectennaParams {
    pub const DEFAULT_R_ANT: f64 = 50.0;

    pub fn new(k2: f64, k4: f64, r_ant: f64) -> Result<Self> {
        for (name, v) in [("k2", k2), ("k4", k4), ("r_ant", r_ant)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidScenario(format!("{name} = {v} must be > 0")));
            }
        }
        Ok(Self { k2, k4, r_ant })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiodeParams {
    /// Saturation current, amps.
    pub i_s: f64,
    /// Operating point, volts.
    pub a: f64,
    pub n_ideality: f64,
    /// Thermal voltage, volts.
    pub v_t: f64,
}

impl DiodeParams {
    pub fn new(i_s: f64, a: f64, n_ideality: f64, v_t: f64) -> Result<Self> {
        for (name, v) in [("i_s", i_s), ("n_ideality", n_ideality), ("v_t", v_t)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidScenario(format!("{name} = {v} must be > 0")));
            }
        }
        Ok(Self {
            i_s,
            a,
            n_ideality,
            v_t,
        })
    }
}

/// `k_i = i_s e^{a/(n v_t)} / (i! (n v_t)^i)` for `i = 2, 4`.
pub fn k_coefficients(diode: &DiodeParams) -> (f64, f64) {
    let nvt = diode.n_ideality * diode.v_t;
    let scale = diode.i_s * (diode.a / nvt).exp();
    (scale / (2.0 * nvt.powi(2)), scale / (24.0 * nvt.powi(4)))
}

/// Per-tone noise powers `σ_n²` in watts.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseProfile {
    pub sigma2: Vec<f64>,
}

impl NoiseProfile {
    pub fn new(sigma2: Vec<f64>) -> Result<Self> {
        if sigma2.is_empty() || sigma2.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidScenario("noise powers must be > 0".into()));
        }
        Ok(Self { sigma2 })
    }

    pub fn uniform(sigma2: f64, num_tones: usize) -> Result<Self> {
        Self::new(vec![sigma2; num_tones])
    }
}

/// Index list `{(n₀, n₁, n₂, n₃) : n₀ + n₁ = n₂ + n₃}` over `N` tones.
#[derive(Clone, Debug)]
pub struct ToneQuadruples {
    num_tones: usize,
    quads: Arc<Vec<[usize; 4]>>,
}

impl ToneQuadruples {
    pub fn new(num_tones: usize) -> Self {
        let mut quads = Vec::new();
        for n0 in 0..num_tones {
            for n1 in 0..num_tones {
                for n2 in 0..num_tones {
                    let n3 = (n0 + n1) as isize - n2 as isize;
                    if n3 >= 0 && (n3 as usize) < num_tones {
                        quads.push([n0, n1, n2, n3 as usize]);
                    }
                }
            }
        }
        Self {
            num_tones,
            quads: Arc::new(quads),
        }
    }

    pub fn num_tones(&self) -> usize {
        self.num_tones
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize; 4]> {
        self.quads.iter()
    }
}

fn check_triplet(s: &DMatrix<f64>, psi: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<()> {
    check_shape(psi, s.shape())?;
    check_shape(a, s.shape())
}

/// `½ Σ_n Σ_{m₀,m₁} s s A A cos(ψ_{n,m₀} − ψ_{n,m₁})`, shared by `A{y_P²}` and `E{A{y_I²}}`.
fn second_moment(s: &DMatrix<f64>, psi: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<f64> {
    check_triplet(s, psi, a)?;
    let (n_tones, m_ant) = s.shape();
    let mut acc = 0.0;
    for n in 0..n_tones {
        for m0 in 0..m_ant {
            for m1 in 0..m_ant {
                acc += s[(n, m0)] * s[(n, m1)] * a[(n, m0)] * a[(n, m1)] * (psi[(n, m0)] - psi[(n, m1)]).cos();
            }
        }
    }
    Ok(0.5 * acc)
}

/// `A{y_P(t)²}`; `psi` holds the received phases `φ_P + ψ̄`.
pub fn y_p2(s_p: &DMatrix<f64>, psi_p: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<f64> {
    second_moment(s_p, psi_p, a)
}

/// `A{y_P(t)⁴}` summed over tone quadruples with `n₀ + n₁ = n₂ + n₃`.
pub fn y_p4(s_p: &DMatrix<f64>, psi_p: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<f64> {
    y_p4_with(&ToneQuadruples::new(s_p.nrows()), s_p, psi_p, a)
}

pub fn y_p4_with(quads: &ToneQuadruples, s_p: &DMatrix<f64>, psi_p: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<f64> {
    check_triplet(s_p, psi_p, a)?;
    let m_ant = s_p.ncols();
    if quads.num_tones() != s_p.nrows() {
        return Err(Error::ShapeMismatch {
            expected: (quads.num_tones(), m_ant),
            found: s_p.shape(),
        });
    }
    let amp = s_p.component_mul(a);
    let mut acc = 0.0;
    for &[n0, n1, n2, n3] in quads.iter() {
        for m0 in 0..m_ant {
            for m1 in 0..m_ant {
                for m2 in 0..m_ant {
                    for m3 in 0..m_ant {
                        let prod = amp[(n0, m0)] * amp[(n1, m1)] * amp[(n2, m2)] * amp[(n3, m3)];
                        if prod == 0.0 {
                            continue;
                        }
                        let arg = psi_p[(n0, m0)] + psi_p[(n1, m1)] - psi_p[(n2, m2)] - psi_p[(n3, m3)];
                        acc += prod * arg.cos();
                    }
                }
            }
        }
    }
    Ok(0.375 * acc)
}

/// `E{A{y_I(t)²}}`; `psi` holds `φ_I + ψ̄` (the symbol phase cancels).
pub fn y_i2(s_i: &DMatrix<f64>, psi_i: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<f64> {
    second_moment(s_i, psi_i, a)
}

/// `E{A{y_I(t)⁴}}` with the Gaussian moment `E|x̃|⁴ = 2P²` folded in.
pub fn y_i4(s_i: &DMatrix<f64>, psi_i: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<f64> {
    check_triplet(s_i, psi_i, a)?;
    let (n_tones, m_ant) = s_i.shape();
    let amp = s_i.component_mul(a);
    let mut acc = 0.0;
    for n0 in 0..n_tones {
        for n1 in 0..n_tones {
            for m0 in 0..m_ant {
                for m1 in 0..m_ant {
                    for m2 in 0..m_ant {
                        for m3 in 0..m_ant {
                            let prod = amp[(n0, m0)] * amp[(n0, m2)] * amp[(n1, m1)] * amp[(n1, m3)];
                            if prod == 0.0 {
                                continue;
                            }
                            let arg = psi_i[(n0, m0)] + psi_i[(n1, m1)] - psi_i[(n0, m2)] - psi_i[(n1, m3)];
                            acc += prod * arg.cos();
                        }
                    }
                }
            }
        }
    }
    Ok(0.75 * acc)
}

/// The four moments entering `z_DC` for a design on a channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub y_p2: f64,
    pub y_p4: f64,
    pub y_i2: f64,
    pub y_i4: f64,
}

impl Moments {
    pub fn of(design: &WaveformDesign, channel: &FrequencyResponse) -> Result<Self> {
        check_shape(&design.s_p, channel.shape())?;
        let a = channel.amplitudes();
        let psibar = channel.phases();
        let psi_p = &design.phi_p + &psibar;
        let psi_i = &design.phi_i + &psibar;
        Ok(Self {
            y_p2: y_p2(&design.s_p, &psi_p, &a)?,
            y_p4: y_p4(&design.s_p, &psi_p, &a)?,
            y_i2: y_i2(&design.s_i, &psi_i, &a)?,
            y_i4: y_i4(&design.s_i, &psi_i, &a)?,
        })
    }

    /// `k₂ρR(yP2 + yI2) + k₄ρ²R²(yP4 + yI4 + 6·yP2·yI2)`.
    pub fn zdc(&self, rho: f64, rect: &RectennaParams) -> f64 {
        let r1 = rect.k2 * rho * rect.r_ant;
        let r2 = rect.k4 * rho * rho * rect.r_ant * rect.r_ant;
        r1 * (self.y_p2 + self.y_i2) + r2 * (self.y_p4 + self.y_i4 + 6.0 * self.y_p2 * self.y_i2)
    }
}

/// DC output for arbitrary phases.
pub fn zdc(design: &WaveformDesign, channel: &FrequencyResponse, rect: &RectennaParams) -> Result<f64> {
    Ok(Moments::of(design, channel)?.zdc(design.rho, rect))
}

/// DC output under channel-matched phases, where every cosine equals one.
pub fn zdc_matched(
    s_p: &DMatrix<f64>,
    s_i: &DMatrix<f64>,
    rho: f64,
    a: &DMatrix<f64>,
    rect: &RectennaParams,
) -> Result<f64> {
    zdc_matched_with(&ToneQuadruples::new(s_p.nrows()), s_p, s_i, rho, a, rect)
}

pub fn zdc_matched_with(
    quads: &ToneQuadruples,
    s_p: &DMatrix<f64>,
    s_i: &DMatrix<f64>,
    rho: f64,
    a: &DMatrix<f64>,
    rect: &RectennaParams,
) -> Result<f64> {
    check_shape(s_i, s_p.shape())?;
    check_shape(a, s_p.shape())?;
    if quads.num_tones() != s_p.nrows() {
        return Err(Error::ShapeMismatch {
            expected: (quads.num_tones(), s_p.ncols()),
            found: s_p.shape(),
        });
    }
    let bp = s_p.component_mul(a);
    let bi = s_i.component_mul(a);
    // with matched phases Σ_{m₀,m₁} Π s A collapses to (Σ_m s A)²
    let tone_p: Vec<f64> = bp.row_iter().map(|r| r.sum()).collect();
    let tone_i: Vec<f64> = bi.row_iter().map(|r| r.sum()).collect();
    let sum_p2: f64 = tone_p.iter().map(|v| v * v).sum();
    let sum_i2: f64 = tone_i.iter().map(|v| v * v).sum();
    let quad: f64 = quads
        .iter()
        .map(|&[n0, n1, n2, n3]| tone_p[n0] * tone_p[n1] * tone_p[n2] * tone_p[n3])
        .sum();
    let r = rect.r_ant;
    Ok(rect.k2 * rho * r / 2.0 * sum_p2
        + 3.0 * rect.k4 * rho * rho * r * r / 8.0 * quad
        + rect.k2 * rho * r / 2.0 * sum_i2
        + 3.0 * rect.k4 * rho * rho * r * r / 4.0 * sum_i2 * sum_i2
        + 3.0 * rect.k4 * rho * rho * r * r / 2.0 * sum_p2 * sum_i2)
}

/// `C_n = Σ_{m₀,m₁} s_{n,m₀} A_{n,m₀} s_{n,m₁} A_{n,m₁}` (matched phases).
pub fn tone_gains(s_i: &DMatrix<f64>, a: &DMatrix<f64>) -> Vec<f64> {
    s_i.component_mul(a)
        .row_iter()
        .map(|r| {
            let s = r.sum();
            s * s
        })
        .collect()
}

/// Rate in bits per OFDM symbol under matched phases: `Σ_n log₂(1 + (1−ρ)C_n/σ_n²)`.
pub fn rate(s_i: &DMatrix<f64>, rho: f64, a: &DMatrix<f64>, noise: &NoiseProfile) -> Result<f64> {
    check_shape(a, s_i.shape())?;
    rate_from_gains(&tone_gains(s_i, a), 1.0 - rho, noise)
}

pub(crate) fn rate_from_gains(c: &[f64], rho_bar: f64, noise: &NoiseProfile) -> Result<f64> {
    if noise.sigma2.len() != c.len() {
        return Err(Error::ShapeMismatch {
            expected: (c.len(), 1),
            found: (noise.sigma2.len(), 1),
        });
    }
    Ok(c.iter()
        .zip(&noise.sigma2)
        .map(|(cn, s2)| (1.0 + rho_bar.max(0.0) * cn / s2).log2())
        .sum())
}

/// Rate for arbitrary precoder phases: `Σ_n log₂(1 + (1−ρ)|Σ_m s A e^{jψ}|²/σ_n²)`.
pub fn rate_with_phases(design: &WaveformDesign, channel: &FrequencyResponse, noise: &NoiseProfile) -> Result<f64> {
    check_shape(&design.s_i, channel.shape())?;
    let c: Vec<f64> = (0..channel.num_tones())
        .map(|n| {
            (0..channel.num_antennas())
                .map(|m| {
                    channel.gain(n, m) * num_complex::Complex64::from_polar(design.s_i[(n, m)], design.phi_i[(n, m)])
                })
                .sum::<num_complex::Complex64>()
                .norm_sqr()
        })
        .collect();
    rate_from_gains(&c, design.rho_bar(), noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{flat_channel, ArrayGeometry, FrequencyGrid};
    use crate::waveform::matched_phases;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn one(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    fn unit() -> RectennaParams {
        RectennaParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn single_tone_moments() {
        let s = one(2f64.sqrt());
        let z = one(0.0);
        let a = one(1.0);
        assert!((y_p2(&s, &z, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((y_p4(&s, &one(0.7), &a).unwrap() - 1.5).abs() < 1e-14);
        assert!((y_i2(&s, &z, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((y_i4(&s, &z, &a).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(y_i2(&one(0.0), &z, &a).unwrap(), 0.0);
        assert_eq!(y_i4(&one(0.0), &z, &a).unwrap(), 0.0);
    }

    #[test]
    fn quadruple_count_matches_enumeration() {
        // brute-force count over all N⁴ tuples
        for n in 1..7usize {
            let mut brute = 0;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            if a + b == c + d {
                                brute += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(ToneQuadruples::new(n).len(), brute);
            assert_eq!(brute, (2 * n * n * n + n) / 3);
        }
    }

    #[test]
    fn two_tone_fourth_moment() {
        // 6 quadruples for N = 2
        let s = 0.8;
        let sm = DMatrix::from_element(2, 1, s);
        let v = y_p4(&sm, &DMatrix::zeros(2, 1), &DMatrix::from_element(2, 1, 1.0)).unwrap();
        assert!((v - 2.25 * s.powi(4)).abs() < 1e-14);
    }

    #[test]
    fn shape_mismatch() {
        assert!(y_p2(&one(1.0), &DMatrix::zeros(2, 1), &one(1.0)).is_err());
        assert!(y_i4(&one(1.0), &one(0.0), &DMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn matched_examples() {
        let a = one(1.0);
        let v = zdc_matched(&one(2f64.sqrt()), &one(0.0), 1.0, &a, &unit()).unwrap();
        assert!((v - 2.5).abs() < 1e-14);
        let v = zdc_matched(&one(0.0), &one(2f64.sqrt()), 1.0, &a, &unit()).unwrap();
        assert!((v - 4.0).abs() < 1e-14);
        assert_eq!(zdc_matched(&one(1.0), &one(1.0), 0.0, &a, &unit()).unwrap(), 0.0);
    }

    #[test]
    fn wpt_only_reduces_to_first_pair() {
        let g = FrequencyGrid::new(1e9, 1e3, 3).unwrap();
        let h = flat_channel(&g, &ArrayGeometry::single());
        let sp = DMatrix::from_vec(3, 1, vec![0.3, 0.9, 0.5]);
        let d = WaveformDesign::matched(sp.clone(), DMatrix::zeros(3, 1), 0.6, &h).unwrap();
        let rect = RectennaParams::new(0.0034, 0.3829, 50.0).unwrap();
        let m = Moments::of(&d, &h).unwrap();
        let expected = rect.k2 * 0.6 * 50.0 * m.y_p2 + rect.k4 * 0.36 * 2500.0 * m.y_p4;
        assert!((zdc(&d, &h, &rect).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn rate_examples() {
        let a = one(1.0);
        let noise = NoiseProfile::uniform(1.0, 1).unwrap();
        assert_eq!(rate(&one(3f64.sqrt()), 1.0, &a, &noise).unwrap(), 0.0);
        assert!((rate(&one(3f64.sqrt()), 0.0, &a, &noise).unwrap() - 2.0).abs() < 1e-14);
        let s = 0.7;
        let c1 = tone_gains(&one(s), &a)[0];
        let c2 = tone_gains(&DMatrix::from_element(1, 2, s), &DMatrix::from_element(1, 2, 1.0))[0];
        assert!((c2 - 4.0 * c1).abs() < 1e-14);
    }

    #[test]
    fn k_coefficients_scale() {
        let d = DiodeParams::new(5e-6, 0.0, 1.05, 25.85e-3).unwrap();
        let (k2, k4) = k_coefficients(&d);
        let nvt: f64 = 1.05 * 25.85e-3;
        assert!((k2 - 5e-6 / (2.0 * nvt * nvt)).abs() < 1e-12 * k2);
        assert!((k4 - 5e-6 / (24.0 * nvt.powi(4))).abs() < 1e-12 * k4);
        let (k2c, k4c) = k_coefficients(&DiodeParams { i_s: 1.5e-5, ..d });
        assert!((k2c / k2 - 3.0).abs() < 1e-12 && (k4c / k4 - 3.0).abs() < 1e-12);
        let (k2v, k4v) = k_coefficients(&DiodeParams { v_t: 2.0 * d.v_t, ..d });
        assert!((k2 / k2v - 4.0).abs() < 1e-12 && (k4 / k4v - 16.0).abs() < 1e-12);
    }

    #[test]
    fn rectenna_validation() {
        assert!(RectennaParams::new(0.0034, 0.0, 50.0).is_err());
        assert!(RectennaParams::new(-1.0, 0.3, 50.0).is_err());
        assert!(NoiseProfile::new(vec![1.0, 0.0]).is_err());
    }

    fn arb_case() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
        (1usize..5, 1usize..3)
            .prop_flat_map(|(n, m)| (Just(n), Just(m), prop::collection::vec(0.0..1.0f64, 5 * n * m + 1)))
    }

    fn unpack(n: usize, m: usize, v: &[f64]) -> (WaveformDesign, FrequencyResponse) {
        let take = |k: usize| DMatrix::from_fn(n, m, |i, j| v[k * n * m + i * m + j]);
        let amps = take(0).map(|x| 0.1 + x);
        let phases = take(1).map(|x| (x - 0.5) * 2.0 * PI);
        let h = FrequencyResponse::from_polar(&amps, &phases).unwrap();
        let d = WaveformDesign::new(
            take(2),
            take(3),
            take(4).map(|x| x * 6.0),
            take(4).map(|x| -x * 3.0),
            v[5 * n * m],
        )
        .unwrap();
        (d, h)
    }

    proptest! {
        #[test]
        fn two_paths_agree_at_matched_phases((n, m, v) in arb_case()) {
            let (d, h) = unpack(n, m, &v);
            let rect = RectennaParams::new(0.0034, 0.3829, 50.0).unwrap();
            let matched = WaveformDesign::matched(d.s_p.clone(), d.s_i.clone(), d.rho, &h).unwrap();
            let general = zdc(&matched, &h, &rect).unwrap();
            let fast = zdc_matched(&d.s_p, &d.s_i, d.rho, &h.amplitudes(), &rect).unwrap();
            prop_assert!((general - fast).abs() <= 1e-12 * fast.abs().max(1e-300));
        }

        #[test]
        fn homogeneity((n, m, v) in arb_case(), c in 0.1..3.0f64) {
            let (d, h) = unpack(n, m, &v);
            let a = h.amplitudes();
            let psi_p = &d.phi_p + h.phases();
            let psi_i = &d.phi_i + h.phases();
            let sp = &d.s_p * c;
            let si = &d.s_i * c;
            let tol = 1e-10;
            let p2 = y_p2(&d.s_p, &psi_p, &a).unwrap();
            prop_assert!((y_p2(&sp, &psi_p, &a).unwrap() - c.powi(2) * p2).abs() <= tol * (1.0 + p2.abs()) * c.powi(2));
            let p4 = y_p4(&d.s_p, &psi_p, &a).unwrap();
            prop_assert!((y_p4(&sp, &psi_p, &a).unwrap() - c.powi(4) * p4).abs() <= tol * (1.0 + p4.abs()) * c.powi(4));
            let i2 = y_i2(&d.s_i, &psi_i, &a).unwrap();
            prop_assert!((y_i2(&si, &psi_i, &a).unwrap() - c.powi(2) * i2).abs() <= tol * (1.0 + i2.abs()) * c.powi(2));
            let i4 = y_i4(&d.s_i, &psi_i, &a).unwrap();
            prop_assert!((y_i4(&si, &psi_i, &a).unwrap() - c.powi(4) * i4).abs() <= tol * (1.0 + i4.abs()) * c.powi(4));
        }

        #[test]
        fn monotone_in_rho((n, m, v) in arb_case(), r0 in 0.0..0.99f64, dr in 0.001..0.01f64) {
            let (d, h) = unpack(n, m, &v);
            let a = h.amplitudes();
            let rect = RectennaParams::new(0.0034, 0.3829, 50.0).unwrap();
            let noise = NoiseProfile::uniform(0.01, n).unwrap();
            let z0 = zdc_matched(&d.s_p, &d.s_i, r0, &a, &rect).unwrap();
            let z1 = zdc_matched(&d.s_p, &d.s_i, r0 + dr, &a, &rect).unwrap();
            prop_assert!(z1 > z0);
            let q0 = rate(&d.s_i, r0, &a, &noise).unwrap();
            let q1 = rate(&d.s_i, r0 + dr, &a, &noise).unwrap();
            prop_assert!(q1 < q0);
        }

        #[test]
        fn rate_phase_forms_agree((n, m, v) in arb_case()) {
            let (d, h) = unpack(n, m, &v);
            let noise = NoiseProfile::uniform(0.05, n).unwrap();
            let (pp, pi) = matched_phases(&h);
            let md = WaveformDesign::new(d.s_p.clone(), d.s_i.clone(), pp, pi, d.rho).unwrap();
            let general = rate_with_phases(&md, &h, &noise).unwrap();
            let fast = rate(&d.s_i, d.rho, &h.amplitudes(), &noise).unwrap();
            prop_assert!((general - fast).abs() < 1e-10);
        }
    }
}
