//! Posynomial model of `z_DC`, the rate and the power budget, and its
//! condensation into a GP around an anchor point.
//!
//! Amplitudes enter the GP normalized as `u = s / √(2P)`, so the budget
//! reads `Σ u² ≤ 1`, and the epigraph variable as `τ = t₀ / z_ref` with
//! `z_ref` the anchor value of `z_DC`. Both keep the variables near unity
//! whatever the scenario's absolute scale.

use std::collections::HashMap;

use nalgebra::DMatrix;

use super::{Instance, RhoMode, SwiptState, Variant};
use crate::error::{Error, Result};
use crate::gp::{condense, weights_from_point, GpProblem, Monomial, Posynomial, VarId, Variables};

/// Smallest normalized value an anchor coordinate is lifted to.
const ANCHOR_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
enum Slot {
    Var(VarId),
    Fixed(f64),
}

impl Slot {
    fn monomial(self, e: f64) -> Option<Monomial> {
        match self {
            Slot::Var(id) => Some(Monomial::new(1.0, [(id, e)])),
            Slot::Fixed(v) if v > 0.0 => Some(Monomial::constant(v.powf(e))),
            Slot::Fixed(_) => None,
        }
    }
}

/// Uncondensed posynomials of one instance and variant.
#[derive(Clone, Debug)]
pub struct SwiptModel {
    vars: Variables,
    sp: Option<Vec<VarId>>,
    si: Option<Vec<VarId>>,
    rho: Slot,
    rho_bar: Slot,
    t0: VarId,
    shape: (usize, usize),
    amp_scale: f64,
    zdc: Posynomial,
    rate_tones: Vec<Posynomial>,
    power: Posynomial,
    rho_sum: Option<Posynomial>,
}

impl SwiptModel {
    pub fn new(inst: &Instance, variant: Variant) -> Result<Self> {
        let (n, m) = (inst.num_tones(), inst.num_antennas());
        if !variant.power_waveform && !variant.info_waveform {
            return Err(Error::InvalidScenario("variant optimizes no waveform".into()));
        }
        let mut vars = Variables::new();
        let mut block = |prefix: &str| -> Vec<VarId> {
            (0..n)
                .flat_map(|i| (0..m).map(move |j| (i, j)))
                .map(|(i, j)| vars.add(format!("{prefix}[{i},{j}]")))
                .collect()
        };
        let sp = variant.power_waveform.then(|| block("sP"));
        let si = variant.info_waveform.then(|| block("sI"));
        let (rho, rho_bar) = match variant.rho {
            RhoMode::Free => (Slot::Var(vars.add("rho")), Slot::Var(vars.add("rhobar"))),
            RhoMode::Fixed(v) => {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidScenario(format!("fixed rho {v} outside [0, 1]")));
                }
                (Slot::Fixed(v), Slot::Fixed(1.0 - v))
            }
        };
        let t0 = vars.add("t0");
        let amp_scale = (2.0 * inst.budget.watts()).sqrt();
        let a = inst.amplitudes();

        let tone = |ids: &Option<Vec<VarId>>, i: usize| -> Option<Posynomial> {
            let ids = ids.as_ref()?;
            let terms: Vec<Monomial> = (0..m)
                .filter(|&j| a[(i, j)] > 0.0)
                .map(|j| Monomial::new(a[(i, j)] * amp_scale, [(ids[i * m + j], 1.0)]))
                .collect();
            (!terms.is_empty()).then(|| Posynomial::from_terms(terms))
        };
        let tone_p: Vec<Option<Posynomial>> = (0..n).map(|i| tone(&sp, i)).collect();
        let tone_i: Vec<Option<Posynomial>> = (0..n).map(|i| tone(&si, i)).collect();
        let sum_sq = |tones: &[Option<Posynomial>]| -> Option<Posynomial> {
            let terms: Vec<Monomial> = tones.iter().flatten().flat_map(|t| (t * t).terms().to_vec()).collect();
            (!terms.is_empty()).then(|| Posynomial::from_terms(terms).collect())
        };
        let c_p = sum_sq(&tone_p);
        let c_i = sum_sq(&tone_i);
        let quad = quartic(inst, &tone_p);

        let (k2, k4, r) = (inst.rect.k2, inst.rect.k4, inst.rect.r_ant);
        let rho1 = rho.monomial(1.0);
        let rho2 = rho.monomial(2.0);
        let mut z = Vec::new();
        if let (Some(r1), Some(r2)) = (&rho1, &rho2) {
            let lin = r1.scale(k2 * r / 2.0);
            let sq = r2.scale(k4 * r * r);
            if let Some(cp) = &c_p {
                z.extend(cp.mul_monomial(&lin).terms().to_vec());
            }
            if let Some(q) = &quad {
                z.extend(q.mul_monomial(&sq.scale(3.0 / 8.0)).terms().to_vec());
            }
            if let Some(ci) = &c_i {
                z.extend(ci.mul_monomial(&lin).terms().to_vec());
                z.extend((ci * ci).mul_monomial(&sq.scale(3.0 / 4.0)).terms().to_vec());
                if let Some(cp) = &c_p {
                    z.extend((cp * ci).mul_monomial(&sq.scale(3.0 / 2.0)).terms().to_vec());
                }
            }
        }
        let z: Vec<Monomial> = z.into_iter().filter(|t| t.coeff() > 0.0).collect();
        if z.is_empty() {
            return Err(Error::InvalidScenario(
                "harvested output is identically zero (no channel gain or rho = 0)".into(),
            ));
        }
        let zdc = Posynomial::from_terms(z).collect();

        let rate_tones = (0..n)
            .map(|i| {
                let mut p = Posynomial::from(Monomial::constant(1.0));
                if let (Some(t), Some(rb)) = (&tone_i[i], rho_bar.monomial(1.0)) {
                    let gain = (t * t).mul_monomial(&rb.scale(1.0 / inst.noise.sigma2[i]));
                    for term in gain.terms() {
                        p.push(term.clone());
                    }
                }
                p
            })
            .collect();

        let power = Posynomial::from_terms(
            sp.iter()
                .chain(si.iter())
                .flatten()
                .map(|&id| Monomial::new(1.0, [(id, 2.0)]))
                .collect(),
        );
        let rho_sum = match (rho, rho_bar) {
            (Slot::Var(a), Slot::Var(b)) => Some(Posynomial::from_terms(vec![Monomial::var(a), Monomial::var(b)])),
            _ => None,
        };

        Ok(Self {
            vars,
            sp,
            si,
            rho,
            rho_bar,
            t0,
            shape: (n, m),
            amp_scale,
            zdc,
            rate_tones,
            power,
            rho_sum,
        })
    }

    pub fn variables(&self) -> &Variables {
        &self.vars
    }

    /// `z_DC` as a posynomial in the GP variables (τ does not appear).
    pub fn zdc_posynomial(&self) -> &Posynomial {
        &self.zdc
    }

    /// Per-tone `1 + ρ̄ C_n / σ_n²`.
    pub fn rate_posynomials(&self) -> &[Posynomial] {
        &self.rate_tones
    }

    /// GP coordinates of `state`, lifting zeros to a small positive value.
    pub fn point(&self, state: &SwiptState, tau: f64) -> Vec<f64> {
        let mut x = vec![0.0; self.vars.len()];
        let lift = |v: f64| v.max(ANCHOR_FLOOR);
        for (ids, s) in [(&self.sp, &state.s_p), (&self.si, &state.s_i)] {
            if let Some(ids) = ids {
                for (k, id) in ids.iter().enumerate() {
                    let (i, j) = (k / self.shape.1, k % self.shape.1);
                    x[id.index()] = lift(s[(i, j)] / self.amp_scale);
                }
            }
        }
        if let Slot::Var(id) = self.rho {
            x[id.index()] = lift(state.rho);
        }
        if let Slot::Var(id) = self.rho_bar {
            x[id.index()] = lift(state.rho_bar);
        }
        x[self.t0.index()] = tau;
        x
    }

    /// Inverse of [`SwiptModel::point`]; absent blocks are zero.
    pub fn state(&self, x: &[f64]) -> SwiptState {
        let (n, m) = self.shape;
        let block = |ids: &Option<Vec<VarId>>| match ids {
            Some(ids) => DMatrix::from_fn(n, m, |i, j| x[ids[i * m + j].index()] * self.amp_scale),
            None => DMatrix::zeros(n, m),
        };
        let slot = |s: Slot| match s {
            Slot::Var(id) => x[id.index()],
            Slot::Fixed(v) => v,
        };
        SwiptState {
            s_p: block(&self.sp),
            s_i: block(&self.si),
            rho: slot(self.rho),
            rho_bar: slot(self.rho_bar),
        }
    }

    pub fn t0(&self) -> VarId {
        self.t0
    }

    /// Single-condensation GP around `anchor`, with the starting point for
    /// the solver. The rate constraint is omitted when `rate_floor` is zero.
    pub fn condensed(&self, anchor: &SwiptState, rate_floor: f64) -> Result<(GpProblem, Vec<f64>)> {
        let x0 = self.point(anchor, 0.5);
        let z_ref = self.zdc.eval(&x0)?;
        let z_hat = condense(&self.zdc, &weights_from_point(&self.zdc, &x0)?)?;

        let mut gp = GpProblem::new(self.vars.clone(), Monomial::new(1.0, [(self.t0, -1.0)]));
        gp.add_le(self.power.clone());
        gp.add_le(Monomial::new(z_ref, [(self.t0, 1.0)]) * z_hat.recip());
        if rate_floor > 0.0 {
            let mut lhs = Monomial::constant(rate_floor.exp2());
            for p in &self.rate_tones {
                if p.len() > 1 {
                    lhs = lhs * condense(p, &weights_from_point(p, &x0)?)?.recip();
                }
            }
            gp.add_le(lhs);
        }
        if let Some(s) = &self.rho_sum {
            gp.add_le(s.clone());
        }
        Ok((gp, x0))
    }
}

/// `Σ_{n₀+n₁=n₂+n₃} Π_k (Σ_m s_P,n_k,m A_n_k,m)` expanded into monomials.
fn quartic(inst: &Instance, tone_p: &[Option<Posynomial>]) -> Option<Posynomial> {
    let mut acc: HashMap<Vec<(usize, u64)>, (f64, Monomial)> = HashMap::new();
    for q in inst.quads().iter() {
        let factors: Option<Vec<&Posynomial>> = q.iter().map(|&n| tone_p[n].as_ref()).collect();
        let Some(factors) = factors else { continue };
        let mut idx = [0usize; 4];
        loop {
            let mono = factors
                .iter()
                .zip(&idx)
                .fold(Monomial::constant(1.0), |acc, (f, &k)| acc * f.terms()[k].clone());
            let key: Vec<(usize, u64)> = mono.exponents().iter().map(|(v, e)| (v.index(), e.to_bits())).collect();
            acc.entry(key)
                .and_modify(|(c, _)| *c += mono.coeff())
                .or_insert_with(|| (mono.coeff(), mono.clone()));
            // odometer over the four factors' terms
            let mut d = 0;
            loop {
                if d == 4 {
                    break;
                }
                idx[d] += 1;
                if idx[d] < factors[d].len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == 4 {
                break;
            }
        }
    }
    if acc.is_empty() {
        return None;
    }
    let mut terms: Vec<(Vec<(usize, u64)>, Monomial)> = acc
        .into_iter()
        .map(|(k, (c, m))| (k, Monomial::from_log(c.ln(), m.exponents().iter().copied())))
        .collect();
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    Some(Posynomial::from_terms(terms.into_iter().map(|(_, m)| m).collect()))
}

/// Condensed GP for one iteration of the successive approximation.
pub fn build_condensed_gp(
    inst: &Instance,
    variant: Variant,
    rate_floor: f64,
    anchor: &SwiptState,
) -> Result<GpProblem> {
    Ok(SwiptModel::new(inst, variant)?.condensed(anchor, rate_floor)?.0)
}
