//! Monomial and posynomial algebra over named positive variables.
//!
//! Coefficients are stored as natural logarithms. Products of k-coefficients
//! and microwatt-scale amplitudes routinely reach 1e-20, and condensed
//! monomials raise coefficients to fractional powers, so the log form keeps
//! every operation well inside the f64 range.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Handle to a variable registered in a [`Variables`] table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Table of variable names. A point is a slice indexed by [`VarId::index`].
#[derive(Clone, Debug, Default)]
pub struct Variables {
    names: Vec<String>,
}

impl Variables {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a new variable. Panics if the name is already taken.
    pub fn add(&mut self, name: impl Into<String>) -> VarId {
        let name = name.into();
        assert!(self.find(&name).is_none(), "variable `{name}` declared twice");
        self.names.push(name);
        VarId((self.names.len() - 1) as u32)
    }

    pub fn find(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name).map(|i| VarId(i as u32))
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.names.len() as u32).map(VarId)
    }
}

/// `c · Π x_i^{a_i}` with `c > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    log_coeff: f64,
    // sorted by variable, no zero exponents
    exps: Vec<(VarId, f64)>,
}

impl Monomial {
    /// Builds a monomial from a positive coefficient and (variable, exponent) pairs.
    /// Repeated variables have their exponents added.
    pub fn new(coeff: f64, exps: impl IntoIterator<Item = (VarId, f64)>) -> Self {
        assert!(
            coeff > 0.0 && coeff.is_finite(),
            "monomial coefficient must be positive and finite, got {coeff}"
        );
        Self::from_log(coeff.ln(), exps)
    }

    pub fn from_log(log_coeff: f64, exps: impl IntoIterator<Item = (VarId, f64)>) -> Self {
        assert!(log_coeff.is_finite(), "log-coefficient must be finite");
        let mut v: Vec<(VarId, f64)> = exps.into_iter().collect();
        v.sort_by_key(|(id, _)| *id);
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(v.len());
        for (id, a) in v {
            match merged.last_mut() {
                Some((last, acc)) if *last == id => *acc += a,
                _ => merged.push((id, a)),
            }
        }
        merged.retain(|(_, a)| *a != 0.0);
        Self {
            log_coeff,
            exps: merged,
        }
    }

    pub fn constant(coeff: f64) -> Self {
        Self::new(coeff, [])
    }

    /// The monomial `x`.
    pub fn var(id: VarId) -> Self {
        Self::from_log(0.0, [(id, 1.0)])
    }

    pub fn coeff(&self) -> f64 {
        self.log_coeff.exp()
    }

    pub fn log_coeff(&self) -> f64 {
        self.log_coeff
    }

    pub fn exponents(&self) -> &[(VarId, f64)] {
        &self.exps
    }

    pub fn exponent(&self, id: VarId) -> f64 {
        self.exps
            .binary_search_by_key(&id, |(v, _)| *v)
            .map(|i| self.exps[i].1)
            .unwrap_or(0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn scale(&self, c: f64) -> Self {
        assert!(c > 0.0, "monomials can only be scaled by positive factors");
        Self {
            log_coeff: self.log_coeff + c.ln(),
            exps: self.exps.clone(),
        }
    }

    pub fn powf(&self, e: f64) -> Self {
        Self::from_log(self.log_coeff * e, self.exps.iter().map(|&(id, a)| (id, a * e)))
    }

    pub fn recip(&self) -> Self {
        self.powf(-1.0)
    }

    /// `log g(e^y)`: affine in the log-variables.
    pub fn log_eval(&self, y: &[f64]) -> f64 {
        self.log_coeff + self.exps.iter().map(|&(id, a)| a * y[id.index()]).sum::<f64>()
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        Ok(self.log_eval_checked(point)?.exp())
    }

    fn log_eval_checked(&self, point: &[f64]) -> Result<f64> {
        let mut acc = self.log_coeff;
        for &(id, a) in &self.exps {
            let x = point.get(id.index()).copied().unwrap_or(f64::NAN);
            if !(x > 0.0) {
                return Err(Error::NonPositivePoint {
                    var: format!("#{}", id.index()),
                    value: x,
                });
            }
            acc += a * x.ln();
        }
        Ok(acc)
    }

    fn key(&self) -> Vec<(u32, u64)> {
        self.exps.iter().map(|(id, a)| (id.0, a.to_bits())).collect()
    }

    pub fn display<'a>(&'a self, vars: &'a Variables) -> impl fmt::Display + 'a {
        MonomialDisplay { m: self, vars }
    }
}

struct MonomialDisplay<'a> {
    m: &'a Monomial,
    vars: &'a Variables,
}

impl fmt::Display for MonomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.12e}", self.m.coeff())?;
        for &(id, a) in &self.m.exps {
            write!(f, " {}^{}", self.vars.name(id), a)?;
        }
        Ok(())
    }
}

impl Mul for &Monomial {
    type Output = Monomial;

    fn mul(self, rhs: &Monomial) -> Monomial {
        Monomial::from_log(
            self.log_coeff + rhs.log_coeff,
            self.exps.iter().chain(rhs.exps.iter()).copied(),
        )
    }
}

impl Mul for Monomial {
    type Output = Monomial;

    fn mul(self, rhs: Monomial) -> Monomial {
        &self * &rhs
    }
}

/// A non-empty sum of monomials. Terms are kept in insertion order and are
/// not merged unless [`Posynomial::collect`] is called; products collect.
#[derive(Clone, Debug, PartialEq)]
pub struct Posynomial {
    terms: Vec<Monomial>,
}

impl Posynomial {
    pub fn from_terms(terms: Vec<Monomial>) -> Self {
        assert!(!terms.is_empty(), "a posynomial needs at least one term");
        Self { terms }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, m: Monomial) {
        self.terms.push(m);
    }

    /// Merges terms with identical exponent vectors, keeping first-seen order.
    pub fn collect(&self) -> Posynomial {
        let mut index: HashMap<Vec<(u32, u64)>, usize> = HashMap::new();
        let mut out: Vec<Monomial> = Vec::new();
        for t in &self.terms {
            match index.get(&t.key()) {
                Some(&i) => {
                    let a = out[i].log_coeff;
                    let b = t.log_coeff;
                    let hi = a.max(b);
                    out[i].log_coeff = hi + ((a - hi).exp() + (b - hi).exp()).ln();
                }
                None => {
                    index.insert(t.key(), out.len());
                    out.push(t.clone());
                }
            }
        }
        Posynomial { terms: out }
    }

    pub fn scale(&self, c: f64) -> Posynomial {
        Posynomial {
            terms: self.terms.iter().map(|t| t.scale(c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Posynomial {
        Posynomial {
            terms: self.terms.iter().map(|t| t * m).collect(),
        }
    }

    pub fn powi(&self, e: u32) -> Posynomial {
        assert!(e >= 1, "posynomial powers start at 1");
        let mut acc = self.clone();
        for _ in 1..e {
            acc = &acc * self;
        }
        acc
    }

    /// Values of the individual terms at `point`.
    pub fn term_values(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.terms.iter().map(|t| t.eval(point)).collect()
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        Ok(self.term_values(point)?.iter().sum())
    }

    /// `log p(e^y)` computed with a shifted log-sum-exp.
    pub fn log_eval(&self, y: &[f64]) -> f64 {
        let logs: Vec<f64> = self.terms.iter().map(|t| t.log_eval(y)).collect();
        log_sum_exp(&logs)
    }

    pub fn display<'a>(&'a self, vars: &'a Variables) -> impl fmt::Display + 'a {
        PosynomialDisplay { p: self, vars }
    }
}

struct PosynomialDisplay<'a> {
    p: &'a Posynomial,
    vars: &'a Variables,
}

impl fmt::Display for PosynomialDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.p.terms.iter().enumerate() {
            writeln!(f, "  [{k}] {}", t.display(self.vars))?;
        }
        Ok(())
    }
}

impl From<Monomial> for Posynomial {
    fn from(m: Monomial) -> Self {
        Posynomial { terms: vec![m] }
    }
}

impl Mul for &Posynomial {
    type Output = Posynomial;

    fn mul(self, rhs: &Posynomial) -> Posynomial {
        let mut terms = Vec::with_capacity(self.len() * rhs.len());
        for a in &self.terms {
            for b in &rhs.terms {
                terms.push(a * b);
            }
        }
        Posynomial { terms }.collect()
    }
}

impl Add for &Posynomial {
    type Output = Posynomial;

    fn add(self, rhs: &Posynomial) -> Posynomial {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        Posynomial { terms }
    }
}

impl Add for Posynomial {
    type Output = Posynomial;

    fn add(mut self, rhs: Posynomial) -> Posynomial {
        self.terms.extend(rhs.terms);
        self
    }
}

impl Add for Monomial {
    type Output = Posynomial;

    fn add(self, rhs: Monomial) -> Posynomial {
        Posynomial { terms: vec![self, rhs] }
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + xs.iter().map(|x| (x - hi).exp()).sum::<f64>().ln()
}

/// Relative share of each term at `point`: `γ_k = g_k(x) / p(x)`.
pub fn weights_from_point(p: &Posynomial, point: &[f64]) -> Result<Vec<f64>> {
    let logs = p
        .terms
        .iter()
        .map(|t| t.log_eval_checked(point))
        .collect::<Result<Vec<_>>>()?;
    let total = log_sum_exp(&logs);
    Ok(logs.iter().map(|l| (l - total).exp()).collect())
}

/// Single condensation of `p` with weights `gamma`: the AM-GM lower bound
/// `Π_k (g_k / γ_k)^{γ_k}`. Terms with zero weight drop out of the product.
pub fn condense(p: &Posynomial, gamma: &[f64]) -> Result<Monomial> {
    if gamma.len() != p.len() {
        return Err(Error::Weights(format!("{} weights for {} terms", gamma.len(), p.len())));
    }
    if let Some(g) = gamma.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
        return Err(Error::Weights(format!("negative or non-finite weight {g}")));
    }
    let sum: f64 = gamma.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Weights(format!("weights sum to {sum}, expected 1")));
    }
    let mut log_coeff = 0.0;
    let mut exps: Vec<(VarId, f64)> = Vec::new();
    for (t, &g) in p.terms.iter().zip(gamma) {
        if g == 0.0 {
            continue;
        }
        log_coeff += g * (t.log_coeff - g.ln());
        exps.extend(t.exps.iter().map(|&(id, a)| (id, g * a)));
    }
    Ok(Monomial::from_log(log_coeff, exps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> (Variables, VarId, VarId) {
        let mut v = Variables::new();
        let x = v.add("x");
        let y = v.add("y");
        (v, x, y)
    }

    #[test]
    fn exponent_cancellation() {
        let (_, x, y) = xy();
        let a = Monomial::new(2.0, [(x, 1.0)]);
        let b = Monomial::new(3.0, [(x, -1.0), (y, 1.0)]);
        let p = &a * &b;
        assert!((p.coeff() - 6.0).abs() < 1e-12);
        assert_eq!(p.exponents(), &[(y, 1.0)]);
    }

    #[test]
    fn square_expands() {
        let (_, x, y) = xy();
        let s = Monomial::var(x) + Monomial::var(y);
        let sq = s.powi(2);
        assert_eq!(sq.len(), 3);
        let xy_term = sq
            .terms()
            .iter()
            .find(|t| t.exponent(x) == 1.0 && t.exponent(y) == 1.0)
            .unwrap();
        assert!((xy_term.coeff() - 2.0).abs() < 1e-12);
        assert!((sq.eval(&[1.5, 0.5]).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn evaluate_monomial() {
        let (_, x, y) = xy();
        let m = Monomial::new(1.0, [(x, 2.0), (y, 1.0)]);
        assert!((m.eval(&[3.0, 2.0]).unwrap() - 18.0).abs() < 1e-12);
        assert!(matches!(m.eval(&[0.0, 2.0]), Err(Error::NonPositivePoint { .. })));
    }

    #[test]
    fn condense_equal_weights() {
        let (_, x, y) = xy();
        let p = Monomial::var(x) + Monomial::var(y);
        let c = condense(&p, &[0.5, 0.5]).unwrap();
        assert!((c.eval(&[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!((c.eval(&[4.0, 1.0]).unwrap() - 4.0).abs() < 1e-12);
        assert!(p.eval(&[4.0, 1.0]).unwrap() > 4.0);
    }

    #[test]
    fn condense_rejects_bad_weights() {
        let (_, x, y) = xy();
        let p = Monomial::var(x) + Monomial::var(y);
        assert!(condense(&p, &[0.5, 0.6]).is_err());
        assert!(condense(&p, &[1.0]).is_err());
        assert!(condense(&p, &[1.5, -0.5]).is_err());
    }

    #[test]
    fn zero_weight_drops_term() {
        let (_, x, y) = xy();
        let p = Monomial::var(x) + Monomial::var(y);
        let c = condense(&p, &[1.0, 0.0]).unwrap();
        assert_eq!(c.exponents(), &[(x, 1.0)]);
    }

    #[test]
    fn weights_examples() {
        let (_, x, y) = xy();
        let p = Monomial::var(x) + Monomial::var(y);
        let w = weights_from_point(&p, &[1.0, 1.0]).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);

        let p = Monomial::var(x) + Monomial::new(3.0, [(x, 1.0)]);
        let w = weights_from_point(&p, &[0.37, 1.0]).unwrap();
        assert!((w[0] - 0.25).abs() < 1e-15 && (w[1] - 0.75).abs() < 1e-15);

        let p = Monomial::new(2.0, [(x, 2.0)]) + Monomial::new(1.0, [(x, 2.0)]);
        let w = weights_from_point(&p, &[2.0, 1.0]).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tight_at_anchor() {
        let (_, x, y) = xy();
        let p = Posynomial::from_terms(vec![
            Monomial::new(0.3, [(x, 2.0), (y, -1.0)]),
            Monomial::new(1.7, [(y, 0.5)]),
            Monomial::constant(4.0),
        ]);
        let anchor = [0.8, 2.3];
        let w = weights_from_point(&p, &anchor).unwrap();
        let c = condense(&p, &w).unwrap();
        let exact = p.eval(&anchor).unwrap();
        assert!((c.eval(&anchor).unwrap() - exact).abs() <= 1e-14 * exact);
    }

    #[test]
    fn collect_keeps_unmerged_terms_apart_until_asked() {
        let (_, x, _) = xy();
        let p = Monomial::var(x) + Monomial::new(3.0, [(x, 1.0)]);
        assert_eq!(p.len(), 2);
        let c = p.collect();
        assert_eq!(c.len(), 1);
        assert!((c.terms()[0].coeff() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_coefficients_survive() {
        let (_, x, _) = xy();
        let m = Monomial::new(1e-300, [(x, 1.0)]).powf(2.0);
        assert!((m.log_coeff() - 2.0 * 1e-300f64.ln()).abs() < 1e-9);
    }
}
