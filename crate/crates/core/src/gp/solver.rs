//! Barrier interior-point solver for geometric programs in log space.
//!
//! With `y = log x` every posynomial becomes `log Σ_k exp(a_k·y + b_k)`,
//! a convex log-sum-exp, and every monomial an affine function. The solver
//! runs a phase-I barrier problem from the (possibly infeasible) initial
//! point, then the phase-II barrier path with damped Newton steps.
//! Variables carry a lower floor so the log-space problem stays bounded.

use nalgebra::{DMatrix, DVector};

use super::algebra::{log_sum_exp, Posynomial};
use super::GpProblem;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Bound on the log-space objective suboptimality at termination.
    pub tol: f64,
    /// Allowed relative violation of `p(x) ≤ 1` / `m(x) = 1` for an optimal status.
    pub feas_tol: f64,
    /// Lower bound applied to every variable in linear scale.
    pub floor: f64,
    pub max_newton: usize,
    /// Barrier parameter growth per outer iteration.
    pub mu: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            feas_tol: 1e-9,
            floor: 1e-12,
            max_newton: 2000,
            mu: 20.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GpSolution {
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub status: SolveStatus,
    pub kkt_residual: f64,
    /// Largest relative constraint violation at the returned point.
    pub max_violation: f64,
    pub newton_steps: usize,
}

impl GpSolution {
    pub fn value(&self, id: super::VarId) -> f64 {
        self.values[id.index()]
    }
}

/// `log Σ exp(A y + b)` over a fixed dimension.
#[derive(Clone, Debug)]
struct LogSumExp {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl LogSumExp {
    fn from_posynomial(p: &Posynomial, dim: usize) -> Self {
        let k = p.len();
        let mut a = DMatrix::zeros(k, dim);
        let mut b = DVector::zeros(k);
        for (row, t) in p.terms().iter().enumerate() {
            b[row] = t.log_coeff();
            for &(id, e) in t.exponents() {
                a[(row, id.index())] = e;
            }
        }
        Self { a, b }
    }

    fn single(row: DVector<f64>, b: f64) -> Self {
        Self {
            a: DMatrix::from_row_slice(1, row.len(), row.as_slice()),
            b: DVector::from_element(1, b),
        }
    }

    /// Appends a column with the same coefficient on every term.
    fn with_extra_column(&self, c: f64) -> Self {
        let (k, d) = self.a.shape();
        let mut a = self.a.clone().resize(k, d + 1, 0.0);
        a.column_mut(d).fill(c);
        Self { a, b: self.b.clone() }
    }

    fn value(&self, y: &DVector<f64>) -> f64 {
        let z = &self.a * y + &self.b;
        log_sum_exp(z.as_slice())
    }

    fn value_grad_hess(&self, y: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let z = &self.a * y + &self.b;
        let f = log_sum_exp(z.as_slice());
        let p = z.map(|zi| (zi - f).exp());
        let g = self.a.transpose() * &p;
        if self.a.nrows() == 1 {
            let d = self.a.ncols();
            return (f, g, DMatrix::zeros(d, d));
        }
        let mut scaled = self.a.clone();
        for (mut row, pi) in scaled.row_iter_mut().zip(p.iter()) {
            row *= *pi;
        }
        let h = self.a.transpose() * scaled - &g * g.transpose();
        (f, g, h)
    }
}

struct Barrier<'a> {
    objective: &'a LogSumExp,
    constraints: &'a [LogSumExp],
    eq: Option<(&'a DMatrix<f64>, &'a DVector<f64>)>,
}

#[derive(Debug, PartialEq)]
enum PathEnd {
    Converged,
    EarlyStop,
    Exhausted,
}

struct PathResult {
    y: DVector<f64>,
    end: PathEnd,
    gap: f64,
    steps: usize,
}

impl Barrier<'_> {
    fn strictly_feasible(&self, y: &DVector<f64>) -> bool {
        self.constraints.iter().all(|c| {
            let v = c.value(y);
            v.is_finite() && v < 0.0
        })
    }

    fn phi(&self, t: f64, y: &DVector<f64>) -> f64 {
        let mut acc = t * self.objective.value(y);
        for c in self.constraints {
            let v = c.value(y);
            if !(v < 0.0) {
                return f64::INFINITY;
            }
            acc -= (-v).ln();
        }
        acc
    }

    /// Follows the central path from a strictly feasible `y` until the
    /// duality-gap bound drops below `tol`.
    fn run(
        &self,
        mut y: DVector<f64>,
        tol: f64,
        mu: f64,
        max_steps: usize,
        stop: &dyn Fn(&DVector<f64>) -> bool,
    ) -> PathResult {
        let d = y.len();
        let m = self.constraints.len().max(1) as f64;
        let p = self.eq.map(|(e, _)| e.nrows()).unwrap_or(0);
        let mut t = 1.0;
        let mut steps = 0;
        loop {
            let mut decrement = 0.0;
            for _ in 0..200 {
                if steps >= max_steps {
                    return PathResult {
                        y,
                        end: PathEnd::Exhausted,
                        gap: m / t,
                        steps,
                    };
                }
                steps += 1;
                let (_, g0, h0) = self.objective.value_grad_hess(&y);
                let mut grad = g0 * t;
                let mut hess = h0 * t;
                for c in self.constraints {
                    let (f, g, h) = c.value_grad_hess(&y);
                    let inv = 1.0 / (-f);
                    grad.axpy(inv, &g, 1.0);
                    hess += &g * g.transpose() * (inv * inv) + h * inv;
                }
                let dy = newton_direction(&hess, &grad, self.eq.map(|(e, _)| e), d, p);
                let lambda2 = -grad.dot(&dy);
                decrement = lambda2.max(0.0);
                if !(lambda2 > 2e-10) {
                    break;
                }
                let phi0 = self.phi(t, &y);
                let mut alpha = 1.0;
                let mut accepted = None;
                while alpha > 1e-16 {
                    let cand = &y + &dy * alpha;
                    let val = self.phi(t, &cand);
                    if val.is_finite() && val <= phi0 - 0.01 * alpha * lambda2 {
                        y = cand;
                        accepted = Some(val);
                        break;
                    }
                    alpha *= 0.5;
                }
                // stop centering once φ no longer moves at working precision
                match accepted {
                    Some(val) if phi0 - val > 1e-13 * phi0.abs().max(1.0) => {}
                    _ => break,
                }
                if stop(&y) {
                    return PathResult {
                        y,
                        end: PathEnd::EarlyStop,
                        gap: m / t,
                        steps,
                    };
                }
                if y.amax() > 700.0 {
                    return PathResult {
                        y,
                        end: PathEnd::Exhausted,
                        gap: f64::INFINITY,
                        steps,
                    };
                }
            }
            let gap = m / t + decrement / (2.0 * t);
            if m / t < tol {
                return PathResult {
                    y,
                    end: PathEnd::Converged,
                    gap,
                    steps,
                };
            }
            t *= mu;
        }
    }
}

fn newton_direction(
    hess: &DMatrix<f64>,
    grad: &DVector<f64>,
    eq: Option<&DMatrix<f64>>,
    d: usize,
    p: usize,
) -> DVector<f64> {
    let solved = match eq {
        None => hess
            .clone()
            .cholesky()
            .map(|c| c.solve(&(-grad)))
            .or_else(|| hess.clone().lu().solve(&(-grad))),
        Some(e) => {
            let mut kkt = DMatrix::zeros(d + p, d + p);
            kkt.view_mut((0, 0), (d, d)).copy_from(hess);
            kkt.view_mut((d, 0), (p, d)).copy_from(e);
            kkt.view_mut((0, d), (d, p)).copy_from(&e.transpose());
            let mut rhs = DVector::zeros(d + p);
            rhs.rows_mut(0, d).copy_from(&(-grad));
            kkt.lu().solve(&rhs).map(|s| s.rows(0, d).into_owned())
        }
    };
    match solved {
        Some(s) if s.iter().all(|v| v.is_finite()) => s,
        // gradient fallback, projected onto the equality null space
        _ => {
            let mut s = -grad.clone();
            if let Some(e) = eq {
                let eet = e * e.transpose();
                if let Some(w) = eet.lu().solve(&(e * &s)) {
                    s -= e.transpose() * w;
                }
            }
            s
        }
    }
}

/// Solves `problem` from a strictly positive (not necessarily feasible) start.
pub fn solve_gp(problem: &GpProblem, initial: &[f64], opts: &SolverOptions) -> Result<GpSolution> {
    let n = problem.num_vars();
    if initial.len() != n {
        return Err(Error::Weights(format!(
            "initial point has {} entries for {} variables",
            initial.len(),
            n
        )));
    }
    for id in problem.vars.ids() {
        let v = initial[id.index()];
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositivePoint {
                var: problem.vars.name(id).to_string(),
                value: v,
            });
        }
    }

    let objective = LogSumExp::from_posynomial(&problem.objective, n);
    let mut constraints: Vec<LogSumExp> = problem
        .inequalities
        .iter()
        .map(|p| LogSumExp::from_posynomial(p, n))
        .collect();
    let log_floor = opts.floor.ln();
    for j in 0..n {
        let mut row = DVector::zeros(n);
        row[j] = -1.0;
        constraints.push(LogSumExp::single(row, log_floor));
    }

    let eq = if problem.equalities.is_empty() {
        None
    } else {
        let p = problem.equalities.len();
        let mut e = DMatrix::zeros(p, n);
        let mut dvec = DVector::zeros(p);
        for (i, m) in problem.equalities.iter().enumerate() {
            dvec[i] = -m.log_coeff();
            for &(id, a) in m.exponents() {
                e[(i, id.index())] = a;
            }
        }
        Some((e, dvec))
    };

    let mut y = DVector::from_iterator(n, initial.iter().map(|v| v.max(opts.floor * 10.0).ln()));
    if let Some((e, dvec)) = &eq {
        let resid = e * &y - dvec;
        let eet = e * e.transpose();
        let w = eet
            .clone()
            .lu()
            .solve(&resid)
            .or_else(|| eet.pseudo_inverse(1e-12).ok().map(|pinv| pinv * &resid));
        match w {
            Some(w) => y -= e.transpose() * w,
            None => {
                return Ok(finish(problem, &y, SolveStatus::Infeasible, f64::INFINITY, 0, opts));
            }
        }
        if (e * &y - dvec).amax() > 1e-9 {
            return Ok(finish(problem, &y, SolveStatus::Infeasible, f64::INFINITY, 0, opts));
        }
    }

    let mut steps = 0;
    let phase2 = Barrier {
        objective: &objective,
        constraints: &constraints,
        eq: eq.as_ref().map(|(e, d)| (e, d)),
    };
    if !phase2.strictly_feasible(&y) {
        // phase I: minimize s subject to f_i(y) ≤ s, s ≥ -1
        let worst = constraints
            .iter()
            .map(|c| c.value(&y))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut z = y.clone().resize_vertically(n + 1, 0.0);
        z[n] = worst + 1.0;
        let mut s_dir = DVector::zeros(n + 1);
        s_dir[n] = 1.0;
        let obj1 = LogSumExp::single(s_dir.clone(), 0.0);
        let mut cons1: Vec<LogSumExp> = constraints.iter().map(|c| c.with_extra_column(-1.0)).collect();
        cons1.push(LogSumExp::single(-s_dir, -1.0));
        let eq1 = eq
            .as_ref()
            .map(|(e, d)| (e.clone().resize_horizontally(n + 1, 0.0), d.clone()));
        let phase1 = Barrier {
            objective: &obj1,
            constraints: &cons1,
            eq: eq1.as_ref().map(|(e, d)| (e, d)),
        };
        let stop = |z: &DVector<f64>| phase2.strictly_feasible(&z.rows(0, n).into_owned());
        let res = phase1.run(z, opts.tol, opts.mu, opts.max_newton, &stop);
        steps += res.steps;
        y = res.y.rows(0, n).into_owned();
        if res.end != PathEnd::EarlyStop {
            let status = if res.end == PathEnd::Exhausted {
                SolveStatus::MaxIterations
            } else {
                SolveStatus::Infeasible
            };
            return Ok(finish(problem, &y, status, f64::INFINITY, steps, opts));
        }
    }

    let res = phase2.run(y, opts.tol, opts.mu, opts.max_newton.saturating_sub(steps), &|_| false);
    steps += res.steps;
    let status = match res.end {
        PathEnd::Converged if res.gap <= opts.tol * 2.0 => SolveStatus::Optimal,
        _ => SolveStatus::MaxIterations,
    };
    Ok(finish(problem, &res.y, status, res.gap, steps, opts))
}

fn finish(
    problem: &GpProblem,
    y: &DVector<f64>,
    mut status: SolveStatus,
    kkt_residual: f64,
    newton_steps: usize,
    opts: &SolverOptions,
) -> GpSolution {
    let values: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    let ys = y.as_slice();
    let mut max_violation: f64 = 0.0;
    for p in &problem.inequalities {
        max_violation = max_violation.max(p.log_eval(ys).exp() - 1.0);
    }
    for m in &problem.equalities {
        max_violation = max_violation.max((m.log_eval(ys).exp() - 1.0).abs());
    }
    if status == SolveStatus::Optimal && max_violation > opts.feas_tol {
        status = SolveStatus::MaxIterations;
    }
    GpSolution {
        objective_value: problem.objective.log_eval(ys).exp(),
        values,
        status,
        kkt_residual,
        max_violation,
        newton_steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{Monomial, Variables};

    #[test]
    fn boundary_optimum() {
        let mut v = Variables::new();
        let x = v.add("x");
        let y = v.add("y");
        let mut p = GpProblem::new(v, Monomial::new(1.0, [(x, -1.0), (y, -1.0)]));
        p.add_le(Monomial::new(0.5, [(x, 1.0)]));
        p.add_le(Monomial::new(1.0 / 3.0, [(y, 1.0)]));
        let s = solve_gp(&p, &[7.0, 0.1], &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective_value - 1.0 / 6.0).abs() < 1e-7);
        assert!((s.value(x) - 2.0).abs() < 1e-6);
        assert!((s.value(y) - 3.0).abs() < 1e-6);
    }

    #[test]
    fn unconstrained_am_gm() {
        let mut v = Variables::new();
        let x = v.add("x");
        let obj = Monomial::var(x) + Monomial::new(1.0, [(x, -1.0)]);
        let p = GpProblem::new(v, obj);
        let s = solve_gp(&p, &[5.0], &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective_value - 2.0).abs() < 1e-8);
        assert!((s.value(x) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn detects_infeasibility() {
        let mut v = Variables::new();
        let x = v.add("x");
        let mut p = GpProblem::new(v, Monomial::var(x));
        p.add_le(Monomial::new(2.0, [(x, 1.0)])); // x ≤ 1/2
        p.add_le(Monomial::new(1.0, [(x, -1.0)])); // x ≥ 1
        let s = solve_gp(&p, &[1.0], &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
        assert!(s.max_violation > 0.1);
    }

    #[test]
    fn equality_constraint() {
        let mut v = Variables::new();
        let x = v.add("x");
        let y = v.add("y");
        let mut p = GpProblem::new(v, Monomial::var(x) + Monomial::var(y));
        p.add_eq(Monomial::new(0.25, [(x, 1.0), (y, 1.0)]));
        let s = solve_gp(&p, &[1.0, 9.0], &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective_value - 4.0).abs() < 1e-7);
    }

    #[test]
    fn rejects_nonpositive_start() {
        let mut v = Variables::new();
        let x = v.add("x");
        let p = GpProblem::new(v, Monomial::var(x));
        assert!(solve_gp(&p, &[0.0], &SolverOptions::default()).is_err());
    }
}
