//! Geometric programming: posynomial algebra, single condensation and a
//! standard-form solver working on the log-transformed convex problem.

mod algebra;
mod solver;

pub use algebra::{condense, weights_from_point, Monomial, Posynomial, VarId, Variables};
pub use solver::{solve_gp, GpSolution, SolveStatus, SolverOptions};

use std::fmt::Write;

/// `minimize objective s.t. p_i(x) ≤ 1, m_j(x) = 1, x > 0`.
#[derive(Clone, Debug)]
pub struct GpProblem {
    pub vars: Variables,
    pub objective: Posynomial,
    pub inequalities: Vec<Posynomial>,
    pub equalities: Vec<Monomial>,
}

impl GpProblem {
    pub fn new(vars: Variables, objective: impl Into<Posynomial>) -> Self {
        Self {
            vars,
            objective: objective.into(),
            inequalities: Vec::new(),
            equalities: Vec::new(),
        }
    }

    /// Adds `p ≤ 1`.
    pub fn add_le(&mut self, p: impl Into<Posynomial>) {
        self.inequalities.push(p.into());
    }

    /// Adds `m = 1`.
    pub fn add_eq(&mut self, m: Monomial) {
        self.equalities.push(m);
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// Human-readable listing of every monomial in the problem.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "variables ({}):", self.vars.len());
        for id in self.vars.ids() {
            let _ = writeln!(s, "  {} {}", id.index(), self.vars.name(id));
        }
        let _ = writeln!(s, "minimize ({} terms):", self.objective.len());
        let _ = write!(s, "{}", self.objective.display(&self.vars));
        for (i, p) in self.inequalities.iter().enumerate() {
            let _ = writeln!(s, "le[{i}] ({} terms) <= 1:", p.len());
            let _ = write!(s, "{}", p.display(&self.vars));
        }
        for (j, m) in self.equalities.iter().enumerate() {
            let _ = writeln!(s, "eq[{j}] = 1:");
            let _ = writeln!(s, "  {}", m.display(&self.vars));
        }
        s
    }
}
