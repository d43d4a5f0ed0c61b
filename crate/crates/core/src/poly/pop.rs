use std::collections::HashSet;
use std::fmt::Write as _;

use super::{Coefficient, Polynomial};
use crate::error::{Error, Result};

/// A polynomial optimization problem
///
/// ```text
/// min f(x)  s.t.  g_j(x) >= 0,  h_j(x) == 0
/// ```
///
/// over named real variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Pop<C: Coefficient = f64> {
    objective: Polynomial<C>,
    inequalities: Vec<Polynomial<C>>,
    equalities: Vec<Polynomial<C>>,
    variable_names: Vec<String>,
}

impl<C: Coefficient> Pop<C> {
    /// Validates dimensions and name uniqueness.
    pub fn new(
        variable_names: Vec<String>,
        objective: Polynomial<C>,
        inequalities: Vec<Polynomial<C>>,
        equalities: Vec<Polynomial<C>>,
    ) -> Result<Self> {
        let n = variable_names.len();
        let mut seen = HashSet::new();
        for name in &variable_names {
            if !is_identifier(name) {
                return Err(Error::InvalidProblem(format!("`{name}` is not a valid variable name")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidProblem(format!("duplicate variable name `{name}`")));
            }
        }
        for p in std::iter::once(&objective).chain(&inequalities).chain(&equalities) {
            if p.nvars() != n {
                return Err(Error::DimensionMismatch { left: p.nvars(), right: n });
            }
        }
        Ok(Self { objective, inequalities, equalities, variable_names })
    }

    pub fn nvars(&self) -> usize {
        self.variable_names.len()
    }

    pub fn objective(&self) -> &Polynomial<C> {
        &self.objective
    }

    pub fn inequalities(&self) -> &[Polynomial<C>] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[Polynomial<C>] {
        &self.equalities
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variable_names.iter().position(|n| n == name)
    }

    /// Replaces the objective, keeping constraints.
    pub fn with_objective(mut self, objective: Polynomial<C>) -> Result<Self> {
        if objective.nvars() != self.nvars() {
            return Err(Error::DimensionMismatch { left: objective.nvars(), right: self.nvars() });
        }
        self.objective = objective;
        Ok(self)
    }

    /// Converts the coefficients to `f64`.
    pub fn to_f64(&self) -> Pop<f64> {
        Pop {
            objective: self.objective.to_f64(),
            inequalities: self.inequalities.iter().map(Polynomial::to_f64).collect(),
            equalities: self.equalities.iter().map(Polynomial::to_f64).collect(),
            variable_names: self.variable_names.clone(),
        }
    }

    /// Largest violation of any constraint at `point` (0 when feasible).
    pub fn feasibility_residual(&self, point: &[f64]) -> f64 {
        let ineq = self.inequalities.iter().map(|g| (-g.eval(point)).max(0.0));
        let eq = self.equalities.iter().map(|h| h.eval(point).abs());
        ineq.chain(eq).fold(0.0, f64::max)
    }

    /// Renders the problem in the POP text format read by
    /// [`parse_pop`](super::parse_pop).
    pub fn to_text(&self) -> String {
        let names = &self.variable_names;
        let mut out = String::new();
        let _ = writeln!(out, "vars {};", names.join(" "));
        let _ = writeln!(out, "min {};", self.objective.display_with(names));
        if !self.inequalities.is_empty() || !self.equalities.is_empty() {
            out.push_str("s.t.\n");
        }
        for g in &self.inequalities {
            let _ = writeln!(out, "  {} >= 0;", g.display_with(names));
        }
        for h in &self.equalities {
            let _ = writeln!(out, "  {} == 0;", h.display_with(names));
        }
        out
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(s, "vars" | "min")
}
