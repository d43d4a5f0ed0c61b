use serde::{Deserialize, Serialize};

use super::RelaxationProblem;
use crate::poly::Monomial;

/// One coefficient-matching equation of the SOS problem:
///
/// ```text
/// Σ_k ⟨Q_k, F_{k,α}⟩ + Σ_r ν_r a_{r,α} = f_α
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SosEquation {
    pub position: usize,
    pub monomial: Monomial,
    /// `(block, row, col, weight)` with `row <= col`; off-diagonal weights
    /// already count both symmetric entries.
    pub gram_terms: Vec<(usize, usize, usize, f64)>,
    /// `(equality row, coefficient)`.
    pub multiplier_terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// The SOS side of a relaxation:
///
/// ```text
/// max b  s.t.  f - b = Σ_k ⟨Q_k, A_k⟩ + Σ_r ν_r (a_r · x)  coefficientwise,
///              Q_k ⪰ 0
/// ```
///
/// The constant coefficient fixes `b`, so one equation remains per nonzero
/// moment position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SosProblem {
    pub gram_sizes: Vec<usize>,
    pub multipliers: usize,
    pub equations: Vec<SosEquation>,
    /// Equation of the constant monomial; `b = rhs - (its left side)`.
    pub constant: SosEquation,
}

/// Mechanical conic dualization of a moment relaxation.
pub fn dualize(rp: &RelaxationProblem) -> SosProblem {
    let npos = rp.npositions();
    let mut eqs: Vec<SosEquation> = (0..npos)
        .map(|p| SosEquation {
            position: p,
            monomial: rp.moments.monomial(p).clone(),
            gram_terms: Vec::new(),
            multiplier_terms: Vec::new(),
            rhs: rp.objective.coefficient(p),
        })
        .collect();
    for (k, b) in rp.blocks.iter().enumerate() {
        for e in &b.entries {
            let w = if e.row == e.col { e.coef } else { 2.0 * e.coef };
            eqs[e.pos].gram_terms.push((k, e.row, e.col, w));
        }
    }
    for (r, row) in rp.eq_rows.iter().enumerate() {
        for &(p, c) in &row.form.terms {
            eqs[p].multiplier_terms.push((r, c));
        }
    }
    let constant = eqs.remove(0);
    SosProblem { gram_sizes: rp.block_sizes(), multipliers: rp.eq_rows.len(), equations: eqs, constant }
}

impl SosProblem {
    fn lhs(eq: &SosEquation, grams: &[nalgebra::DMatrix<f64>], nu: &[f64]) -> f64 {
        let g: f64 = eq.gram_terms.iter().map(|&(k, r, c, w)| w * grams[k][(r, c)]).sum();
        let m: f64 = eq.multiplier_terms.iter().map(|&(r, c)| c * nu[r]).sum();
        g + m
    }

    /// The bound `b` certified by Gram matrices and multipliers.
    pub fn bound(&self, grams: &[nalgebra::DMatrix<f64>], nu: &[f64]) -> f64 {
        self.constant.rhs - Self::lhs(&self.constant, grams, nu)
    }

    /// Largest violation of the coefficient-matching equations.
    pub fn equation_residual(&self, grams: &[nalgebra::DMatrix<f64>], nu: &[f64]) -> f64 {
        self.equations.iter().map(|e| (Self::lhs(e, grams, nu) - e.rhs).abs()).fold(0.0, f64::max)
    }
}
