use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Coefficient, Monomial, Polynomial};

/// Index of a truncated moment sequence `y = (y_α)`.
///
/// Maps each registered exponent vector to a dense position. The constant
/// monomial is always registered at position 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    monomials: Vec<Monomial>,
    #[serde(skip)]
    index: HashMap<Monomial, usize>,
}

impl Default for MomentSequence {
    fn default() -> Self {
        Self::new()
    }
}

impl MomentSequence {
    /// Sequence holding only `y_0`.
    pub fn new() -> Self {
        let mut index = HashMap::new();
        index.insert(Monomial::one(), 0);
        Self { monomials: vec![Monomial::one()], index }
    }

    /// Builds an index with `y_0` first and the remaining monomials in the
    /// given order (duplicates ignored).
    pub fn from_monomials<I: IntoIterator<Item = Monomial>>(monomials: I) -> Self {
        let mut seq = Self::new();
        for m in monomials {
            seq.register(&m);
        }
        seq
    }

    pub fn y0_position(&self) -> usize {
        0
    }

    /// Returns the position of `m`, registering it if new.
    pub fn register(&mut self, m: &Monomial) -> usize {
        if let Some(&p) = self.index.get(m) {
            return p;
        }
        let p = self.monomials.len();
        self.monomials.push(m.clone());
        self.index.insert(m.clone(), p);
        p
    }

    pub fn position(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn monomial(&self, pos: usize) -> &Monomial {
        &self.monomials[pos]
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Rebuilds the lookup table after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    }

    /// The moment vector of the Dirac measure at `point`: `y_α = point^α`.
    pub fn dirac(&self, point: &[f64]) -> Vec<f64> {
        self.monomials.iter().map(|m| m.eval(point)).collect()
    }
}

/// A sparse linear form `Σ coef · y[pos]` over a [`MomentSequence`].
///
/// Terms are sorted by position with no zero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearForm {
    pub terms: Vec<(usize, f64)>,
}

impl LinearForm {
    pub fn from_terms<I: IntoIterator<Item = (usize, f64)>>(terms: I) -> Self {
        let mut t: Vec<(usize, f64)> = terms.into_iter().collect();
        t.sort_by_key(|&(p, _)| p);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(t.len());
        for (p, c) in t {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += c,
                _ => merged.push((p, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        Self { terms: merged }
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms.iter().map(|&(p, c)| c * y[p]).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, pos: usize) -> f64 {
        self.terms.binary_search_by_key(&pos, |&(p, _)| p).map_or(0.0, |i| self.terms[i].1)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &LinearForm, b: f64) -> LinearForm {
        let scaled = self.terms.iter().map(|&(p, c)| (p, a * c));
        LinearForm::from_terms(scaled.chain(other.terms.iter().map(|&(p, c)| (p, b * c))))
    }
}

/// Applies the Riesz functional `L_y(p) = Σ p_α y_α`, registering unseen
/// monomials of `p` in `y`.
pub fn riesz_apply<C: Coefficient>(p: &Polynomial<C>, y: &mut MomentSequence) -> LinearForm {
    LinearForm::from_terms(p.terms().map(|(m, c)| (y.register(m), c.to_f64())))
}

/// Like [`riesz_apply`] but without registration; `None` if some monomial of
/// `p` is not indexed.
pub fn riesz_apply_frozen<C: Coefficient>(p: &Polynomial<C>, y: &MomentSequence) -> Option<LinearForm> {
    let terms: Option<Vec<(usize, f64)>> = p.terms().map(|(m, c)| Some((y.position(m)?, c.to_f64()))).collect();
    terms.map(LinearForm::from_terms)
}

/// Entrywise Riesz functional of the polynomial matrix `g · b bᵀ` for a
/// monomial vector `b`.
pub fn riesz_localizing<C: Coefficient>(g: &Polynomial<C>, b: &[Monomial], y: &mut MomentSequence) -> Vec<Vec<LinearForm>> {
    b.iter()
        .map(|r| b.iter().map(|c| riesz_apply(&g.mul_monomial(&r.mul(c)), y)).collect())
        .collect()
}

/// Entrywise Riesz functional of the polynomial vector `p · b`.
pub fn riesz_vector<C: Coefficient>(p: &Polynomial<C>, b: &[Monomial], y: &mut MomentSequence) -> Vec<LinearForm> {
    b.iter().map(|m| riesz_apply(&p.mul_monomial(m), y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::monomial_basis;

    #[test]
    fn constant_maps_to_y0() {
        let mut y = MomentSequence::new();
        let form = riesz_apply(&Polynomial::constant(2, 1.0), &mut y);
        assert_eq!(form.terms, vec![(0, 1.0)]);
        assert_eq!(y.len(), 1);
    }

    #[test]
    fn moment_matrix_entries() {
        let mut y = MomentSequence::new();
        let b = monomial_basis(&[0, 1, 2], 1);
        let one = Polynomial::<f64>::constant(3, 1.0);
        let m = riesz_localizing(&one, b.members(), &mut y);
        let label = |f: &LinearForm| {
            assert_eq!(f.terms.len(), 1);
            y.monomial(f.terms[0].0).to_dense(3)
        };
        assert_eq!(label(&m[0][1]), vec![1, 0, 0]);
        assert_eq!(label(&m[3][3]), vec![0, 0, 2]);
    }
}
