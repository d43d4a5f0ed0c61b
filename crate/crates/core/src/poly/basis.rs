use serde::{Deserialize, Serialize};

use super::Monomial;

/// The standard monomial basis `[x(I)]_d` in graded order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialBasis {
    members: Vec<Monomial>,
    var_set: Vec<usize>,
    degree_bound: u32,
}

impl MonomialBasis {
    /// All monomials in the variables `var_set` of total degree at most `d`.
    ///
    /// `var_set` is deduplicated and sorted; indices are 0-based.
    pub fn new(var_set: &[usize], d: u32) -> Self {
        let mut vars = var_set.to_vec();
        vars.sort_unstable();
        vars.dedup();
        let mut members = Vec::with_capacity(basis_len(vars.len(), d));
        let mut exps = Vec::with_capacity(vars.len());
        for deg in 0..=d {
            fill_degree(&vars, deg, &mut exps, &mut members);
        }
        Self { members, var_set: vars, degree_bound: d }
    }

    pub fn members(&self) -> &[Monomial] {
        &self.members
    }

    pub fn var_set(&self) -> &[usize] {
        &self.var_set
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Position of `m` in the basis.
    pub fn position(&self, m: &Monomial) -> Option<usize> {
        self.members.binary_search(m).ok()
    }

    pub fn into_members(self) -> Vec<Monomial> {
        self.members
    }
}

/// Shorthand for [`MonomialBasis::new`].
pub fn monomial_basis(var_set: &[usize], d: u32) -> MonomialBasis {
    MonomialBasis::new(var_set, d)
}

/// `C(k + d, d)`, the size of `[x(I)]_d` for `|I| = k`.
pub fn basis_len(k: usize, d: u32) -> usize {
    let d = d as usize;
    (1..=d).fold(1usize, |acc, i| acc * (k + i) / i)
}

// Emits the monomials of exact degree `deg` with the exponent of the
// lowest-index variable running from high to low, which is the crate order.
fn fill_degree(vars: &[usize], deg: u32, exps: &mut Vec<(usize, u32)>, out: &mut Vec<Monomial>) {
    match vars.split_first() {
        None => {
            if deg == 0 {
                out.push(Monomial::from_pairs(exps.iter().copied()));
            }
        }
        Some((&v, rest)) => {
            for e in (0..=deg).rev() {
                exps.push((v, e));
                fill_degree(rest, deg - e, exps, out);
                exps.pop();
            }
        }
    }
}
