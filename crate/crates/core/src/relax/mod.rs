//! Moment relaxations as block SDPs over a moment sequence, and their SOS
//! duals.
//!
//! A [`RelaxationProblem`] reads
//!
//! ```text
//! min  L_y(f)
//! s.t. y_0 = 1
//!      A_k(y) = Σ_α y_α F_{k,α} ⪰ 0      for every block k
//!      a_r · y = 0                       for every equality row r
//! ```
//!
//! where each block is a principal submatrix of a moment or localizing
//! matrix and each equality row is an entry of an equality multiplier vector.

mod assemble;
mod dual;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use crate::poly::{LinearForm, MomentSequence};
pub use assemble::{assemble_cs, assemble_cs_ts, assemble_dense, compute_dmin};
pub use dual::{dualize, SosEquation, SosProblem};

use crate::poly::Monomial;

/// One term `coef · y[pos]` of entry `(row, col)`, `row <= col`, of a block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub row: usize,
    pub col: usize,
    pub pos: usize,
    pub coef: f64,
}

/// Where a block comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockOrigin {
    /// Variable clique `l` (0-based).
    pub clique: usize,
    /// `None` for the moment matrix, `Some(j)` for inequality `j`.
    pub constraint: Option<usize>,
    /// Index of the term-sparsity clique when the matrix was split.
    pub ts_clique: Option<usize>,
}

/// A PSD constraint `Σ_α y_α F_α ⪰ 0` with rows indexed by `basis`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdBlock {
    pub label: String,
    pub origin: BlockOrigin,
    pub basis: Vec<Monomial>,
    pub entries: Vec<BlockEntry>,
}

impl PsdBlock {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn is_moment(&self) -> bool {
        self.origin.constraint.is_none()
    }

    /// The symmetric matrix `A(y)`.
    pub fn matrix(&self, y: &[f64]) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for e in &self.entries {
            let v = e.coef * y[e.pos];
            m[(e.row, e.col)] += v;
            if e.row != e.col {
                m[(e.col, e.row)] += v;
            }
        }
        m
    }
}

/// A scalar equation `form · y = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqRow {
    pub label: String,
    pub form: LinearForm,
}

/// Options and shapes recorded with an assembled problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxMeta {
    pub d: u32,
    pub cliques: Vec<Vec<usize>>,
    /// Term sparsity mode, `None` when no masks were applied.
    pub ts_mode: Option<String>,
    pub sparse_order: Option<usize>,
    pub partial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxationProblem {
    pub nvars: usize,
    pub moments: MomentSequence,
    pub blocks: Vec<PsdBlock>,
    pub eq_rows: Vec<EqRow>,
    /// `L_y(f)`, including the constant term on `y_0`.
    pub objective: LinearForm,
    pub meta: RelaxMeta,
}

impl RelaxationProblem {
    pub fn npositions(&self) -> usize {
        self.moments.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(PsdBlock::size).collect()
    }

    /// Moment vector of the point mass at `point`.
    pub fn dirac(&self, point: &[f64]) -> Vec<f64> {
        self.moments.dirac(point)
    }

    pub fn objective_at(&self, y: &[f64]) -> f64 {
        self.objective.eval(y)
    }

    /// Returns a copy with the rows and columns of every block, the blocks
    /// themselves and the y positions reordered; used to test that results
    /// do not depend on layout. `perm` must be a permutation of the positions
    /// fixing 0.
    pub fn permuted(&self, block_order: &[usize], perm: &[usize]) -> Self {
        let mut monos = vec![Monomial::one(); perm.len()];
        for (old, &new) in perm.iter().enumerate() {
            monos[new] = self.moments.monomial(old).clone();
        }
        let mut moments = MomentSequence::new();
        for m in monos.iter().skip(1) {
            moments.register(m);
        }
        let map = |f: &LinearForm| LinearForm::from_terms(f.terms.iter().map(|&(p, c)| (perm[p], c)));
        let blocks = block_order
            .iter()
            .map(|&k| {
                let b = &self.blocks[k];
                PsdBlock {
                    entries: b.entries.iter().map(|e| BlockEntry { pos: perm[e.pos], ..*e }).collect(),
                    ..b.clone()
                }
            })
            .collect();
        let eq_rows = self.eq_rows.iter().map(|r| EqRow { label: r.label.clone(), form: map(&r.form) }).collect();
        Self {
            nvars: self.nvars,
            moments,
            blocks,
            eq_rows,
            objective: map(&self.objective),
            meta: self.meta.clone(),
        }
    }

    /// Native JSON dump with monomial labels.
    pub fn to_json(&self, names: &[String]) -> serde_json::Value {
        let label = |p: usize| self.moments.monomial(p).display_with(names).to_string();
        let form = |f: &LinearForm| -> Vec<serde_json::Value> {
            f.terms.iter().map(|&(p, c)| serde_json::json!({"monomial": label(p), "pos": p, "coef": c})).collect()
        };
        serde_json::json!({
            "d": self.meta.d,
            "positions": (0..self.npositions()).map(label).collect::<Vec<_>>(),
            "objective": form(&self.objective),
            "blocks": self.blocks.iter().map(|b| serde_json::json!({
                "label": b.label,
                "clique": b.origin.clique + 1,
                "constraint": b.origin.constraint.map(|j| j + 1),
                "size": b.size(),
                "basis": b.basis.iter().map(|m| m.display_with(names).to_string()).collect::<Vec<_>>(),
                "entries": b.entries.iter().map(|e| serde_json::json!([e.row, e.col, label(e.pos), e.coef])).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "equalities": self.eq_rows.iter().map(|r| serde_json::json!({"label": r.label, "terms": form(&r.form)})).collect::<Vec<_>>(),
        })
    }
}
