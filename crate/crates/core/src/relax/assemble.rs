use std::collections::BTreeSet;

use super::{BlockEntry, BlockOrigin, EqRow, PsdBlock, RelaxMeta, RelaxationProblem};
use crate::cs::CliqueDecomposition;
use crate::error::{Error, Result};
use crate::poly::{monomial_basis, Coefficient, LinearForm, Monomial, MomentSequence, Polynomial, Pop};
use crate::ts::{ineq_degree, MaskSet};

/// Smallest admissible relaxation order:
/// `max(⌈deg f / 2⌉, max_j ⌈deg g_j / 2⌉, max_j ⌈deg h_j / 2⌉)`, and at least 1.
pub fn compute_dmin<C: Coefficient>(pop: &Pop<C>) -> u32 {
    let half = |p: &Polynomial<C>| p.degree().div_ceil(2);
    std::iter::once(pop.objective())
        .chain(pop.inequalities())
        .chain(pop.equalities())
        .map(half)
        .max()
        .unwrap_or(0)
        .max(1)
}

/// The dense relaxation: one moment matrix over `[x]_d`.
pub fn assemble_dense<C: Coefficient>(pop: &Pop<C>, d: u32) -> Result<RelaxationProblem> {
    assemble(pop, &CliqueDecomposition::trivial(pop), None, d)
}

/// The correlatively sparse relaxation: one moment matrix per clique,
/// localizing matrices and equality rows per grouped constraint.
pub fn assemble_cs<C: Coefficient>(pop: &Pop<C>, dec: &CliqueDecomposition, d: u32) -> Result<RelaxationProblem> {
    assemble(pop, dec, None, d)
}

/// The combined correlative and term sparse relaxation. Every masked matrix
/// is replaced by one PSD block per maximal clique of its chordal TSP graph
/// (principal submatrices sharing `y`), and only unmasked equality entries
/// are kept.
pub fn assemble_cs_ts<C: Coefficient>(
    pop: &Pop<C>,
    dec: &CliqueDecomposition,
    masks: &MaskSet,
    d: u32,
) -> Result<RelaxationProblem> {
    if masks.d != d || masks.cliques.len() != dec.len() {
        return Err(Error::InvalidOption(format!(
            "masks were built for d = {} and {} cliques, not d = {d} and {} cliques",
            masks.d,
            masks.cliques.len(),
            dec.len()
        )));
    }
    assemble(pop, dec, Some(masks), d)
}

struct RawBlock {
    label: String,
    origin: BlockOrigin,
    basis: Vec<Monomial>,
    // Terms per (row, col) before positions are known.
    entries: Vec<(usize, usize, Monomial, f64)>,
}

fn raw_block<C: Coefficient>(
    g: Option<&Polynomial<C>>,
    basis: &[Monomial],
    rows: &[usize],
    label: String,
    origin: BlockOrigin,
) -> RawBlock {
    let sub: Vec<Monomial> = rows.iter().map(|&r| basis[r].clone()).collect();
    let mut entries = Vec::new();
    for (i, a) in sub.iter().enumerate() {
        for (j, b) in sub.iter().enumerate().skip(i) {
            let ab = a.mul(b);
            match g {
                None => entries.push((i, j, ab, 1.0)),
                Some(g) => {
                    for (m, c) in g.terms() {
                        entries.push((i, j, m.mul(&ab), c.to_f64()));
                    }
                }
            }
        }
    }
    RawBlock { label, origin, basis: sub, entries }
}

fn assemble<C: Coefficient>(
    pop: &Pop<C>,
    dec: &CliqueDecomposition,
    masks: Option<&MaskSet>,
    d: u32,
) -> Result<RelaxationProblem> {
    let d_min = compute_dmin(pop);
    if d < d_min {
        return Err(Error::OrderTooLow { d: d as usize, d_min: d_min as usize });
    }
    let mut blocks: Vec<RawBlock> = Vec::new();
    let mut eqs: Vec<(String, Vec<(Monomial, f64)>)> = Vec::new();
    for (l, vars) in dec.cliques.iter().enumerate() {
        let cm = masks.map(|m| &m.cliques[l]);
        let mut push_blocks = |g: Option<&Polynomial<C>>, j: Option<usize>, k: usize| {
            let basis = match cm {
                Some(cm) if j.is_none() => cm.moment.basis.clone(),
                Some(cm) => cm.localizing[k].basis.clone(),
                None => monomial_basis(vars, d - g.map_or(0, ineq_degree)).into_members(),
            };
            let name = match j {
                None => format!("moment c{}", l + 1),
                Some(j) => format!("localizing c{} g{}", l + 1, j + 1),
            };
            let mask = cm.map(|cm| if j.is_none() { &cm.moment } else { &cm.localizing[k] });
            match mask {
                Some(mask) if !mask.is_full() => {
                    for (t, rows) in mask.ts_cliques.iter().enumerate() {
                        let origin = BlockOrigin { clique: l, constraint: j, ts_clique: Some(t) };
                        blocks.push(raw_block(g, &basis, rows, format!("{name} t{}", t + 1), origin));
                    }
                }
                _ => {
                    let rows: Vec<usize> = (0..basis.len()).collect();
                    let origin = BlockOrigin { clique: l, constraint: j, ts_clique: None };
                    blocks.push(raw_block(g, &basis, &rows, name, origin));
                }
            }
        };
        push_blocks(None, None, 0);
        for (k, &j) in dec.ineq_groups[l].iter().enumerate() {
            push_blocks(Some(&pop.inequalities()[j]), Some(j), k);
        }
        for (k, &j) in dec.eq_groups[l].iter().enumerate() {
            let h = &pop.equalities()[j];
            let (basis, mask) = match cm {
                Some(cm) => (cm.equality[k].basis.clone(), Some(&cm.equality[k].mask)),
                None => (monomial_basis(vars, 2 * d - h.degree()).into_members(), None),
            };
            for (i, b) in basis.iter().enumerate() {
                if mask.is_some_and(|m| !m[i]) {
                    continue;
                }
                let terms: Vec<(Monomial, f64)> = h.terms().map(|(m, c)| (m.mul(b), c.to_f64())).collect();
                eqs.push((format!("c{} h{} [{}]", l + 1, j + 1, b.display_with(pop.variable_names())), terms));
            }
        }
    }

    // Positions: every monomial of a block or equality row, in graded order.
    let mut used: BTreeSet<Monomial> = BTreeSet::new();
    for b in &blocks {
        used.extend(b.entries.iter().map(|e| e.2.clone()));
    }
    for (_, terms) in &eqs {
        used.extend(terms.iter().map(|t| t.0.clone()));
    }
    for m in pop.objective().support() {
        if !m.is_one() && !used.contains(m) {
            return Err(Error::ObjectiveNotCovered { term: m.display_with(pop.variable_names()).to_string() });
        }
    }
    let moments = MomentSequence::from_monomials(used);
    let pos = |m: &Monomial| moments.position(m).expect("registered");

    let blocks: Vec<PsdBlock> = blocks
        .into_iter()
        .map(|b| {
            let mut entries: Vec<BlockEntry> =
                b.entries.iter().map(|(r, c, m, coef)| BlockEntry { row: *r, col: *c, pos: pos(m), coef: *coef }).collect();
            entries.sort_by_key(|e| (e.col, e.row, e.pos));
            let mut merged: Vec<BlockEntry> = Vec::with_capacity(entries.len());
            for e in entries {
                match merged.last_mut() {
                    Some(last) if (last.row, last.col, last.pos) == (e.row, e.col, e.pos) => last.coef += e.coef,
                    _ => merged.push(e),
                }
            }
            merged.retain(|e| e.coef != 0.0);
            PsdBlock { label: b.label, origin: b.origin, basis: b.basis, entries: merged }
        })
        .collect();
    let eq_rows = eqs
        .into_iter()
        .filter_map(|(label, terms)| {
            let form = LinearForm::from_terms(terms.iter().map(|(m, c)| (pos(m), *c)));
            (!form.is_zero()).then_some(EqRow { label, form })
        })
        .collect();
    let objective = LinearForm::from_terms(pop.objective().terms().map(|(m, c)| (pos(m), c.to_f64())));
    let meta = RelaxMeta {
        d,
        cliques: dec.cliques.clone(),
        ts_mode: masks.map(|m| m.mode.to_string()),
        sparse_order: masks.map(|m| m.iterations),
        partial: masks.is_some_and(|m| m.partial),
    };
    Ok(RelaxationProblem { nvars: pop.nvars(), moments, blocks, eq_rows, objective, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_pop;

    #[test]
    fn dmin_formula() {
        assert_eq!(compute_dmin(&parse_pop("vars x; min x^6;").unwrap()), 3);
        assert_eq!(compute_dmin(&parse_pop("vars x y; min x; s.t. x*y^2 == 0;").unwrap()), 2);
        assert_eq!(compute_dmin(&parse_pop("vars x; min x^2; s.t. x - 1 >= 0;").unwrap()), 1);
    }

    #[test]
    fn smallest_dense_case() {
        let pop = parse_pop("vars x; min x^2;").unwrap();
        let rp = assemble_dense(&pop, 1).unwrap();
        assert_eq!(rp.blocks.len(), 1);
        let y = [10.0, 20.0, 30.0];
        let m = rp.blocks[0].matrix(&y);
        assert_eq!(m, nalgebra::DMatrix::from_row_slice(2, 2, &[10.0, 20.0, 20.0, 30.0]));
        assert_eq!(rp.objective.terms, vec![(2, 1.0)]);
        assert!(rp.eq_rows.is_empty());
    }

    #[test]
    fn order_too_low() {
        let pop = parse_pop("vars x; min x^4;").unwrap();
        assert_eq!(assemble_dense(&pop, 1).unwrap_err(), Error::OrderTooLow { d: 1, d_min: 2 });
    }
}
