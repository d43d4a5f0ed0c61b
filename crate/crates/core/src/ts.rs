//! Term sparsity: the support set, TSP graphs and binary masks on moment,
//! localizing and equality multiplier blocks.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cs::{CliqueDecomposition, CsMode};
use crate::error::{Error, Result};
use crate::graph::{chordal_cliques, Extension, Graph};
use crate::poly::{monomial_basis, Coefficient, Monomial, Polynomial, Pop};

/// Term sparsity modes share the names of the correlative ones.
pub type TsMode = CsMode;

/// A user-chosen sub-basis for one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfBasis {
    /// Clique index `l` (0-based).
    pub clique: usize,
    /// `None` for the moment matrix, `Some(j)` for inequality `j` (0-based).
    pub constraint: Option<usize>,
    pub monomials: Vec<Monomial>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TsOption {
    pub mode: TsMode,
    /// Sparse order `k >= 1`: number of support/chordal extension rounds.
    pub sparse_order: usize,
    /// Mask only moment and localizing matrices; equality multipliers stay
    /// dense.
    pub partial: bool,
    /// Sub-bases for [`TsMode::SelfDefined`]. Blocks without an entry stay
    /// dense.
    pub self_bases: Vec<SelfBasis>,
    /// Let equality masks also accept monomials through the even-exponent
    /// rule. Off by default: equality masks test only explicitly stored
    /// support monomials.
    pub eq_even_closure: bool,
}

impl Default for TsOption {
    fn default() -> Self {
        Self { mode: TsMode::Non, sparse_order: 1, partial: false, self_bases: Vec::new(), eq_even_closure: false }
    }
}

impl TsOption {
    pub fn new(mode: TsMode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn with_sparse_order(mut self, k: usize) -> Self {
        self.sparse_order = k;
        self
    }

    pub fn with_partial(mut self, partial: bool) -> Self {
        self.partial = partial;
        self
    }
}

/// The set `𝒜` of monomials appearing in the problem, plus every monomial
/// whose exponents are all even (tested by rule, never stored).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    members: BTreeSet<Monomial>,
}

impl SupportSet {
    pub fn contains(&self, m: &Monomial) -> bool {
        m.is_even() || self.members.contains(m)
    }

    /// Membership in the explicitly stored part only.
    pub fn contains_stored(&self, m: &Monomial) -> bool {
        self.members.contains(m)
    }

    pub fn insert(&mut self, m: Monomial) -> bool {
        self.members.insert(m)
    }

    pub fn members(&self) -> &BTreeSet<Monomial> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `supp(f) ∪ supp(g_j) ∪ supp(h_j)`, with the even rule implicit.
pub fn build_support_set<C: Coefficient>(pop: &Pop<C>) -> SupportSet {
    let mut set = SupportSet::default();
    let polys = std::iter::once(pop.objective()).chain(pop.inequalities()).chain(pop.equalities());
    for p in polys {
        for m in p.support() {
            set.insert(m.clone());
        }
    }
    set
}

/// Mask of a moment (`constraint = None`) or localizing matrix.
///
/// `graph` is the chordal TSP graph; entry `(r, c)` is unmasked iff `r == c`
/// or `graph` has the edge. `ts_cliques` are its maximal cliques.
#[derive(Clone, Debug, PartialEq)]
pub struct IneqMask {
    pub clique: usize,
    pub constraint: Option<usize>,
    pub basis: Vec<Monomial>,
    /// The support-extension graph before chordal extension.
    pub support: Graph,
    pub graph: Graph,
    pub ts_cliques: Vec<Vec<usize>>,
}

impl IneqMask {
    fn dense(clique: usize, constraint: Option<usize>, basis: Vec<Monomial>) -> Self {
        let n = basis.len();
        Self {
            clique,
            constraint,
            basis,
            support: Graph::complete(n),
            graph: Graph::complete(n),
            ts_cliques: vec![(0..n).collect()],
        }
    }

    pub fn is_unmasked(&self, r: usize, c: usize) -> bool {
        r == c || self.graph.has_edge(r, c)
    }

    /// True when nothing is masked.
    pub fn is_full(&self) -> bool {
        self.ts_cliques.len() == 1 && self.ts_cliques[0].len() == self.basis.len()
    }

    /// The binary matrix `B^g`.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        let n = self.basis.len();
        (0..n).map(|r| (0..n).map(|c| u8::from(self.is_unmasked(r, c))).collect()).collect()
    }

    /// Graphviz rendering of the TSP graph; fill edges are dashed.
    pub fn to_dot(&self, names: &[String]) -> String {
        let labels: Vec<String> = self.basis.iter().map(|m| m.display_with(names).to_string()).collect();
        let fill = self.graph.added_edges(&self.support);
        self.graph.to_dot(&labels, &self.ts_cliques, &fill)
    }
}

/// Mask `B^h` of an equality multiplier vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EqMask {
    pub clique: usize,
    pub constraint: usize,
    pub basis: Vec<Monomial>,
    pub mask: Vec<bool>,
}

impl EqMask {
    pub fn vector(&self) -> Vec<u8> {
        self.mask.iter().map(|&b| u8::from(b)).collect()
    }
}

/// All masks of one clique.
#[derive(Clone, Debug, PartialEq)]
pub struct CliqueMasks {
    pub moment: IneqMask,
    /// One per inequality in the clique's group, same order.
    pub localizing: Vec<IneqMask>,
    /// One per equality in the clique's group, same order.
    pub equality: Vec<EqMask>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaskSet {
    pub d: u32,
    pub mode: TsMode,
    pub partial: bool,
    pub cliques: Vec<CliqueMasks>,
    /// Sparse order actually computed (stops early at a fixpoint).
    pub iterations: usize,
    /// Whether the last round left the support set unchanged.
    pub fixpoint: bool,
    pub support: SupportSet,
}

/// Relaxation degree of inequality `g`: `⌈deg g / 2⌉`.
pub fn ineq_degree<C: Coefficient>(g: &Polynomial<C>) -> u32 {
    g.degree().div_ceil(2)
}

fn localizing_basis<C: Coefficient>(g: Option<&Polynomial<C>>, vars: &[usize], d: u32) -> Vec<Monomial> {
    let dj = g.map_or(0, ineq_degree);
    monomial_basis(vars, d.saturating_sub(dj)).into_members()
}

fn equality_basis<C: Coefficient>(h: &Polynomial<C>, vars: &[usize], d: u32) -> Vec<Monomial> {
    monomial_basis(vars, (2 * d).saturating_sub(h.degree())).into_members()
}

/// The TSP graph of `g_j` on clique `l` (`j = None` for `g_0 = 1`): nodes
/// are the basis `[x(I_l)]_{d - d_j}` and `β -- γ` when some monomial of
/// `g_j · x^β · x^γ` lies in `support`.
pub fn support_extension_ineq<C: Coefficient>(
    pop: &Pop<C>,
    dec: &CliqueDecomposition,
    support: &SupportSet,
    d: u32,
    l: usize,
    j: Option<usize>,
) -> Graph {
    let g = j.map(|j| &pop.inequalities()[j]);
    let basis = localizing_basis(g, &dec.cliques[l], d);
    tsp_graph(g, &basis, support)
}

fn tsp_graph<C: Coefficient>(g: Option<&Polynomial<C>>, basis: &[Monomial], support: &SupportSet) -> Graph {
    let mut graph = Graph::new(basis.len());
    for (r, a) in basis.iter().enumerate() {
        for (c, b) in basis.iter().enumerate().skip(r + 1) {
            let ab = a.mul(b);
            let hit = match g {
                None => support.contains(&ab),
                Some(g) => g.support().any(|m| support.contains(&m.mul(&ab))),
            };
            if hit {
                graph.add_edge(r, c);
            }
        }
    }
    graph
}

fn extension_for(mode: TsMode) -> Extension {
    match mode {
        TsMode::Max => Extension::Max,
        TsMode::Mf => Extension::MinFill,
        _ => Extension::MinDegree,
    }
}

fn ineq_mask<C: Coefficient>(
    g: Option<&Polynomial<C>>,
    basis: Vec<Monomial>,
    support: &SupportSet,
    mode: TsMode,
    clique: usize,
    constraint: Option<usize>,
) -> IneqMask {
    let sgraph = tsp_graph(g, &basis, support);
    let (graph, ts_cliques) = chordal_cliques(&sgraph, extension_for(mode));
    IneqMask { clique, constraint, basis, support: sgraph, graph, ts_cliques }
}

fn self_mask(clique: usize, constraint: Option<usize>, basis: Vec<Monomial>, listed: &[Monomial]) -> Result<IneqMask> {
    let mut rows = Vec::with_capacity(listed.len());
    for m in listed {
        match basis.binary_search(m) {
            Ok(r) => rows.push(r),
            Err(_) => {
                return Err(Error::InvalidOption(format!(
                    "user basis monomial {m} is not in the degree-{} basis of clique {}",
                    basis.last().map_or(0, Monomial::degree),
                    clique + 1
                )))
            }
        }
    }
    rows.sort_unstable();
    rows.dedup();
    let mut graph = Graph::new(basis.len());
    for (i, &a) in rows.iter().enumerate() {
        for &b in &rows[i + 1..] {
            graph.add_edge(a, b);
        }
    }
    let mut ts_cliques = vec![rows.clone()];
    ts_cliques.extend((0..basis.len()).filter(|r| rows.binary_search(r).is_err()).map(|r| vec![r]));
    Ok(IneqMask { clique, constraint, basis, support: graph.clone(), graph, ts_cliques })
}

// Masks for one clique from the current support set.
fn clique_masks<C: Coefficient>(
    pop: &Pop<C>,
    dec: &CliqueDecomposition,
    ts: &TsOption,
    support: &SupportSet,
    d: u32,
    l: usize,
) -> Result<CliqueMasks> {
    let vars = &dec.cliques[l];
    let make = |j: Option<usize>| -> Result<IneqMask> {
        let g = j.map(|j| &pop.inequalities()[j]);
        let basis = localizing_basis(g, vars, d);
        match ts.mode {
            TsMode::Non => Ok(IneqMask::dense(l, j, basis)),
            TsMode::SelfDefined => match ts.self_bases.iter().find(|b| b.clique == l && b.constraint == j) {
                Some(sb) => self_mask(l, j, basis, &sb.monomials),
                None => Ok(IneqMask::dense(l, j, basis)),
            },
            mode => Ok(ineq_mask(g, basis, support, mode, l, j)),
        }
    };
    let moment = make(None)?;
    let localizing = dec.ineq_groups[l].iter().map(|&j| make(Some(j))).collect::<Result<Vec<_>>>()?;
    let dense_eq = ts.partial || matches!(ts.mode, TsMode::Non | TsMode::SelfDefined);
    let equality = dec.eq_groups[l]
        .iter()
        .map(|&j| {
            let h = &pop.equalities()[j];
            let basis = equality_basis(h, vars, d);
            let mask = basis
                .iter()
                .map(|b| {
                    dense_eq
                        || h.support().any(|m| {
                            let t = m.mul(b);
                            if ts.eq_even_closure {
                                support.contains(&t)
                            } else {
                                support.contains_stored(&t)
                            }
                        })
                })
                .collect();
            EqMask { clique: l, constraint: j, basis, mask }
        })
        .collect();
    Ok(CliqueMasks { moment, localizing, equality })
}

// Adds the supports of every unmasked entry; returns whether anything new
// was stored.
fn augment<C: Coefficient>(pop: &Pop<C>, masks: &[CliqueMasks], support: &mut SupportSet) -> bool {
    let mut changed = false;
    for cm in masks {
        for mask in std::iter::once(&cm.moment).chain(&cm.localizing) {
            let g = mask.constraint.map(|j| &pop.inequalities()[j]);
            let n = mask.basis.len();
            for r in 0..n {
                for c in r..n {
                    if !mask.is_unmasked(r, c) {
                        continue;
                    }
                    let rc = mask.basis[r].mul(&mask.basis[c]);
                    match g {
                        None => changed |= support.insert(rc),
                        Some(g) => {
                            for m in g.support() {
                                changed |= support.insert(m.mul(&rc));
                            }
                        }
                    }
                }
            }
        }
        for em in &cm.equality {
            let h = &pop.equalities()[em.constraint];
            for (b, _) in em.basis.iter().zip(&em.mask).filter(|(_, &on)| on) {
                for m in h.support() {
                    changed |= support.insert(m.mul(b));
                }
            }
        }
    }
    changed
}

/// Builds all masks at relaxation order `d`, iterating support and chordal
/// extension up to `ts.sparse_order` rounds or until a fixpoint.
pub fn build_masks<C: Coefficient>(
    pop: &Pop<C>,
    dec: &CliqueDecomposition,
    ts: &TsOption,
    d: u32,
) -> Result<MaskSet> {
    if ts.sparse_order == 0 {
        return Err(Error::InvalidOption("sparse order must be at least 1".into()));
    }
    if ts.mode == TsMode::SelfDefined {
        if let Some(b) = ts.self_bases.iter().find(|b| b.clique >= dec.len()) {
            return Err(Error::InvalidOption(format!("user basis refers to clique {} of {}", b.clique + 1, dec.len())));
        }
    }
    let mut support = build_support_set(pop);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let cliques = (0..dec.len())
            .into_par_iter()
            .map(|l| clique_masks(pop, dec, ts, &support, d, l))
            .collect::<Result<Vec<_>>>()?;
        let iterative = !matches!(ts.mode, TsMode::Non | TsMode::SelfDefined);
        let mut next = support.clone();
        let fixpoint = !iterative || !augment(pop, &cliques, &mut next);
        if iterations >= ts.sparse_order || fixpoint {
            return Ok(MaskSet { d, mode: ts.mode, partial: ts.partial, cliques, iterations, fixpoint, support });
        }
        support = next;
    }
}

/// The rows of the clique-`l` moment mask that interact with another row,
/// plus the constant monomial: the basis the moment matrix effectively uses.
pub fn reduced_basis(masks: &MaskSet, l: usize) -> Vec<Monomial> {
    let mask = &masks.cliques[l].moment;
    let mut rows: BTreeSet<usize> = mask.ts_cliques.iter().filter(|c| c.len() > 1).flatten().copied().collect();
    rows.insert(0);
    rows.into_iter().map(|r| mask.basis[r].clone()).collect()
}

/// JSON record of one mask, for dumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskRecord {
    pub d: u32,
    /// 1-based clique index.
    pub clique: usize,
    /// `moment`, `localizing` or `equality`.
    pub kind: String,
    /// 1-based constraint index, absent for the moment matrix.
    pub constraint: Option<usize>,
    pub basis: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<u8>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ts_cliques: Option<Vec<Vec<usize>>>,
}

impl MaskSet {
    /// Flat list of mask records with monomials rendered through `names`.
    pub fn records(&self, names: &[String]) -> Vec<MaskRecord> {
        let show = |b: &[Monomial]| b.iter().map(|m| m.display_with(names).to_string()).collect::<Vec<_>>();
        let mut out = Vec::new();
        for cm in &self.cliques {
            for mask in std::iter::once(&cm.moment).chain(&cm.localizing) {
                out.push(MaskRecord {
                    d: self.d,
                    clique: mask.clique + 1,
                    kind: if mask.constraint.is_some() { "localizing" } else { "moment" }.into(),
                    constraint: mask.constraint.map(|j| j + 1),
                    basis: show(&mask.basis),
                    matrix: Some(mask.matrix()),
                    vector: None,
                    ts_cliques: Some(mask.ts_cliques.clone()),
                });
            }
            for em in &cm.equality {
                out.push(MaskRecord {
                    d: self.d,
                    clique: em.clique + 1,
                    kind: "equality".into(),
                    constraint: Some(em.constraint + 1),
                    basis: show(&em.basis),
                    matrix: None,
                    vector: Some(em.vector()),
                    ts_cliques: None,
                });
            }
        }
        out
    }
}
