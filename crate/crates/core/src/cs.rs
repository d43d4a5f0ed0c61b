//! Correlative sparsity: the CSP graph, variable cliques and constraint
//! grouping.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_rip, chordal_cliques, is_subset, Extension, Graph};
use crate::poly::{Coefficient, Pop};

/// How variable cliques are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsMode {
    /// One clique holding every variable (the dense hierarchy).
    Non,
    /// Connected components of the CSP graph.
    Max,
    /// Minimum-degree chordal extension.
    Md,
    /// Minimum-fill chordal extension.
    Mf,
    /// User-supplied cliques.
    #[serde(rename = "self")]
    SelfDefined,
}

impl FromStr for CsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "non" | "none" => Ok(CsMode::Non),
            "max" => Ok(CsMode::Max),
            "md" => Ok(CsMode::Md),
            "mf" => Ok(CsMode::Mf),
            "self" => Ok(CsMode::SelfDefined),
            _ => Err(Error::InvalidOption(format!("unknown sparsity mode `{s}` (expected non, max, md, mf or self)"))),
        }
    }
}

impl fmt::Display for CsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CsMode::Non => "non",
            CsMode::Max => "max",
            CsMode::Md => "md",
            CsMode::Mf => "mf",
            CsMode::SelfDefined => "self",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsOption {
    pub mode: CsMode,
    /// Required iff `mode` is [`CsMode::SelfDefined`]; 0-based variable indices.
    pub self_cliques: Option<Vec<Vec<usize>>>,
}

impl CsOption {
    pub fn new(mode: CsMode) -> Self {
        Self { mode, self_cliques: None }
    }

    pub fn user(cliques: Vec<Vec<usize>>) -> Self {
        Self { mode: CsMode::SelfDefined, self_cliques: Some(cliques) }
    }
}

/// Variable cliques `I_l` with the constraints grouped under each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliqueDecomposition {
    /// Sorted 0-based variable indices per clique.
    pub cliques: Vec<Vec<usize>>,
    /// Indices into `Pop::inequalities` handled by each clique.
    pub ineq_groups: Vec<Vec<usize>>,
    /// Indices into `Pop::equalities` handled by each clique.
    pub eq_groups: Vec<Vec<usize>>,
    /// Whether the cliques satisfy the running intersection property.
    pub rip: bool,
    pub warnings: Vec<String>,
}

impl CliqueDecomposition {
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.cliques.iter().map(Vec::len).collect()
    }

    /// The single-clique decomposition over `n` variables.
    pub fn trivial<C: Coefficient>(pop: &Pop<C>) -> Self {
        Self {
            cliques: vec![(0..pop.nvars()).collect()],
            ineq_groups: vec![(0..pop.inequalities().len()).collect()],
            eq_groups: vec![(0..pop.equalities().len()).collect()],
            rip: true,
            warnings: Vec::new(),
        }
    }
}

/// The correlative sparsity pattern graph.
///
/// Vertices are variables; `x_i -- x_j` when both occur in one objective
/// term, or both occur in the same constraint.
pub fn build_csp_graph<C: Coefficient>(pop: &Pop<C>) -> Graph {
    let mut g = Graph::new(pop.nvars());
    let mut connect = |vars: &[usize]| {
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                g.add_edge(a, b);
            }
        }
    };
    for m in pop.objective().support() {
        connect(&m.vars().collect::<Vec<_>>());
    }
    for p in pop.inequalities().iter().chain(pop.equalities()) {
        connect(&p.vars().into_iter().collect::<Vec<_>>());
    }
    g
}

/// Computes variable cliques and assigns every constraint to the
/// lowest-index clique containing its variables.
pub fn decompose<C: Coefficient>(pop: &Pop<C>, opt: &CsOption) -> Result<CliqueDecomposition> {
    let n = pop.nvars();
    let mut warnings = Vec::new();
    let cliques = match opt.mode {
        CsMode::Non => vec![(0..n).collect()],
        CsMode::Max | CsMode::Md | CsMode::Mf => {
            let ext = match opt.mode {
                CsMode::Max => Extension::Max,
                CsMode::Md => Extension::MinDegree,
                _ => Extension::MinFill,
            };
            chordal_cliques(&build_csp_graph(pop), ext).1
        }
        CsMode::SelfDefined => {
            let user = opt
                .self_cliques
                .as_ref()
                .ok_or_else(|| Error::InvalidOption("user-defined cliques are required for mode `self`".into()))?;
            prune_user_cliques(user, n)?
        }
    };
    let names = pop.variable_names();
    let mut ineq_groups = vec![Vec::new(); cliques.len()];
    let mut eq_groups = vec![Vec::new(); cliques.len()];
    let constraints = pop
        .inequalities()
        .iter()
        .enumerate()
        .map(|(j, g)| (true, j, g))
        .chain(pop.equalities().iter().enumerate().map(|(j, h)| (false, j, h)));
    for (is_ineq, j, p) in constraints {
        let vars: Vec<usize> = p.vars().into_iter().collect();
        let home = cliques.iter().position(|c| vars.iter().all(|v| c.binary_search(v).is_ok()));
        let label = if is_ineq { format!("g{}", j + 1) } else { format!("h{}", j + 1) };
        match home {
            Some(l) if is_ineq => ineq_groups[l].push(j),
            Some(l) => eq_groups[l].push(j),
            None => {
                let shown: Vec<&str> = vars.iter().map(|&v| names[v].as_str()).collect();
                return Err(Error::CliqueCoverage {
                    constraint: label,
                    detail: format!("no clique contains all of {{{}}}", shown.join(", ")),
                });
            }
        }
    }
    for m in pop.objective().support() {
        let vars: Vec<usize> = m.vars().collect();
        if !cliques.iter().any(|c| vars.iter().all(|v| c.binary_search(v).is_ok())) {
            return Err(Error::ObjectiveNotCovered { term: m.display_with(names).to_string() });
        }
    }
    let rip = check_rip(&cliques);
    if !rip {
        let msg = "cliques violate the running intersection property; the relaxation is valid but convergence \
                   of the hierarchy is not guaranteed";
        log::warn!("{msg}");
        warnings.push(msg.to_string());
    }
    Ok(CliqueDecomposition { cliques, ineq_groups, eq_groups, rip, warnings })
}

// Sorts and dedups each clique, drops cliques contained in another and adds
// singletons for variables no clique mentions.
fn prune_user_cliques(user: &[Vec<usize>], n: usize) -> Result<Vec<Vec<usize>>> {
    let mut sets: Vec<Vec<usize>> = Vec::with_capacity(user.len());
    for c in user {
        let mut c = c.clone();
        c.sort_unstable();
        c.dedup();
        if let Some(&v) = c.iter().find(|&&v| v >= n) {
            return Err(Error::InvalidOption(format!("clique variable index {v} out of range for {n} variables")));
        }
        if c.is_empty() {
            continue;
        }
        sets.push(c);
    }
    let mut kept: Vec<Vec<usize>> = Vec::new();
    for (i, c) in sets.iter().enumerate() {
        let dominated = sets.iter().enumerate().any(|(k, o)| {
            k != i && is_subset(c, o) && (c.len() < o.len() || k < i)
        });
        if !dominated {
            kept.push(c.clone());
        }
    }
    let mut covered = vec![false; n];
    for c in &kept {
        for &v in c {
            covered[v] = true;
        }
    }
    kept.extend((0..n).filter(|&v| !covered[v]).map(|v| vec![v]));
    Ok(kept)
}

/// Converts cliques given by variable names to 0-based indices.
pub fn cliques_from_names<C: Coefficient>(pop: &Pop<C>, cliques: &[Vec<String>]) -> Result<Vec<Vec<usize>>> {
    cliques
        .iter()
        .map(|c| {
            c.iter()
                .map(|name| {
                    pop.variable_index(name)
                        .ok_or_else(|| Error::InvalidOption(format!("unknown variable `{name}` in clique list")))
                })
                .collect()
        })
        .collect()
}

/// Summary of a decomposition for humans and scripts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliqueReport {
    pub clique_count: usize,
    /// Clique size to number of cliques of that size.
    pub size_histogram: BTreeMap<usize, usize>,
    pub cliques: Vec<CliqueEntry>,
    pub rip: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliqueEntry {
    pub variables: Vec<String>,
    pub size: usize,
    /// 1-based inequality indices.
    pub inequalities: Vec<usize>,
    /// 1-based equality indices.
    pub equalities: Vec<usize>,
}

/// Builds the report; `names` labels the variables.
pub fn clique_report(dec: &CliqueDecomposition, names: &[String]) -> CliqueReport {
    let mut size_histogram = BTreeMap::new();
    for c in &dec.cliques {
        *size_histogram.entry(c.len()).or_insert(0) += 1;
    }
    let cliques = dec
        .cliques
        .iter()
        .zip(dec.ineq_groups.iter().zip(&dec.eq_groups))
        .map(|(c, (gi, ge))| CliqueEntry {
            variables: c.iter().map(|&v| names.get(v).cloned().unwrap_or_else(|| format!("x{}", v + 1))).collect(),
            size: c.len(),
            inequalities: gi.iter().map(|j| j + 1).collect(),
            equalities: ge.iter().map(|j| j + 1).collect(),
        })
        .collect();
    CliqueReport {
        clique_count: dec.cliques.len(),
        size_histogram,
        cliques,
        rip: dec.rip,
        warnings: dec.warnings.clone(),
    }
}

impl CliqueReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} clique(s), RIP {}", self.clique_count, if self.rip { "holds" } else { "fails" });
        let hist: Vec<String> = self.size_histogram.iter().map(|(s, c)| format!("{c}x{s}")).collect();
        let _ = writeln!(out, "sizes: {}", hist.join(", "));
        for (i, c) in self.cliques.iter().enumerate() {
            let _ = writeln!(
                out,
                "  [{}] {{{}}}  ineq: {}  eq: {}",
                i + 1,
                c.variables.join(", "),
                c.inequalities.len(),
                c.equalities.len()
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_pop;

    #[test]
    fn csp_edges_follow_terms() {
        let p = parse_pop("vars a b c; min a^2 + b^2;").unwrap();
        assert_eq!(build_csp_graph(&p).edge_count(), 0);
        let p = parse_pop("vars a b c; min a*b*c;").unwrap();
        assert_eq!(build_csp_graph(&p).edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn non_is_single_clique() {
        let p = parse_pop("vars a b; min a; s.t. b >= 0; a*b == 0;").unwrap();
        let dec = decompose(&p, &CsOption::new(CsMode::Non)).unwrap();
        assert_eq!(dec, CliqueDecomposition::trivial(&p));
        let report = clique_report(&dec, p.variable_names());
        assert_eq!(report.size_histogram, BTreeMap::from([(2, 1)]));
    }

    #[test]
    fn user_cliques_are_validated() {
        let p = parse_pop("vars a b c; min a*b + c; s.t. b*c >= 0;").unwrap();
        let err = decompose(&p, &CsOption::user(vec![vec![0, 1], vec![2]])).unwrap_err();
        assert!(matches!(err, Error::CliqueCoverage { constraint, .. } if constraint == "g1"));
        let err = decompose(&p, &CsOption::user(vec![vec![0], vec![1, 2]])).unwrap_err();
        assert!(matches!(err, Error::ObjectiveNotCovered { .. }));
        let dec = decompose(&p, &CsOption::user(vec![vec![1, 0], vec![1, 2], vec![2]])).unwrap();
        assert_eq!(dec.cliques, vec![vec![0, 1], vec![1, 2]]);
        assert_eq!(dec.ineq_groups, vec![vec![], vec![0]]);
    }

    #[test]
    fn modes_parse() {
        assert_eq!("MD".parse::<CsMode>().unwrap(), CsMode::Md);
        assert!("xyz".parse::<CsMode>().is_err());
    }
}
