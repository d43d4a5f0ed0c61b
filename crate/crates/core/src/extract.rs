//! Minimizer extraction from solved moment vectors.
//!
//! Both schemes work clique by clique on the moment matrix of the clique's
//! variables and average shared variables across cliques.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{monomial_basis, Coefficient, Monomial, Pop};
use crate::relax::RelaxationProblem;
use crate::sdp::psd::sorted_eigen;
use crate::sdp::suboptimality_gap;

/// Relative eigenvalue cut defining numerical rank.
pub const RANK_TOL: f64 = 1e-6;
/// Absolute spread of a shared variable above which a warning is recorded.
pub const SPREAD_WARN: f64 = 0.1;
const SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Robust,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Coordinates over the clique's variables, in clique order.
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub point: Vec<f64>,
    pub per_clique_atoms: Vec<Vec<Atom>>,
    pub method: Method,
    /// Largest difference between clique estimates of a shared variable.
    pub spread: f64,
    pub feasibility_residual: f64,
    pub objective_at_point: f64,
    /// Set when the robust scheme fell back to the naive one.
    pub fell_back: bool,
    pub warnings: Vec<String>,
}

impl ExtractionResult {
    /// JSON record with named coordinates.
    pub fn to_json(&self, names: &[String], cliques: &[Vec<usize>]) -> serde_json::Value {
        let point: serde_json::Map<String, serde_json::Value> =
            names.iter().cloned().zip(self.point.iter().map(|&v| serde_json::json!(v))).collect();
        serde_json::json!({
            "method": self.method,
            "point": point,
            "cliques": cliques.iter().zip(&self.per_clique_atoms).map(|(c, atoms)| serde_json::json!({
                "variables": c.iter().map(|&i| names[i].clone()).collect::<Vec<_>>(),
                "atoms": atoms,
            })).collect::<Vec<_>>(),
            "spread": self.spread,
            "feasibility_residual": self.feasibility_residual,
            "objective_at_point": self.objective_at_point,
            "fell_back": self.fell_back,
            "warnings": self.warnings,
        })
    }
}

// Moment matrix over `basis`, with entries missing from the relaxation
// filled by the rank-one value built from the first-order moments.
fn moment_matrix(rp: &RelaxationProblem, y: &[f64], basis: &[Monomial], shift: Option<usize>) -> DMatrix<f64> {
    let means: Vec<f64> = (0..rp.nvars)
        .map(|i| rp.moments.position(&Monomial::var(i)).map_or(0.0, |p| y[p]))
        .collect();
    let value = |m: &Monomial| match rp.moments.position(m) {
        Some(p) => y[p],
        None => m.eval(&means),
    };
    let n = basis.len();
    let mut out = DMatrix::zeros(n, n);
    let sv = shift.map(Monomial::var);
    for i in 0..n {
        for j in i..n {
            let mut m = basis[i].mul(&basis[j]);
            if let Some(s) = &sv {
                m = m.mul(s);
            }
            let v = value(&m);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

fn naive_atom(rp: &RelaxationProblem, y: &[f64], l: usize, vars: &[usize]) -> Result<Atom> {
    let basis = monomial_basis(vars, 1).into_members();
    let m = moment_matrix(rp, y, &basis, None);
    let (vals, vecs) = sorted_eigen(&m);
    let top = vals[0];
    // Project e₀ onto the top eigenspace so that ties have a canonical answer.
    let mut v = DVector::zeros(basis.len());
    for k in 0..vals.len() {
        if vals[k] >= top - 1e-9 * top.abs().max(1.0) {
            let q = vecs.column(k);
            v += q[0] * q;
        }
    }
    let c = v[0];
    if c.abs() < 1e-8 {
        return Err(Error::DegenerateNormalization { clique: l, value: c });
    }
    Ok(Atom { point: (1..basis.len()).map(|i| v[i] / c).collect(), weight: 1.0 })
}

struct CliqueAtoms {
    atoms: Vec<Atom>,
    warning: Option<String>,
}

fn robust_atoms(rp: &RelaxationProblem, y: &[f64], l: usize, vars: &[usize]) -> Option<CliqueAtoms> {
    let d = rp.meta.d;
    if d < 2 {
        return None;
    }
    let basis = monomial_basis(vars, d - 1).into_members();
    let m = moment_matrix(rp, y, &basis, None);
    let (vals, vecs) = sorted_eigen(&m);
    let top = vals[0];
    if !(top > 0.0) {
        return None;
    }
    let r = vals.iter().take_while(|&&v| v > RANK_TOL * top).count();
    // L⁺ = Λ^{-1/2} Vᵀ restricted to the numerical range.
    let mut lp = DMatrix::zeros(r, basis.len());
    for k in 0..r {
        let s = 1.0 / vals[k].sqrt();
        for i in 0..basis.len() {
            lp[(k, i)] = s * vecs[(i, k)];
        }
    }
    let mults: Vec<DMatrix<f64>> = vars
        .iter()
        .map(|&v| {
            let mv = moment_matrix(rp, y, &basis, Some(v));
            let x = &lp * mv * lp.transpose();
            0.5 * (&x + x.transpose())
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + l as u64);
    let coeffs: Vec<f64> = vars.iter().map(|_| rng.gen_range(0.5..1.5)).collect();
    let mut comb = DMatrix::zeros(r, r);
    for (c, x) in coeffs.iter().zip(&mults) {
        comb += *c * x;
    }
    let (_, q) = sorted_eigen(&comb);
    // Coordinates of the constant monomial in the GNS space.
    let s: DVector<f64> = DVector::from_iterator(r, (0..r).map(|k| vals[k].sqrt() * vecs[(0, k)]));
    let mut atoms = Vec::with_capacity(r);
    let mut commute = 0.0f64;
    for k in 0..r {
        let qk = q.column(k);
        let point: Vec<f64> = mults.iter().map(|x| (qk.transpose() * x * qk)[(0, 0)]).collect();
        let weight = qk.dot(&s).powi(2);
        for x in &mults {
            let xq = x * qk;
            let lam = qk.dot(&xq);
            commute = commute.max((xq - lam * qk).norm());
        }
        if point.iter().any(|v| !v.is_finite()) || !weight.is_finite() {
            return None;
        }
        atoms.push(Atom { point, weight });
    }
    let warning = (commute > 1e-3).then(|| {
        format!("clique {}: multiplication matrices do not commute (error {commute:.2e}); the moment matrix is not flat", l + 1)
    });
    Some(CliqueAtoms { atoms, warning })
}

fn highest_weight(atoms: &[Atom]) -> &Atom {
    let mut best = &atoms[0];
    for a in &atoms[1..] {
        let tie = (a.weight - best.weight).abs() <= 1e-9;
        let larger = a.point.iter().zip(&best.point).find(|(x, y)| x != y).is_some_and(|(x, y)| x > y);
        if (!tie && a.weight > best.weight) || (tie && larger) {
            best = a;
        }
    }
    best
}

// Averages clique estimates per variable; the sum runs in sorted order so
// the result does not depend on the order of cliques.
fn average(nvars: usize, cliques: &[Vec<usize>], estimates: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let mut per_var: Vec<Vec<f64>> = vec![Vec::new(); nvars];
    for (vars, est) in cliques.iter().zip(estimates) {
        for (&v, &x) in vars.iter().zip(est) {
            per_var[v].push(x);
        }
    }
    let mut spread = 0.0f64;
    let point = per_var
        .iter_mut()
        .map(|vals| {
            if vals.is_empty() {
                return 0.0;
            }
            vals.sort_by(f64::total_cmp);
            spread = spread.max(vals[vals.len() - 1] - vals[0]);
            vals.iter().sum::<f64>() / vals.len() as f64
        })
        .collect();
    (point, spread)
}

fn finish<C: Coefficient>(
    pop: &Pop<C>,
    rp: &RelaxationProblem,
    per_clique_atoms: Vec<Vec<Atom>>,
    chosen: Vec<Vec<f64>>,
    method: Method,
    fell_back: bool,
    mut warnings: Vec<String>,
) -> ExtractionResult {
    let (point, spread) = average(pop.nvars(), &rp.meta.cliques, &chosen);
    if spread > SPREAD_WARN {
        let w = format!("shared variables disagree across cliques by {spread:.3e}");
        log::warn!("{w}");
        warnings.push(w);
    }
    ExtractionResult {
        feasibility_residual: pop.feasibility_residual(&point),
        objective_at_point: pop.objective().eval(&point),
        point,
        per_clique_atoms,
        method,
        spread,
        fell_back,
        warnings,
    }
}

fn check_shape<C: Coefficient>(pop: &Pop<C>, rp: &RelaxationProblem, y: &[f64]) -> Result<()> {
    if y.len() != rp.npositions() {
        return Err(Error::DimensionMismatch { left: y.len(), right: rp.npositions() });
    }
    if pop.nvars() != rp.nvars {
        return Err(Error::DimensionMismatch { left: pop.nvars(), right: rp.nvars });
    }
    Ok(())
}

/// Per clique: top eigenvector of the degree-≤1 moment submatrix, scaled to
/// a unit constant entry; shared variables are averaged.
pub fn extract_naive<C: Coefficient>(pop: &Pop<C>, rp: &RelaxationProblem, y: &[f64]) -> Result<ExtractionResult> {
    check_shape(pop, rp, y)?;
    let atoms = rp
        .meta
        .cliques
        .par_iter()
        .enumerate()
        .map(|(l, vars)| naive_atom(rp, y, l, vars))
        .collect::<Result<Vec<_>>>()?;
    let chosen = atoms.iter().map(|a| a.point.clone()).collect();
    Ok(finish(pop, rp, atoms.into_iter().map(|a| vec![a]).collect(), chosen, Method::Naive, false, Vec::new()))
}

/// Per clique: atoms from the multiplication operators on the column space
/// of the order `d − 1` moment matrix, jointly diagonalized through a fixed
/// random combination; the highest-weight atom is kept and shared variables
/// are averaged. Falls back to [`extract_naive`] when no operator can be
/// built.
pub fn extract_robust<C: Coefficient>(pop: &Pop<C>, rp: &RelaxationProblem, y: &[f64]) -> Result<ExtractionResult> {
    check_shape(pop, rp, y)?;
    let found: Vec<Option<CliqueAtoms>> =
        rp.meta.cliques.par_iter().enumerate().map(|(l, vars)| robust_atoms(rp, y, l, vars)).collect();
    if found.iter().any(Option::is_none) {
        let mut res = extract_naive(pop, rp, y)?;
        res.fell_back = true;
        res.warnings.insert(0, "robust extraction unavailable; used the naive scheme".into());
        log::warn!("robust extraction fell back to the naive scheme");
        return Ok(res);
    }
    let found: Vec<CliqueAtoms> = found.into_iter().flatten().collect();
    let warnings = found.iter().filter_map(|c| c.warning.clone()).collect();
    let chosen = found.iter().map(|c| highest_weight(&c.atoms).point.clone()).collect();
    let atoms = found.into_iter().map(|c| c.atoms).collect();
    Ok(finish(pop, rp, atoms, chosen, Method::Robust, false, warnings))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub feasible: bool,
    pub lower: f64,
    /// `f(x̂)` when the point is feasible.
    pub upper: Option<f64>,
    pub eta_g: Option<f64>,
    pub residual: f64,
}

/// Certifies an extracted point: when it satisfies the constraints to `tol`,
/// `f(x̂)` is an upper bound and `η_g` measures the gap to `lower`.
pub fn certify<C: Coefficient>(pop: &Pop<C>, lower: f64, result: &ExtractionResult, tol: f64) -> Certificate {
    let residual = result.feasibility_residual;
    if residual <= tol {
        let upper = pop.objective().eval(&result.point);
        Certificate { feasible: true, lower, upper: Some(upper), eta_g: Some(suboptimality_gap(lower, upper)), residual }
    } else {
        Certificate { feasible: false, lower, upper: None, eta_g: None, residual }
    }
}
