//! Block SDP solving by ADMM, KKT residuals and SDPA files.

mod admm;
mod kkt;
pub mod psd;
mod sdpa;

use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relax::{dualize, RelaxationProblem};
use admm::{solve_conic, ConicProblem, SparseRows};
pub use kkt::kkt_residual;
use psd::{smat, svec_index, svec_len};
pub use sdpa::{export_sdpa, import_sdpa, SdpaBlock, SdpaProblem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub eps_abs: f64,
    pub eps_rel: f64,
    /// Initial penalty.
    pub rho: f64,
    pub adaptive_rho: bool,
    /// Ruiz equilibration.
    pub scaling: bool,
    /// Over-relaxation factor in `(0, 2)`.
    pub alpha: f64,
    /// Proximal weight on variables that enter a cone.
    pub prox: f64,
    pub check_every: usize,
    /// Log progress every this many iterations (0 disables).
    pub log_every: usize,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            eps_abs: 1e-7,
            eps_rel: 1e-6,
            rho: 1.0,
            adaptive_rho: true,
            scaling: true,
            alpha: 1.6,
            prox: 1e-6,
            check_every: 10,
            log_every: 500,
            time_limit: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidOption(m.into()));
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.eps_abs > 0.0 && self.eps_rel > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.rho > 0.0) {
            return bad("rho must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return bad("alpha must lie in (0, 2)");
        }
        if !(self.prox > 0.0) {
            return bad("prox must be positive");
        }
        if self.check_every == 0 {
            return bad("check_every must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    MaxIters,
    InfeasibleHeuristic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// Which form was handed to the solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Moment,
    Sos,
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "moment" => Ok(Side::Moment),
            "sos" => Ok(Side::Sos),
            _ => Err(Error::InvalidOption(format!("unknown side `{s}` (expected moment or sos)"))),
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Moment => "moment",
            Side::Sos => "sos",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub side: Side,
    /// Moment vector over the registered positions, `y_0 = 1`.
    pub y_values: Vec<f64>,
    /// `A_k(y)` per block.
    pub block_matrices: Vec<DMatrix<f64>>,
    /// Dual PSD matrices `Z_k` (Gram matrices on the SOS side).
    pub dual_blocks: Vec<DMatrix<f64>>,
    /// Multipliers `ν_r` of the equality rows.
    pub eq_multipliers: Vec<f64>,
    /// The SOS bound `t`.
    pub dual_value: f64,
    /// The lower bound reported for this relaxation.
    pub objective_value: f64,
    pub residuals: Residuals,
    pub kkt_max: f64,
    pub status: Status,
    pub iterations: usize,
    pub solve_seconds: f64,
}

/// `η_g = |lower − upper| / (1 + |lower| + |upper|)`.
pub fn suboptimality_gap(lower: f64, upper: f64) -> f64 {
    (lower - upper).abs() / (1.0 + lower.abs() + upper.abs())
}

fn check_problem(rp: &RelaxationProblem) -> Result<()> {
    if rp.blocks.is_empty() {
        return Err(Error::InvalidProblem("relaxation has no PSD block".into()));
    }
    Ok(())
}

fn svec_rows(rp: &RelaxationProblem) -> SparseRows {
    let mut rows = Vec::new();
    for b in &rp.blocks {
        let base = rows.len();
        rows.extend(std::iter::repeat_with(Vec::new).take(svec_len(b.size())));
        for e in &b.entries {
            let w = if e.row == e.col { e.coef } else { std::f64::consts::SQRT_2 * e.coef };
            rows[base + svec_index(e.row, e.col)].push((e.pos, w));
        }
    }
    rows
}

fn split_cones(v: &[f64], sizes: &[usize]) -> Vec<DMatrix<f64>> {
    let mut off = 0;
    sizes
        .iter()
        .map(|&s| {
            let m = smat(&v[off..off + svec_len(s)], s);
            off += svec_len(s);
            m
        })
        .collect()
}

fn finish(rp: &RelaxationProblem, mut sol: SdpSolution) -> SdpSolution {
    sol.block_matrices = rp.blocks.iter().map(|b| b.matrix(&sol.y_values)).collect();
    sol.kkt_max = kkt_residual(rp, &sol);
    sol
}

/// Solves the moment side: `min L_y(f)` over `y_0 = 1`, PSD blocks and
/// equality rows. The reported bound is the dual value `t`.
pub fn solve(rp: &RelaxationProblem, cfg: &SolverConfig) -> Result<SdpSolution> {
    check_problem(rp)?;
    cfg.validate()?;
    let start = Instant::now();
    let n = rp.npositions();
    let mut c = vec![0.0; n];
    for &(p, v) in &rp.objective.terms {
        c[p] = v;
    }
    let mut a: SparseRows = vec![vec![(0, 1.0)]];
    let mut b = vec![1.0];
    for row in &rp.eq_rows {
        a.push(row.form.terms.clone());
        b.push(0.0);
    }
    let sizes = rp.block_sizes();
    let problem = ConicProblem { n, c, a, b, g: svec_rows(rp), cones: sizes.clone() };
    let res = solve_conic(&problem, cfg)?;
    let dual_blocks = split_cones(&res.lambda.iter().map(|l| -l).collect::<Vec<_>>(), &sizes);
    let t = -res.mu[0];
    let sol = SdpSolution {
        side: Side::Moment,
        y_values: res.x,
        block_matrices: Vec::new(),
        dual_blocks,
        eq_multipliers: res.mu[1..].iter().map(|m| -m).collect(),
        dual_value: t,
        objective_value: t,
        residuals: Residuals { primal: res.primal, dual: res.dual, gap: res.gap },
        kkt_max: 0.0,
        status: res.status,
        iterations: res.iterations,
        solve_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(finish(rp, sol))
}

/// Solves the SOS side: `max t` such that `f − t` equals a combination of
/// Gram matrices and equality multipliers. Moments are recovered from the
/// multipliers of the coefficient equations.
pub fn solve_sos(rp: &RelaxationProblem, cfg: &SolverConfig) -> Result<SdpSolution> {
    check_problem(rp)?;
    cfg.validate()?;
    let start = Instant::now();
    let sos = dualize(rp);
    let sizes = sos.gram_sizes.clone();
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += svec_len(s);
            Some(o)
        })
        .collect();
    let ngram: usize = sizes.iter().map(|&s| svec_len(s)).sum();
    let n = ngram + sos.multipliers;
    let coeff = |k: usize, r: usize, cidx: usize, w: f64| {
        let v = if r == cidx { w } else { w / std::f64::consts::SQRT_2 };
        (offsets[k] + svec_index(r, cidx), v)
    };
    let row_of = |eq: &crate::relax::SosEquation| -> Vec<(usize, f64)> {
        let mut row: Vec<(usize, f64)> = eq.gram_terms.iter().map(|&(k, r, c, w)| coeff(k, r, c, w)).collect();
        row.extend(eq.multiplier_terms.iter().map(|&(r, v)| (ngram + r, v)));
        row.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (j, v) in row {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged
    };
    let mut c = vec![0.0; n];
    for (j, v) in row_of(&sos.constant) {
        c[j] += v;
    }
    let a: SparseRows = sos.equations.iter().map(row_of).collect();
    let b: Vec<f64> = sos.equations.iter().map(|e| e.rhs).collect();
    let g: SparseRows = (0..ngram).map(|j| vec![(j, 1.0)]).collect();
    let problem = ConicProblem { n, c: c.clone(), a, b, g, cones: sizes.clone() };
    let res = solve_conic(&problem, cfg)?;
    let grams = split_cones(&res.x[..ngram], &sizes);
    let nu = res.x[ngram..].to_vec();
    let cx: f64 = c.iter().zip(&res.x).map(|(c, x)| c * x).sum();
    let bound = sos.constant.rhs - cx;
    let mut y = vec![0.0; rp.npositions()];
    y[0] = 1.0;
    for (eq, m) in sos.equations.iter().zip(&res.mu) {
        y[eq.position] = *m;
    }
    let sol = SdpSolution {
        side: Side::Sos,
        y_values: y,
        block_matrices: Vec::new(),
        dual_blocks: grams,
        eq_multipliers: nu,
        dual_value: bound,
        objective_value: bound,
        residuals: Residuals { primal: res.primal, dual: res.dual, gap: res.gap },
        kkt_max: 0.0,
        status: res.status,
        iterations: res.iterations,
        solve_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(finish(rp, sol))
}

/// Solves the given side.
pub fn solve_side(rp: &RelaxationProblem, side: Side, cfg: &SolverConfig) -> Result<SdpSolution> {
    match side {
        Side::Moment => solve(rp, cfg),
        Side::Sos => solve_sos(rp, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_pop;
    use crate::relax::assemble_dense;

    #[test]
    fn gap_formula() {
        assert_eq!(suboptimality_gap(-0.25, -0.25), 0.0);
        assert_eq!(suboptimality_gap(0.0, 1.0), 0.5);
        assert!((suboptimality_gap(-1.0, 1.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn both_sides_on_quartic() {
        let pop = parse_pop("vars x; min x^4 - x^2;").unwrap();
        let rp = assemble_dense(&pop, 2).unwrap();
        let cfg = SolverConfig::default();
        for sol in [solve(&rp, &cfg).unwrap(), solve_sos(&rp, &cfg).unwrap()] {
            assert_eq!(sol.status, Status::Optimal, "{:?}", sol.side);
            assert!((sol.objective_value + 0.25).abs() < 1e-5, "{:?} {}", sol.side, sol.objective_value);
            assert!(sol.kkt_max < 1e-5, "{:?} {}", sol.side, sol.kkt_max);
        }
    }
}
