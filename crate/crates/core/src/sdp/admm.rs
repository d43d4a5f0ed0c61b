//! ADMM for conic programs
//!
//! ```text
//! min cᵀx  s.t.  A x = b,  G x = z,  z ∈ K = S₊ × … × S₊  (svec form)
//! ```
//!
//! The x-step solves the equality-constrained proximal least squares problem
//! exactly through a factorization computed once.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};
use rayon::prelude::*;

use super::psd::{project_svec, svec_len};
use super::{SolverConfig, Status};
use crate::error::{Error, Result};

const RHO_THRESHOLD: f64 = 5.0;
const RHO_FACTOR: f64 = 2.0;

pub(crate) type SparseRows = Vec<Vec<(usize, f64)>>;

#[derive(Clone, Debug)]
pub(crate) struct ConicProblem {
    pub n: usize,
    pub c: Vec<f64>,
    pub a: SparseRows,
    pub b: Vec<f64>,
    pub g: SparseRows,
    pub cones: Vec<usize>,
}

/// Iterate and multipliers; `c + Aᵀμ + Gᵀλ = 0` at optimality and the cone
/// dual is `-λ`.
#[derive(Clone, Debug)]
pub(crate) struct ConicResult {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub status: Status,
    pub iterations: usize,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn mul_rows(rows: &SparseRows, x: &[f64]) -> Vec<f64> {
    rows.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum()).collect()
}

fn mul_rows_t(rows: &SparseRows, y: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (r, &yi) in rows.iter().zip(y) {
        if yi != 0.0 {
            for &(j, v) in r {
                out[j] += v * yi;
            }
        }
    }
    out
}

fn cone_ranges(cones: &[usize]) -> Vec<(usize, usize)> {
    let mut off = 0;
    cones
        .iter()
        .map(|&s| {
            let r = (off, svec_len(s));
            off += r.1;
            r
        })
        .collect()
}

fn project_cones(v: &mut [f64], cones: &[usize]) {
    let mut chunks: Vec<(&mut [f64], usize)> = Vec::with_capacity(cones.len());
    let mut rest = v;
    for &s in cones {
        let (head, tail) = rest.split_at_mut(svec_len(s));
        chunks.push((head, s));
        rest = tail;
    }
    chunks.into_par_iter().with_min_len(8).for_each(|(chunk, s)| project_svec(chunk, s));
}

struct Scaling {
    d: Vec<f64>,
    e: Vec<f64>,
    f: Vec<f64>,
    cost: f64,
}

// Ruiz equilibration of [A; G] with one scalar per cone.
fn equilibrate(p: &ConicProblem, iters: usize) -> Scaling {
    let m = p.a.len();
    let ranges = cone_ranges(&p.cones);
    let mut d = vec![1.0; p.n];
    let mut e = vec![1.0; m];
    let mut f = vec![1.0; p.cones.len()];
    let mut cone_of = Vec::with_capacity(p.g.len());
    for (k, &(_, len)) in ranges.iter().enumerate() {
        cone_of.extend(std::iter::repeat_n(k, len));
    }
    let clamp = |x: f64| if x > 0.0 { (1.0 / x.sqrt()).clamp(1e-4, 1e4) } else { 1.0 };
    for _ in 0..iters {
        let mut col = vec![0.0f64; p.n];
        let mut row = vec![0.0f64; m];
        let mut cone = vec![0.0f64; p.cones.len()];
        for (i, r) in p.a.iter().enumerate() {
            for &(j, v) in r {
                let s = (v * e[i] * d[j]).abs();
                col[j] = col[j].max(s);
                row[i] = row[i].max(s);
            }
        }
        for (i, r) in p.g.iter().enumerate() {
            let k = cone_of[i];
            for &(j, v) in r {
                let s = (v * f[k] * d[j]).abs();
                col[j] = col[j].max(s);
                cone[k] = cone[k].max(s);
            }
        }
        for (dj, cj) in d.iter_mut().zip(&col) {
            *dj *= clamp(*cj);
        }
        for (ei, ri) in e.iter_mut().zip(&row) {
            *ei *= clamp(*ri);
        }
        for (fk, ck) in f.iter_mut().zip(&cone) {
            *fk *= clamp(*ck);
        }
    }
    let cmax = p.c.iter().zip(&d).fold(0.0f64, |acc, (c, dj)| acc.max((c * dj).abs()));
    let cost = if cmax > 0.0 { (1.0 / cmax).clamp(1e-4, 1e4) } else { 1.0 };
    Scaling { d, e, f, cost }
}

enum Factor {
    // Dense M, every column in a cone: x = Π r / ρ + q, μ = S⁻¹(Wᵀ r − ρ b).
    Dense { pi: DMatrix<f64>, w: DMatrix<f64>, s: Cholesky<f64, Dyn>, q: DVector<f64> },
    // Diagonal M on cone columns; free columns are eliminated exactly through
    // the saddle system [S, −A_f; −A_fᵀ, 0] [μ; ρ x_f] = [A M⁻¹ r − ρ b; −r_f].
    Diagonal { m: Vec<f64>, free: Vec<usize>, kkt: Kkt },
}

enum Kkt {
    Chol(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
}

impl Kkt {
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            Kkt::Chol(c) => c.solve(rhs),
            Kkt::Lu(lu) => lu.solve(rhs).unwrap_or_else(|| DVector::from_element(rhs.len(), f64::NAN)),
        }
    }
}

fn singular() -> Error {
    Error::SingularSystem(
        "the equality system of the relaxation is numerically singular; enable scaling or remove redundant constraints"
            .into(),
    )
}

fn regularized_cholesky(mut s: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let scale = (0..s.nrows()).fold(1.0f64, |acc, i| acc.max(s[(i, i)].abs()));
    let mut delta = 1e-12 * scale;
    let base = s.clone();
    while delta <= 1e-4 * scale {
        for i in 0..s.nrows() {
            s[(i, i)] = base[(i, i)] + delta;
        }
        if let Some(ch) = s.clone().cholesky() {
            return Ok(ch);
        }
        delta *= 100.0;
    }
    Err(singular())
}

struct Scaled {
    c: Vec<f64>,
    a: SparseRows,
    b: Vec<f64>,
    g: SparseRows,
}

// Returns the factorization and the proximal weights per column.
fn factor(n: usize, s: &Scaled, prox: f64) -> Result<(Factor, Vec<f64>)> {
    let m = s.a.len();
    let mut in_g = vec![false; n];
    let diagonal = s.g.iter().all(|r| r.len() <= 1);
    for r in &s.g {
        for &(j, _) in r {
            in_g[j] = true;
        }
    }
    let b = DVector::from_column_slice(&s.b);
    if diagonal {
        let eps: Vec<f64> = in_g.iter().map(|&g| if g { prox } else { 0.0 }).collect();
        let free: Vec<usize> = (0..n).filter(|&j| !in_g[j]).collect();
        let mut md = eps.clone();
        for r in &s.g {
            for &(j, v) in r {
                md[j] += v * v;
            }
        }
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, r) in s.a.iter().enumerate() {
            for &(j, v) in r {
                cols[j].push((i, v));
            }
        }
        let mut sm = DMatrix::zeros(m, m);
        for (j, col) in cols.iter().enumerate().filter(|(j, _)| in_g[*j]) {
            for &(i1, v1) in col {
                for &(i2, v2) in col {
                    sm[(i1, i2)] += v1 * v2 / md[j];
                }
            }
        }
        if free.is_empty() {
            let kkt = Kkt::Chol(regularized_cholesky(sm)?);
            return Ok((Factor::Diagonal { m: md, free, kkt }, eps));
        }
        let p = free.len();
        let scale = (0..m).fold(1.0f64, |acc, i| acc.max(sm[(i, i)].abs()));
        let delta = 1e-11 * scale;
        let mut k = DMatrix::zeros(m + p, m + p);
        k.view_mut((0, 0), (m, m)).copy_from(&sm);
        for i in 0..m {
            k[(i, i)] += delta;
        }
        for (f, &j) in free.iter().enumerate() {
            for &(i, v) in &cols[j] {
                k[(i, m + f)] = -v;
                k[(m + f, i)] = -v;
            }
            k[(m + f, m + f)] = -delta;
        }
        let lu = k.lu();
        if !lu.is_invertible() {
            return Err(singular());
        }
        return Ok((Factor::Diagonal { m: md, free, kkt: Kkt::Lu(lu) }, eps));
    }
    let eps: Vec<f64> = in_g.iter().map(|&g| if g { prox } else { 1.0 }).collect();
    let mut mm = DMatrix::from_diagonal(&DVector::from_column_slice(&eps));
    for r in &s.g {
        for &(j, v) in r {
            for &(k, w) in r {
                mm[(j, k)] += v * w;
            }
        }
    }
    let chol = mm.cholesky().ok_or_else(|| Error::SingularSystem("proximal normal matrix is not positive definite".into()))?;
    let minv = chol.inverse();
    let mut at = DMatrix::zeros(n, m);
    for (i, r) in s.a.iter().enumerate() {
        for &(j, v) in r {
            at[(j, i)] += v;
        }
    }
    let w = &minv * &at;
    let sm = at.transpose() * &w;
    let sch = regularized_cholesky(sm)?;
    let swt = sch.solve(&w.transpose());
    let pi = minv - &w * swt;
    let q = &w * sch.solve(&b);
    Ok((Factor::Dense { pi, w, s: sch, q }, eps))
}

struct State {
    x: Vec<f64>,
    z: Vec<f64>,
    u: Vec<f64>,
    r: Vec<f64>,
    rho: f64,
}

impl Factor {
    // Solves the x-step, writing `st.x`, and returns the scaled multiplier of
    // `A x = b`.
    fn solve(&self, s: &Scaled, st: &State, write_x: Option<&mut Vec<f64>>) -> Vec<f64> {
        let rho = st.rho;
        match self {
            Factor::Dense { pi, w, s: sch, q } => {
                let r = DVector::from_column_slice(&st.r);
                match write_x {
                    Some(x) => {
                        let xn = pi * &r / rho + q;
                        x.copy_from_slice(xn.as_slice());
                        Vec::new()
                    }
                    None => {
                        let rhs = w.transpose() * r - rho * DVector::from_column_slice(&s.b);
                        sch.solve(&rhs).as_slice().to_vec()
                    }
                }
            }
            Factor::Diagonal { m, free, kkt } => {
                let nm = s.a.len();
                let t: Vec<f64> = st.r.iter().zip(m).map(|(r, m)| if *m > 0.0 { r / m } else { 0.0 }).collect();
                let at = mul_rows(&s.a, &t);
                let mut rhs = DVector::zeros(nm + free.len());
                for i in 0..nm {
                    rhs[i] = at[i] - rho * s.b[i];
                }
                for (f, &j) in free.iter().enumerate() {
                    rhs[nm + f] = -st.r[j];
                }
                let sol = kkt.solve(&rhs);
                let mu = sol.as_slice()[..nm].to_vec();
                if let Some(x) = write_x {
                    let atmu = mul_rows_t(&s.a, &mu, t.len());
                    for (j, xj) in x.iter_mut().enumerate() {
                        if m[j] > 0.0 {
                            *xj = (t[j] - atmu[j] / m[j]) / rho;
                        }
                    }
                    for (f, &j) in free.iter().enumerate() {
                        x[j] = sol[nm + f] / rho;
                    }
                }
                mu
            }
        }
    }

    fn x_step(&self, s: &Scaled, st: &mut State) {
        let mut x = std::mem::take(&mut st.x);
        self.solve(s, st, Some(&mut x));
        st.x = x;
    }

    fn mu(&self, s: &Scaled, st: &State) -> Vec<f64> {
        match self {
            Factor::Dense { .. } => self.solve(s, st, None),
            Factor::Diagonal { .. } => self.solve(s, st, None),
        }
    }
}

struct Check {
    primal: f64,
    dual: f64,
    gap: f64,
    converged: bool,
    score: f64,
    primal_scale: f64,
    dual_scale: f64,
}

pub(crate) fn solve_conic(p: &ConicProblem, cfg: &SolverConfig) -> Result<ConicResult> {
    let start = Instant::now();
    let n = p.n;
    let m = p.a.len();
    let ranges = cone_ranges(&p.cones);
    if ranges.last().map_or(0, |r| r.0 + r.1) != p.g.len() {
        return Err(Error::InvalidProblem("cone sizes do not match the number of conic rows".into()));
    }
    let sc = if cfg.scaling {
        equilibrate(p, 20)
    } else {
        Scaling { d: vec![1.0; n], e: vec![1.0; m], f: vec![1.0; p.cones.len()], cost: 1.0 }
    };
    let mut gscale = Vec::with_capacity(p.g.len());
    for (k, &(_, len)) in ranges.iter().enumerate() {
        gscale.extend(std::iter::repeat_n(sc.f[k], len));
    }
    let scaled = Scaled {
        c: p.c.iter().zip(&sc.d).map(|(c, d)| c * d * sc.cost).collect(),
        a: p.a.iter().zip(&sc.e).map(|(r, e)| r.iter().map(|&(j, v)| (j, v * e * sc.d[j])).collect()).collect(),
        b: p.b.iter().zip(&sc.e).map(|(b, e)| b * e).collect(),
        g: p.g.iter().zip(&gscale).map(|(r, f)| r.iter().map(|&(j, v)| (j, v * f * sc.d[j])).collect()).collect(),
    };
    let (fac, eps) = factor(n, &scaled, cfg.prox)?;
    let ng = p.g.len();
    let mut st = State { x: vec![0.0; n], z: vec![0.0; ng], u: vec![0.0; ng], r: vec![0.0; n], rho: cfg.rho };
    let alpha = cfg.alpha;

    let unscale = |st: &State, mu_s: &[f64]| -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = st.x.iter().zip(&sc.d).map(|(x, d)| x * d).collect();
        let z: Vec<f64> = st.z.iter().zip(&gscale).map(|(z, f)| z / f).collect();
        let lambda: Vec<f64> = st.u.iter().zip(&gscale).map(|(u, f)| st.rho * u * f / sc.cost).collect();
        let mu: Vec<f64> = mu_s.iter().zip(&sc.e).map(|(m, e)| m * e / sc.cost).collect();
        (x, z, lambda, mu)
    };
    let check = |x: &[f64], z: &[f64], lambda: &[f64], mu: &[f64]| -> Check {
        let gx = mul_rows(&p.g, x);
        let ax = mul_rows(&p.a, x);
        let rp_g = gx.iter().zip(z).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        let rp_a = ax.iter().zip(&p.b).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        let primal = rp_g.max(rp_a);
        let atmu = mul_rows_t(&p.a, mu, n);
        let gtl = mul_rows_t(&p.g, lambda, n);
        let dual = (0..n).fold(0.0f64, |acc, j| acc.max((p.c[j] + atmu[j] + gtl[j]).abs()));
        let pobj: f64 = p.c.iter().zip(x).map(|(c, x)| c * x).sum();
        let dobj: f64 = -p.b.iter().zip(mu).map(|(b, m)| b * m).sum::<f64>();
        let gap = (pobj - dobj).abs();
        let tp = cfg.eps_abs + cfg.eps_rel * inf_norm(&gx).max(inf_norm(z)).max(inf_norm(&ax)).max(inf_norm(&p.b));
        let td = cfg.eps_abs + cfg.eps_rel * inf_norm(&p.c).max(inf_norm(&atmu)).max(inf_norm(&gtl));
        let tg = cfg.eps_abs + cfg.eps_rel * pobj.abs().max(dobj.abs());
        let converged = primal <= tp && dual <= td && gap <= tg;
        let score = (primal / tp).max(dual / td).max(gap / tg);
        let primal_scale = inf_norm(&gx).max(inf_norm(z)).max(inf_norm(&ax)).max(inf_norm(&p.b)).max(1e-12);
        let dual_scale = inf_norm(&p.c).max(inf_norm(&atmu)).max(inf_norm(&gtl)).max(1e-12);
        Check { primal, dual, gap, converged, score, primal_scale, dual_scale }
    };

    let mut best: Option<(f64, ConicResult)> = None;
    let mut status = Status::MaxIters;
    let mut iter = 0;
    let mut v = vec![0.0; ng];
    while iter < cfg.max_iters {
        iter += 1;
        // r = −c + ρGᵀ(z − u) + ρ diag(ε) x.
        let zu: Vec<f64> = st.z.iter().zip(&st.u).map(|(z, u)| z - u).collect();
        let gt = mul_rows_t(&scaled.g, &zu, n);
        for j in 0..n {
            st.r[j] = -scaled.c[j] + st.rho * (gt[j] + eps[j] * st.x[j]);
        }
        fac.x_step(&scaled, &mut st);
        let gx = mul_rows(&scaled.g, &st.x);
        for i in 0..ng {
            let xh = alpha * gx[i] + (1.0 - alpha) * st.z[i];
            v[i] = xh + st.u[i];
        }
        let mut znew = v.clone();
        project_cones(&mut znew, &p.cones);
        for i in 0..ng {
            let xh = alpha * gx[i] + (1.0 - alpha) * st.z[i];
            st.u[i] += xh - znew[i];
        }
        st.z = znew;

        let at_check = iter % cfg.check_every == 0 || iter == cfg.max_iters;
        let at_adapt = cfg.adaptive_rho && iter % 100 == 0;
        if !(at_check || at_adapt) {
            continue;
        }
        let mu_s = fac.mu(&scaled, &st);
        let (x, z, lambda, mu) = unscale(&st, &mu_s);
        let ck = check(&x, &z, &lambda, &mu);
        if at_adapt {
            // Scaled residuals balance well when the cone map mixes variables;
            // with an identity cone map the unscaled ones do.
            let (rp, rd) = if matches!(fac, Factor::Dense { .. }) {
                let gx = mul_rows(&scaled.g, &st.x);
                let rp = gx.iter().zip(&st.z).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
                    / inf_norm(&gx).max(inf_norm(&st.z)).max(1e-12);
                let lam: Vec<f64> = st.u.iter().map(|u| st.rho * u).collect();
                let gtl = mul_rows_t(&scaled.g, &lam, n);
                let atmu = mul_rows_t(&scaled.a, &mu_s, n);
                let rd = (0..n).fold(0.0f64, |acc, j| acc.max((scaled.c[j] + atmu[j] + gtl[j]).abs()))
                    / inf_norm(&scaled.c).max(inf_norm(&gtl)).max(inf_norm(&atmu)).max(1e-12);
                (rp, rd)
            } else {
                (ck.primal / ck.primal_scale, ck.dual / ck.dual_scale)
            };
            if rp > RHO_THRESHOLD * rd {
                st.rho *= RHO_FACTOR;
                st.u.iter_mut().for_each(|u| *u /= RHO_FACTOR);
            } else if rd > RHO_THRESHOLD * rp {
                st.rho /= RHO_FACTOR;
                st.u.iter_mut().for_each(|u| *u *= RHO_FACTOR);
            }
        }
        if !at_check {
            continue;
        }
        if cfg.log_every > 0 && iter % cfg.log_every == 0 {
            log::info!(
                "iter {iter:>6}  primal {:.3e}  dual {:.3e}  gap {:.3e}  rho {:.2e}",
                ck.primal,
                ck.dual,
                ck.gap,
                st.rho
            );
        }
        if inf_norm(&x) > 1e12 || inf_norm(&lambda) > 1e12 || !ck.score.is_finite() {
            status = Status::InfeasibleHeuristic;
            let res = ConicResult {
                x,
                lambda,
                mu,
                status,
                iterations: iter,
                primal: ck.primal,
                dual: ck.dual,
                gap: ck.gap,
            };
            best = Some((ck.score, res));
            break;
        }
        let res = ConicResult {
            x,
            lambda,
            mu,
            status: Status::MaxIters,
            iterations: iter,
            primal: ck.primal,
            dual: ck.dual,
            gap: ck.gap,
        };
        if ck.converged {
            status = Status::Optimal;
            best = Some((ck.score, res));
            break;
        }
        if best.as_ref().is_none_or(|(s, _)| ck.score < *s) {
            best = Some((ck.score, res));
        }
        if cfg.time_limit.is_some_and(|t| start.elapsed().as_secs_f64() > t) {
            break;
        }
    }
    let (_, mut res) = match best {
        Some(b) => b,
        None => {
            let mu_s = fac.mu(&scaled, &st);
            let (x, z, lambda, mu) = unscale(&st, &mu_s);
            let ck = check(&x, &z, &lambda, &mu);
            (
                ck.score,
                ConicResult {
                    x,
                    lambda,
                    mu,
                    status,
                    iterations: iter,
                    primal: ck.primal,
                    dual: ck.dual,
                    gap: ck.gap,
                },
            )
        }
    };
    res.status = status;
    log::debug!("admm finished: {:?} after {} iterations ({:.3}s)", status, iter, start.elapsed().as_secs_f64());
    Ok(res)
}
