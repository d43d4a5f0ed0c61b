//! Built-in problem generators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial, Pop};

// Sparse polynomial builder over `n` variables from `(coef, [(var, exp)])`.
fn poly(n: usize, terms: &[(f64, &[(usize, u32)])]) -> Polynomial {
    Polynomial::from_terms(n, terms.iter().map(|(c, m)| (Monomial::from_pairs(m.iter().copied()), *c)))
}

/// Double integrator with soft walls on both sides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleIntegratorParams {
    pub n_steps: usize,
    pub mass: f64,
    pub dt: f64,
    pub k1: f64,
    pub k2: f64,
    pub d1: f64,
    pub d2: f64,
    pub u_max: f64,
    pub x_init: f64,
    pub v_init: f64,
}

impl Default for DoubleIntegratorParams {
    fn default() -> Self {
        Self { n_steps: 3, mass: 1.0, dt: 0.1, k1: 100.0, k2: 100.0, d1: 1.0, d2: 1.0, u_max: 10.0, x_init: 0.5, v_init: -0.5 }
    }
}

impl DoubleIntegratorParams {
    pub fn with_steps(n_steps: usize) -> Self {
        Self { n_steps, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::InvalidOption("horizon N must be at least 1".into()));
        }
        for (name, v) in [("m", self.mass), ("dt", self.dt), ("k1", self.k1), ("k2", self.k2)] {
            if !(v > 0.0) {
                return Err(Error::InvalidOption(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Variable indices of the double integrator: per step `k < N` the block
/// `x_k, v_k, u_k, lam1_k, lam2_k`, then `x_N, v_N`.
#[derive(Clone, Copy, Debug)]
pub struct DiLayout {
    pub n_steps: usize,
}

impl DiLayout {
    pub fn nvars(&self) -> usize {
        5 * self.n_steps + 2
    }
    pub fn x(&self, k: usize) -> usize {
        5 * k
    }
    pub fn v(&self, k: usize) -> usize {
        5 * k + 1
    }
    pub fn u(&self, k: usize) -> usize {
        5 * k + 2
    }
    pub fn lam1(&self, k: usize) -> usize {
        5 * k + 3
    }
    pub fn lam2(&self, k: usize) -> usize {
        5 * k + 4
    }
}

/// The double integrator trajectory problem: quadratic regulation of
/// `x_{k+1}, v_{k+1}, u_k`, Euler dynamics, control bounds and
/// complementarity between each wall force and its gap, written as
/// `λ ≥ 0`, `gap ≥ 0`, `λ · gap = 0`.
pub fn make_double_integrator(p: &DoubleIntegratorParams) -> Result<Pop> {
    p.validate()?;
    let lay = DiLayout { n_steps: p.n_steps };
    let n = lay.nvars();
    let mut names = Vec::with_capacity(n);
    for k in 0..p.n_steps {
        names.extend([format!("x{k}"), format!("v{k}"), format!("u{k}"), format!("lam1_{k}"), format!("lam2_{k}")]);
    }
    names.extend([format!("x{}", p.n_steps), format!("v{}", p.n_steps)]);

    let mut obj = Vec::new();
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    let h = p.dt / p.mass;
    for k in 0..p.n_steps {
        let (x, v, u, l1, l2) = (lay.x(k), lay.v(k), lay.u(k), lay.lam1(k), lay.lam2(k));
        let (x1, v1) = (lay.x(k + 1), lay.v(k + 1));
        obj.push(poly(n, &[(1.0, &[(u, 2)]), (1.0, &[(x1, 2)]), (1.0, &[(v1, 2)])]));
        eqs.push(poly(n, &[(1.0, &[(x1, 1)]), (-1.0, &[(x, 1)]), (-p.dt, &[(v, 1)])]));
        eqs.push(poly(
            n,
            &[(1.0, &[(v1, 1)]), (-1.0, &[(v, 1)]), (-h, &[(u, 1)]), (-h, &[(l1, 1)]), (h, &[(l2, 1)])],
        ));
        ineqs.push(poly(n, &[(p.u_max * p.u_max, &[]), (-1.0, &[(u, 2)])]));
        for (lam, kk, dd, sign) in [(l1, p.k1, p.d1, 1.0), (l2, p.k2, p.d2, -1.0)] {
            let gap = poly(n, &[(1.0 / kk, &[(lam, 1)]), (dd, &[]), (sign, &[(x, 1)])]);
            ineqs.push(poly(n, &[(1.0, &[(lam, 1)])]));
            eqs.push(Polynomial::var(n, lam).try_mul(&gap)?);
            ineqs.push(gap);
        }
    }
    eqs.push(poly(n, &[(1.0, &[(lay.x(0), 1)]), (-p.x_init, &[])]));
    eqs.push(poly(n, &[(1.0, &[(lay.v(0), 1)]), (-p.v_init, &[])]));
    let objective = obj.iter().try_fold(Polynomial::zero(n), |acc, t| acc.try_add(t))?;
    Pop::new(names, objective, ineqs, eqs)
}

/// A feasible point of [`make_double_integrator`]: forward simulation from
/// the initial state with zero control and zero wall forces. Requires the
/// whole trajectory to stay strictly between the walls.
pub fn double_integrator_rollout(p: &DoubleIntegratorParams) -> Result<Vec<f64>> {
    p.validate()?;
    let lay = DiLayout { n_steps: p.n_steps };
    let mut point = vec![0.0; lay.nvars()];
    let (mut x, v) = (p.x_init, p.v_init);
    for k in 0..=p.n_steps {
        if !(x > -p.d1 && x < p.d2) {
            return Err(Error::InvalidOption(format!("the uncontrolled rollout reaches a wall at step {k}")));
        }
        point[lay.x(k)] = x;
        point[lay.v(k)] = v;
        x += p.dt * v;
    }
    Ok(point)
}

/// Mode selection: `Σ λ_i² = 1` and `λ_i (1 − λ_i) = 0`, objective 0.
pub fn make_separable_modes(n: usize) -> Result<Pop> {
    if n == 0 {
        return Err(Error::InvalidOption("at least one mode is required".into()));
    }
    let names = (1..=n).map(|i| format!("lam{i}")).collect();
    let mut eqs = Vec::with_capacity(n + 1);
    let mut h0: Vec<(f64, Vec<(usize, u32)>)> = (0..n).map(|i| (1.0, vec![(i, 2)])).collect();
    h0.push((-1.0, vec![]));
    eqs.push(Polynomial::from_terms(n, h0.into_iter().map(|(c, m)| (Monomial::from_pairs(m), c))));
    for i in 0..n {
        eqs.push(poly(n, &[(1.0, &[(i, 1)]), (-1.0, &[(i, 2)])]));
    }
    Pop::new(names, Polynomial::zero(n), Vec::new(), eqs)
}

/// Variable indices of the kinematic chain: per step `k ≤ N` the states
/// `x1_k, x2_k, x3_k`, followed for `k < N` by the controls
/// `u1_k, u2_k, u3_k`.
#[derive(Clone, Copy, Debug)]
pub struct ChainLayout {
    pub n_steps: usize,
}

impl ChainLayout {
    pub fn nvars(&self) -> usize {
        6 * self.n_steps + 3
    }
    /// State `i ∈ {0, 1, 2}` at step `k`.
    pub fn x(&self, i: usize, k: usize) -> usize {
        6 * k + i
    }
    /// Control `i ∈ {0, 1, 2}` at step `k < N`.
    pub fn u(&self, i: usize, k: usize) -> usize {
        6 * k + 3 + i
    }
}

/// The 1-D two-link chain: `x_{i,k+1} = x_{i,k} + u_{i,k}`, link lengths
/// `(x_1 − x_2)² = r²` and `(x_2 − x_3)² = r²` at every step, the chain
/// starting at `x_{i,0} = (i − 1) r`, and objective `Σ u² + Σ x²` over
/// steps `k ≥ 1`. Also returns the hand-made cliques: per step three
/// cliques `{x_{i,k}, x_{i,k+1}, u_{i,k}}` and the link pairs
/// `{x_{i,m}, x_{i+1,m}}`, `m ∈ {k, k+1}`, without duplicates.
pub fn make_kinematic_chain(n_steps: usize, r: f64) -> Result<(Pop, Vec<Vec<usize>>)> {
    if n_steps == 0 {
        return Err(Error::InvalidOption("horizon N must be at least 1".into()));
    }
    let lay = ChainLayout { n_steps };
    let n = lay.nvars();
    let mut names = Vec::with_capacity(n);
    for k in 0..=n_steps {
        names.extend((1..=3).map(|i| format!("x{i}_{k}")));
        if k < n_steps {
            names.extend((1..=3).map(|i| format!("u{i}_{k}")));
        }
    }
    let mut obj = Vec::new();
    let mut eqs = Vec::new();
    for i in 0..3 {
        eqs.push(poly(n, &[(1.0, &[(lay.x(i, 0), 1)]), (-(i as f64) * r, &[])]));
    }
    for k in 0..=n_steps {
        for i in 0..2 {
            let (a, b) = (lay.x(i, k), lay.x(i + 1, k));
            eqs.push(poly(n, &[(1.0, &[(a, 2)]), (-2.0, &[(a, 1), (b, 1)]), (1.0, &[(b, 2)]), (-r * r, &[])]));
        }
        if k == n_steps {
            break;
        }
        for i in 0..3 {
            let (x, x1, u) = (lay.x(i, k), lay.x(i, k + 1), lay.u(i, k));
            eqs.push(poly(n, &[(1.0, &[(x1, 1)]), (-1.0, &[(x, 1)]), (-1.0, &[(u, 1)])]));
            obj.push(poly(n, &[(1.0, &[(u, 2)]), (1.0, &[(x1, 2)])]));
        }
    }
    let objective = obj.iter().try_fold(Polynomial::zero(n), |acc, t| acc.try_add(t))?;
    let pop = Pop::new(names, objective, Vec::new(), eqs)?;

    let mut cliques: Vec<Vec<usize>> = Vec::new();
    let mut push = |mut c: Vec<usize>| {
        c.sort_unstable();
        if !cliques.contains(&c) {
            cliques.push(c);
        }
    };
    for k in 0..n_steps {
        for i in 0..3 {
            push(vec![lay.x(i, k), lay.x(i, k + 1), lay.u(i, k)]);
        }
        for m in [k, k + 1] {
            for i in 0..2 {
                push(vec![lay.x(i, m), lay.x(i + 1, m)]);
            }
        }
    }
    Ok((pop, cliques))
}

/// A feasible point of [`make_kinematic_chain`]: the chain at rest.
pub fn kinematic_chain_rest(n_steps: usize, r: f64) -> Vec<f64> {
    let lay = ChainLayout { n_steps };
    let mut point = vec![0.0; lay.nvars()];
    for k in 0..=n_steps {
        for i in 0..3 {
            point[lay.x(i, k)] = i as f64 * r;
        }
    }
    point
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census() {
        for n in 1..5 {
            let pop = make_double_integrator(&DoubleIntegratorParams::with_steps(n)).unwrap();
            assert_eq!(pop.nvars(), 2 * (n + 1) + 3 * n);
        }
    }

    #[test]
    fn witnesses_are_feasible() {
        let p = DoubleIntegratorParams::default();
        let pop = make_double_integrator(&p).unwrap();
        let pt = double_integrator_rollout(&p).unwrap();
        assert!(pop.feasibility_residual(&pt) <= 1e-12);
        let (pop, _) = make_kinematic_chain(2, 0.5).unwrap();
        assert!(pop.feasibility_residual(&kinematic_chain_rest(2, 0.5)) <= 1e-12);
    }
}
