#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsepop::poly::{Monomial, Polynomial, Pop};

/// Half-width of the box `[-R, R]^n` declared by [`random_box_pop`].
pub const BOX: f64 = 1.0;

/// A random POP over `1 + seed % 4` variables: a degree ≤ 4 objective whose
/// terms each touch one or two neighbouring variables, plus `1 - x_i² >= 0`.
pub fn random_box_pop(seed: u64) -> Pop {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1 + (seed % 4) as usize;
    let mut terms: Vec<(Monomial, f64)> = Vec::new();
    let round = |v: f64| (v * 100.0).round() / 100.0;
    for i in 0..n {
        terms.push((Monomial::from_pairs([(i, 4)]), round(rng.gen_range(0.1..1.0))));
        terms.push((Monomial::var(i), round(rng.gen_range(-1.0..1.0))));
    }
    for _ in 0..rng.gen_range(2..6) {
        let i = rng.gen_range(0..n);
        let j = (i + 1).min(n - 1);
        let a = rng.gen_range(1..=3u32);
        let b = if j == i { 0 } else { rng.gen_range(0..=(4 - a)) };
        terms.push((Monomial::from_pairs([(i, a), (j, b)]), round(rng.gen_range(-1.0..1.0))));
    }
    let names = (1..=n).map(|i| format!("x{i}")).collect();
    let box_rows = (0..n)
        .map(|i| Polynomial::from_terms(n, [(Monomial::one(), BOX * BOX), (Monomial::from_pairs([(i, 2)]), -1.0)]))
        .collect();
    Pop::new(names, Polynomial::from_terms(n, terms), box_rows, Vec::new()).unwrap()
}

fn grid(n: usize, step: f64) -> impl Iterator<Item = Vec<f64>> {
    let m = (2.0 * BOX / step).round() as usize + 1;
    let total = m.pow(n as u32);
    (0..total).map(move |mut k| {
        (0..n)
            .map(|_| {
                let i = k % m;
                k /= m;
                -BOX + i as f64 * step
            })
            .collect()
    })
}

/// Minimum of the objective of a box POP over a grid of step `1e-3`. For
/// `n > 2` the fine grid is out of reach, so a step-`0.05` grid is followed
/// by pattern search from its best ten points, halving the step from `0.05`
/// until it falls below `2e-3`; every
/// candidate stays in the box, so the result is still an upper bound on the
/// global minimum.
pub fn grid_minimum(pop: &Pop) -> f64 {
    let n = pop.nvars();
    let f = |x: &[f64]| pop.objective().eval(x);
    if n <= 2 {
        return grid(n, 1e-3).map(|x| f(&x)).fold(f64::INFINITY, f64::min);
    }
    let mut coarse: Vec<(f64, Vec<f64>)> = grid(n, 0.05).map(|x| (f(&x), x)).collect();
    coarse.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    for (mut v, mut x) in coarse.into_iter().take(10) {
        let mut step = 0.05;
        while step >= 1e-3 {
            let mut moved = false;
            for i in 0..n {
                for s in [-step, step] {
                    let mut t = x.clone();
                    t[i] = (t[i] + s).clamp(-BOX, BOX);
                    let ft = f(&t);
                    if ft < v {
                        v = ft;
                        x = t;
                        moved = true;
                    }
                }
            }
            if !moved {
                step /= 2.0;
            }
        }
        best = best.min(v);
    }
    best
}
