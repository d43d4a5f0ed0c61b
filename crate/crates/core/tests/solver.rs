mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use sparsepop::cs::{decompose, CsMode, CsOption};
use sparsepop::models::{double_integrator_rollout, make_double_integrator, DoubleIntegratorParams};
use sparsepop::poly::{parse_pop, Monomial};
use sparsepop::relax::{assemble_cs, assemble_dense, compute_dmin};
use sparsepop::sdp::psd::{min_eigenvalue, project_psd};
use sparsepop::sdp::{kkt_residual, solve, solve_side, solve_sos, Side, SolverConfig, Status};

#[test]
fn square_has_zero_minimum() {
    let rp = assemble_dense(&parse_pop("vars x; min x^2;").unwrap(), 1).unwrap();
    let sol = solve(&rp, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!(sol.objective_value.abs() < 1e-5, "{}", sol.objective_value);
    let x = rp.moments.position(&Monomial::var(0)).unwrap();
    assert!(sol.y_values[x].abs() < 1e-3);
    assert!(sol.kkt_max < 1e-5);
}

#[test]
fn quartic_on_both_sides() {
    let rp = assemble_dense(&parse_pop("vars x; min x^4 - x^2;").unwrap(), 2).unwrap();
    for side in [Side::Moment, Side::Sos] {
        let sol = solve_side(&rp, side, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.objective_value + 0.25).abs() < 1e-4, "{side}: {}", sol.objective_value);
        for b in &sol.block_matrices {
            assert!(min_eigenvalue(b) >= -1e-5 * (1.0 + b.norm()));
        }
    }
}

#[test]
fn kkt_of_exact_and_perturbed_solutions() {
    let rp = assemble_dense(&parse_pop("vars x; min x^2;").unwrap(), 1).unwrap();
    let mut sol = solve(&rp, &SolverConfig::default()).unwrap();
    let x2 = rp.moments.position(&Monomial::from_pairs([(0, 2)])).unwrap();
    let x1 = rp.moments.position(&Monomial::var(0)).unwrap();
    let mut y = vec![0.0; rp.npositions()];
    y[0] = 1.0;
    sol.y_values = y.clone();
    sol.dual_value = 0.0;
    let mut z = DMatrix::zeros(2, 2);
    let b = &rp.blocks[0];
    let r = b.basis.iter().position(|m| *m == Monomial::var(0)).unwrap();
    z[(r, r)] = 1.0;
    sol.dual_blocks = vec![z];
    sol.eq_multipliers = Vec::new();
    assert!(kkt_residual(&rp, &sol) <= 1e-9);
    sol.y_values[x2] = 1e-3;
    assert!(kkt_residual(&rp, &sol) >= 1e-4);
    sol.y_values = y;
    sol.y_values[x1] = 1e-3;
    assert!(kkt_residual(&rp, &sol) > 0.0);
}

#[test]
fn permutations_do_not_change_the_value() {
    let pop = parse_pop("vars x y; min x^4 + y^4 - x*y + 0.3*x; s.t. 1 - x^2 - y^2 >= 0;").unwrap();
    let rp = assemble_dense(&pop, 2).unwrap();
    let cfg = SolverConfig::default();
    let base = solve(&rp, &cfg).unwrap();
    assert_eq!(base.status, Status::Optimal);
    let n = rp.npositions();
    let mut perm: Vec<usize> = (0..n).collect();
    perm[1..].reverse();
    let order: Vec<usize> = (0..rp.blocks.len()).rev().collect();
    let moved = solve(&rp.permuted(&order, &perm), &cfg).unwrap();
    let rel = (moved.objective_value - base.objective_value).abs() / (1.0 + base.objective_value.abs());
    assert!(rel <= 1e-5, "{} vs {}", moved.objective_value, base.objective_value);
}

#[test]
fn bounds_lie_below_feasible_points() {
    for seed in 0..4 {
        let pop = common::random_box_pop(seed);
        let d = compute_dmin(&pop);
        let rp = assemble_dense(&pop, d).unwrap();
        let sol = solve(&rp, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal, "seed {seed}");
        let upper = common::grid_minimum(&pop);
        assert!(sol.objective_value <= upper + 1e-4 * (1.0 + upper.abs()), "seed {seed}");
    }
}

#[test]
fn sos_and_moment_values_agree() {
    for seed in 4..8 {
        let pop = common::random_box_pop(seed);
        let dec = decompose(&pop, &CsOption::new(CsMode::Md)).unwrap();
        let rp = assemble_cs(&pop, &dec, compute_dmin(&pop)).unwrap();
        let cfg = SolverConfig::default();
        let m = solve(&rp, &cfg).unwrap();
        let s = solve_sos(&rp, &cfg).unwrap();
        assert_eq!((m.status, s.status), (Status::Optimal, Status::Optimal), "seed {seed}");
        let rel = (m.objective_value - s.objective_value).abs() / (1.0 + m.objective_value.abs());
        assert!(rel <= 1e-4, "seed {seed}: {} vs {}", m.objective_value, s.objective_value);
    }
}

#[test]
fn double_integrator_bound_is_below_rollout() {
    let p = DoubleIntegratorParams::with_steps(1);
    let pop = make_double_integrator(&p).unwrap();
    let dec = decompose(&pop, &CsOption::new(CsMode::Md)).unwrap();
    let rp = assemble_cs(&pop, &dec, 2).unwrap();
    let sol = solve(&rp, &SolverConfig::default()).unwrap();
    let upper = pop.objective().eval(&double_integrator_rollout(&p).unwrap());
    assert!(sol.objective_value <= upper + 1e-6);
    assert!(sol.kkt_max < 1e-4);
}

#[test]
fn iteration_limit_is_reported() {
    let rp = assemble_dense(&parse_pop("vars x y; min x^4 + y^4 - x*y;").unwrap(), 2).unwrap();
    let cfg = SolverConfig { max_iters: 20, ..SolverConfig::default() };
    let sol = solve(&rp, &cfg).unwrap();
    assert_eq!(sol.status, Status::MaxIters);
    assert!(sol.residuals.primal.is_finite());
    assert!(SolverConfig { eps_abs: 0.0, ..SolverConfig::default() }.validate().is_err());
}

fn arb_symmetric() -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..7).prop_flat_map(|n| {
        prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| {
            let m = DMatrix::from_vec(n, n, v);
            (&m + m.transpose()) * 0.5
        })
    })
}

proptest! {
    #[test]
    fn projection_is_psd_and_idempotent(m in arb_symmetric()) {
        let p = project_psd(&m);
        prop_assert!(min_eigenvalue(&p) >= -1e-12 * (1.0 + p.norm()));
        let pp = project_psd(&p);
        prop_assert!((&pp - &p).norm() <= 1e-10 * (1.0 + p.norm()));
        let q = &m - &p;
        prop_assert!(min_eigenvalue(&(-&q)) >= -1e-10 * (1.0 + q.norm()));
    }
}
