use proptest::prelude::*;
use sparsepop::cs::{decompose, CsMode, CsOption};
use sparsepop::models::{double_integrator_rollout, make_double_integrator, make_separable_modes, DoubleIntegratorParams};
use sparsepop::poly::{basis_len, parse_pop, Monomial, Polynomial, Pop};
use sparsepop::relax::{assemble_cs, assemble_cs_ts, assemble_dense, compute_dmin, dualize, RelaxationProblem};
use sparsepop::sdp::psd::min_eigenvalue;
use sparsepop::sdp::{export_sdpa, import_sdpa};
use sparsepop::ts::{build_masks, TsMode, TsOption};
use sparsepop::Error;

#[test]
fn dmin_examples() {
    let di = make_double_integrator(&DoubleIntegratorParams::default()).unwrap();
    assert_eq!(compute_dmin(&di), 1);
    assert_eq!(compute_dmin(&parse_pop("vars x; min x^6;").unwrap()), 3);
    assert_eq!(compute_dmin(&parse_pop("vars x; min x; s.t. x^3 - 1 == 0;").unwrap()), 2);
}

#[test]
fn dense_shapes() {
    let pop = parse_pop("vars x y; min x^4 + y^4 - x*y;").unwrap();
    let rp = assemble_dense(&pop, 2).unwrap();
    assert_eq!(rp.block_sizes(), vec![6]);
    assert!(rp.eq_rows.is_empty());

    let rp = assemble_dense(&parse_pop("vars x; min x^2;").unwrap(), 1).unwrap();
    assert_eq!(rp.blocks.len(), 1);
    let y = [1.0, 2.0, 5.0];
    let mut got = vec![];
    for r in 0..2 {
        for c in 0..2 {
            got.push(rp.blocks[0].matrix(&y)[(r, c)]);
        }
    }
    let pos = |e: &[u32]| rp.moments.position(&Monomial::from_dense(e)).unwrap();
    let mut want = [0.0; 4];
    want[0] = y[pos(&[0])];
    want[1] = y[pos(&[1])];
    want[2] = y[pos(&[1])];
    want[3] = y[pos(&[2])];
    assert_eq!(got, want);
    assert_eq!(rp.objective.terms, vec![(pos(&[2]), 1.0)]);
    assert!(matches!(assemble_dense(&parse_pop("vars x; min x^4;").unwrap(), 1), Err(Error::OrderTooLow { .. })));
}

#[test]
fn disconnected_cliques_split_the_moment_matrix() {
    let pop = parse_pop("vars x y; min x^4 + y^4 - x^2 - y;").unwrap();
    let dec = decompose(&pop, &CsOption::new(CsMode::Md)).unwrap();
    assert_eq!(assemble_cs(&pop, &dec, 2).unwrap().block_sizes(), vec![3, 3]);
    assert_eq!(assemble_dense(&pop, 2).unwrap().block_sizes(), vec![6]);
}

#[test]
fn non_decomposition_equals_dense() {
    let pop = make_double_integrator(&DoubleIntegratorParams::with_steps(1)).unwrap();
    let dec = decompose(&pop, &CsOption::new(CsMode::Non)).unwrap();
    assert_eq!(assemble_cs(&pop, &dec, 1).unwrap(), assemble_dense(&pop, 1).unwrap());
}

#[test]
fn double_integrator_moment_blocks() {
    let pop = make_double_integrator(&DoubleIntegratorParams::with_steps(1)).unwrap();
    let dec = decompose(&pop, &CsOption::new(CsMode::Md)).unwrap();
    let rp = assemble_cs(&pop, &dec, 2).unwrap();
    let mut sizes: Vec<usize> = rp.blocks.iter().filter(|b| b.is_moment()).map(|b| b.size()).collect();
    sizes.sort_unstable();
    let mut want: Vec<usize> = dec.sizes().iter().map(|&n| basis_len(n, 2)).collect();
    want.sort_unstable();
    assert_eq!(sizes, want);
    assert!(sizes.contains(&15) && sizes.contains(&10));
    for (l, c) in dec.cliques.iter().enumerate() {
        let b = rp.blocks.iter().find(|b| b.is_moment() && b.origin.clique == l).unwrap();
        assert_eq!(b.size(), basis_len(c.len(), 2));
    }
}

#[test]
fn ts_non_equals_cs_and_partial_keeps_rows() {
    let pop = make_double_integrator(&DoubleIntegratorParams::with_steps(2)).unwrap();
    let dec = decompose(&pop, &CsOption::new(CsMode::Md)).unwrap();
    let cs = assemble_cs(&pop, &dec, 2).unwrap();
    let masks = build_masks(&pop, &dec, &TsOption::new(TsMode::Non), 2).unwrap();
    let ts = assemble_cs_ts(&pop, &dec, &masks, 2).unwrap();
    assert_eq!(ts.blocks, cs.blocks);
    assert_eq!(ts.eq_rows, cs.eq_rows);
    assert_eq!(ts.objective, cs.objective);

    let masks = build_masks(&pop, &dec, &TsOption::new(TsMode::Md).with_partial(true), 2).unwrap();
    let part = assemble_cs_ts(&pop, &dec, &masks, 2).unwrap();
    let labels = |rp: &RelaxationProblem| rp.eq_rows.iter().map(|r| r.label.clone()).collect::<Vec<_>>();
    assert_eq!(labels(&part), labels(&cs));
    assert!(part.blocks.len() > cs.blocks.len());
}

#[test]
fn separable_modes_moment_blocks_use_reduced_basis() {
    let pop = make_separable_modes(3).unwrap();
    let dec = decompose(&pop, &CsOption::new(CsMode::Non)).unwrap();
    let masks = build_masks(&pop, &dec, &TsOption::new(TsMode::Max), 2).unwrap();
    let rp = assemble_cs_ts(&pop, &dec, &masks, 2).unwrap();
    let mut rows: Vec<Monomial> = rp.blocks.iter().filter(|b| b.size() > 1).flat_map(|b| b.basis.clone()).collect();
    rows.sort();
    rows.dedup();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|m| m.pairs().len() <= 1));
}

#[test]
fn dual_has_one_equation_per_nonconstant_position() {
    let pop = make_double_integrator(&DoubleIntegratorParams::with_steps(2)).unwrap();
    let dec = decompose(&pop, &CsOption::new(CsMode::Md)).unwrap();
    let rp = assemble_cs(&pop, &dec, 2).unwrap();
    let sos = dualize(&rp);
    assert_eq!(sos.equations.len(), rp.npositions() - 1);
    assert_eq!(sos.multipliers, rp.eq_rows.len());
    assert_eq!(sos.gram_sizes, rp.block_sizes());
}

#[test]
fn rollout_moments_satisfy_the_relaxation() {
    let p = DoubleIntegratorParams::default();
    let pop = make_double_integrator(&p).unwrap();
    let x = double_integrator_rollout(&p).unwrap();
    let dec = decompose(&pop, &CsOption::new(CsMode::Md)).unwrap();
    let rp = assemble_cs(&pop, &dec, 2).unwrap();
    check_dirac(&pop, &rp, &x);
}

fn check_dirac(pop: &Pop, rp: &RelaxationProblem, x: &[f64]) {
    let y = rp.dirac(x);
    let f = pop.objective().eval(x);
    assert!((rp.objective_at(&y) - f).abs() <= 1e-9 * (1.0 + f.abs()));
    for row in &rp.eq_rows {
        assert!(row.form.eval(&y).abs() <= 1e-9, "{}", row.label);
    }
    for b in &rp.blocks {
        let m = b.matrix(&y);
        assert!(min_eigenvalue(&m) >= -1e-9 * (1.0 + m.norm()), "{}", b.label);
    }
}

#[test]
fn sdpa_round_trip_on_generated_instances() {
    let mut cases: Vec<RelaxationProblem> = Vec::new();
    for n in 1..=3 {
        let pop = make_double_integrator(&DoubleIntegratorParams::with_steps(n)).unwrap();
        let dec = decompose(&pop, &CsOption::new(CsMode::Md)).unwrap();
        cases.push(assemble_cs(&pop, &dec, 2).unwrap());
        let masks = build_masks(&pop, &dec, &TsOption::new(TsMode::Md), 2).unwrap();
        cases.push(assemble_cs_ts(&pop, &dec, &masks, 2).unwrap());
    }
    cases.push(assemble_dense(&make_separable_modes(4).unwrap(), 2).unwrap());
    for rp in cases {
        let text = export_sdpa(&rp);
        let back = import_sdpa(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.m, rp.npositions() - 1);
        let sizes: Vec<i64> = rp.block_sizes().iter().map(|&s| s as i64).collect();
        assert_eq!(back.blocks[..sizes.len()], sizes[..]);
    }
}

#[test]
fn sdpa_import_rejects_asymmetric_duplicates() {
    let text = "1\n1\n2\n0.5\n1 1 1 2 1.0\n1 1 2 1 2.0\n";
    assert!(matches!(import_sdpa(text), Err(Error::Sdpa { line: 6, .. })));
    let text = "1\n1\n-2\n0.5\n1 1 1 2 1.0\n";
    assert!(matches!(import_sdpa(text), Err(Error::Sdpa { line: 5, .. })));
    assert!(matches!(import_sdpa("1\n1\n2\n"), Err(Error::Sdpa { .. })));
}

fn arb_case() -> impl Strategy<Value = (Pop, Vec<f64>)> {
    let term = (prop::collection::vec(0u32..3, 3), -3i32..4);
    (prop::collection::vec(term.clone(), 1..6), prop::collection::vec(term, 1..4), prop::collection::vec(-1.5f64..1.5, 3))
        .prop_map(|(f, g, x)| {
            let poly = |t: Vec<(Vec<u32>, i32)>| {
                Polynomial::from_terms(3, t.into_iter().map(|(e, c)| (Monomial::from_dense(&e), c as f64)))
            };
            let names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
            let g = poly(g);
            let shift = Polynomial::constant(3, (-g.eval(&x)).max(0.0) + 0.5);
            let pop = Pop::new(names, poly(f), vec![g.try_add(&shift).unwrap()], vec![]).unwrap();
            (pop, x)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn point_moments_reproduce_every_block(case in arb_case()) {
        let (pop, x) = case;
        let d = compute_dmin(&pop);
        for mode in [CsMode::Non, CsMode::Md] {
            let dec = decompose(&pop, &CsOption::new(mode)).unwrap();
            check_dirac(&pop, &assemble_cs(&pop, &dec, d).unwrap(), &x);
            let masks = build_masks(&pop, &dec, &TsOption::new(TsMode::Md), d).unwrap();
            check_dirac(&pop, &assemble_cs_ts(&pop, &dec, &masks, d).unwrap(), &x);
        }
        let rp = assemble_dense(&pop, d).unwrap();
        let text = export_sdpa(&rp);
        prop_assert_eq!(import_sdpa(&text).unwrap().to_text(), text);
    }
}
