use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Deserialize;
use serde_json::{json, Value};
use sparsepop::cs::{build_csp_graph, clique_report, cliques_from_names, decompose, CliqueDecomposition, CsMode, CsOption};
use sparsepop::extract::{certify, extract_naive, extract_robust};
use sparsepop::graph::{check_rip, chordal_cliques, Extension, Graph, GraphJson};
use sparsepop::models::{
    double_integrator_rollout, make_double_integrator, make_kinematic_chain, make_separable_modes,
    DoubleIntegratorParams,
};
use sparsepop::poly::{parse_pop, Monomial, Pop};
use sparsepop::relax::{assemble_cs_ts, compute_dmin};
use sparsepop::sdp::{export_sdpa, solve_side, suboptimality_gap, SolverConfig};
use sparsepop::ts::{build_masks, MaskSet, SelfBasis, TsMode, TsOption};

use crate::args::{Action, ExtractionArg, ModelArgs, ModelName, ModeArg, RunArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {msg}")]
    Input { path: PathBuf, msg: String },
    #[error(transparent)]
    Core(#[from] sparsepop::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Input { .. } => "input",
            CliError::Core(_) => "pipeline",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"error": {"kind": self.kind(), "message": self.to_string()}})
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Input { path: path.to_path_buf(), msg: e.to_string() })
}

fn validate(args: &RunArgs) -> Result<()> {
    let sources = [args.input.is_some(), args.model.is_some(), args.graph.is_some()];
    if sources.iter().filter(|&&s| s).count() != 1 {
        return Err(CliError::Usage("exactly one of --input, --model or --graph is required".into()));
    }
    if args.cs == ModeArg::SelfDefined && args.cliques.is_none() {
        return Err(CliError::Usage("--cs self requires a clique file (--cliques)".into()));
    }
    if args.cliques.is_some() && args.cs != ModeArg::SelfDefined {
        return Err(CliError::Usage("--cliques is only used with --cs self".into()));
    }
    if args.ts == ModeArg::SelfDefined && args.bases.is_none() {
        return Err(CliError::Usage("--ts self requires a basis file (--bases)".into()));
    }
    if args.bases.is_some() && args.ts != ModeArg::SelfDefined {
        return Err(CliError::Usage("--bases is only used with --ts self".into()));
    }
    if args.partial && args.ts == ModeArg::Non {
        return Err(CliError::Usage("--partial needs a term sparsity mode other than non".into()));
    }
    if args.sparse_order == 0 {
        return Err(CliError::Usage("--sparse-order must be at least 1".into()));
    }
    if args.graph.is_some() {
        if args.action != Action::Report {
            return Err(CliError::Usage("--graph supports only --action report".into()));
        }
        if args.cs == ModeArg::SelfDefined {
            return Err(CliError::Usage("--graph cannot be combined with --cs self".into()));
        }
    }
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    Ok(())
}

type BuiltModel = (Pop, Option<Vec<Vec<usize>>>, Option<Vec<f64>>);

/// Builds a model; the double integrator also returns its rollout.
fn build_model(name: ModelName, horizon: usize, r: f64) -> Result<BuiltModel> {
    Ok(match name {
        ModelName::DoubleIntegrator => {
            let p = DoubleIntegratorParams::with_steps(horizon);
            (make_double_integrator(&p)?, None, Some(double_integrator_rollout(&p)?))
        }
        ModelName::SeparableModes => (make_separable_modes(horizon)?, None, None),
        ModelName::KinematicChain => {
            let (pop, cliques) = make_kinematic_chain(horizon, r)?;
            (pop, Some(cliques), None)
        }
    })
}

fn clique_names(pop: &Pop, cliques: &[Vec<usize>]) -> Vec<Vec<String>> {
    let names = pop.variable_names();
    cliques.iter().map(|c| c.iter().map(|&v| names[v].clone()).collect()).collect()
}

pub fn model(args: &ModelArgs) -> Result<()> {
    let (pop, cliques, _) = build_model(args.name, args.horizon, args.r)?;
    if let Some(path) = &args.cliques_out {
        let cliques = cliques.ok_or_else(|| CliError::Usage("--cliques-out is only available for kinematic-chain".into()))?;
        write_json(path, &clique_names(&pop, &cliques))?;
    }
    match &args.out {
        Some(path) => write(path, &pop.to_text()),
        None => {
            print!("{}", pop.to_text());
            Ok(())
        }
    }
}

fn extension(mode: CsMode) -> Option<Extension> {
    match mode {
        CsMode::Max => Some(Extension::Max),
        CsMode::Md => Some(Extension::MinDegree),
        CsMode::Mf => Some(Extension::MinFill),
        CsMode::Non | CsMode::SelfDefined => None,
    }
}

// `g` with every clique completed; fill edges are those not in `g`.
fn with_cliques(g: &Graph, cliques: &[Vec<usize>]) -> Graph {
    let mut h = g.clone();
    for c in cliques {
        for (i, &a) in c.iter().enumerate() {
            for &b in &c[i + 1..] {
                h.add_edge(a, b);
            }
        }
    }
    h
}

fn graph_report(args: &RunArgs, path: &Path) -> Result<()> {
    let json: GraphJson = read_json(path)?;
    let g = Graph::from_json(&json)?;
    let labels: Vec<String> = json.labels.clone().unwrap_or_else(|| (1..=g.n()).map(|v| format!("v{v}")).collect());
    let cliques = match extension(args.cs.into()) {
        Some(ext) => chordal_cliques(&g, ext).1,
        None => vec![(0..g.n()).collect()],
    };
    let rip = check_rip(&cliques);
    let dec = CliqueDecomposition {
        ineq_groups: vec![Vec::new(); cliques.len()],
        eq_groups: vec![Vec::new(); cliques.len()],
        cliques,
        rip,
        warnings: Vec::new(),
    };
    let h = with_cliques(&g, &dec.cliques);
    let fill = h.added_edges(&g);
    let report = clique_report(&dec, &labels);
    let mut value = serde_json::to_value(&report).expect("serializable");
    value["fill_edges"] = json!(fill.iter().map(|&(u, v)| [&labels[u], &labels[v]]).collect::<Vec<_>>());
    write_json(&args.out.join("clique_report.json"), &value)?;
    write(&args.out.join("csp.dot"), &h.to_dot(&labels, &dec.cliques, &fill))?;
    print!("{}", report.to_text());
    Ok(())
}

#[derive(Deserialize)]
struct BasisEntry {
    clique: usize,
    constraint: Option<usize>,
    monomials: Vec<String>,
}

fn parse_monomial(pop: &Pop, text: &str) -> std::result::Result<Monomial, String> {
    let text = text.trim();
    if text == "1" {
        return Ok(Monomial::one());
    }
    let mut pairs = Vec::new();
    for factor in text.split('*') {
        let (name, exp) = match factor.trim().split_once('^') {
            Some((n, e)) => (n.trim(), e.trim().parse::<u32>().map_err(|_| format!("bad exponent in `{text}`"))?),
            None => (factor.trim(), 1),
        };
        let v = pop.variable_index(name).ok_or_else(|| format!("unknown variable `{name}` in `{text}`"))?;
        pairs.push((v, exp));
    }
    Ok(Monomial::from_pairs(pairs))
}

fn read_bases(pop: &Pop, path: &Path) -> Result<Vec<SelfBasis>> {
    let entries: Vec<BasisEntry> = read_json(path)?;
    let bad = |msg: String| CliError::Input { path: path.to_path_buf(), msg };
    entries
        .into_iter()
        .map(|e| {
            if e.clique == 0 || e.constraint == Some(0) {
                return Err(bad("clique and constraint indices are 1-based".into()));
            }
            let monomials = e.monomials.iter().map(|m| parse_monomial(pop, m)).collect::<std::result::Result<_, _>>();
            Ok(SelfBasis { clique: e.clique - 1, constraint: e.constraint.map(|j| j - 1), monomials: monomials.map_err(bad)? })
        })
        .collect()
}

fn write_masks(out: &Path, pop: &Pop, masks: &MaskSet) -> Result<()> {
    let names = pop.variable_names();
    write_json(&out.join("masks.json"), &masks.records(names))?;
    let dir = out.join("tsp");
    fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    for cm in &masks.cliques {
        for mask in std::iter::once(&cm.moment).chain(&cm.localizing) {
            let name = match mask.constraint {
                None => format!("clique{}_moment.dot", mask.clique + 1),
                Some(j) => format!("clique{}_g{}.dot", mask.clique + 1, j + 1),
            };
            write(&dir.join(name), &mask.to_dot(names))?;
        }
    }
    Ok(())
}

pub fn run(args: &RunArgs) -> Result<()> {
    validate(args)?;
    if let Some(t) = args.threads {
        // Fails only when a pool already exists, which then keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    fs::create_dir_all(&args.out).map_err(|source| CliError::Io { path: args.out.clone(), source })?;
    write_json(&args.out.join("config.json"), args)?;
    if let Some(path) = &args.graph {
        return graph_report(args, path);
    }

    let convert = Instant::now();
    let (pop, rollout) = match (&args.input, args.model) {
        (Some(path), _) => (parse_pop(&read(path)?).map_err(|e| CliError::Input { path: path.clone(), msg: e.to_string() })?, None),
        (None, Some(name)) => {
            let (pop, _, rollout) = build_model(name, args.horizon, args.r)?;
            (pop, rollout)
        }
        (None, None) => unreachable!("validated"),
    };
    let names = pop.variable_names();
    let cs = match &args.cliques {
        Some(path) => {
            let listed: Vec<Vec<String>> = read_json(path)?;
            CsOption::user(cliques_from_names(&pop, &listed)?)
        }
        None => CsOption::new(args.cs.into()),
    };
    let dec = decompose(&pop, &cs)?;
    let d_min = compute_dmin(&pop);
    let d = args.d.unwrap_or(d_min);
    if d < d_min {
        return Err(sparsepop::Error::OrderTooLow { d: d as usize, d_min: d_min as usize }.into());
    }

    let report = clique_report(&dec, names);
    write_json(&args.out.join("clique_report.json"), &report)?;
    let csp = build_csp_graph(&pop);
    let extended = with_cliques(&csp, &dec.cliques);
    let fill = extended.added_edges(&csp);
    write(&args.out.join("csp.dot"), &extended.to_dot(names, &dec.cliques, &fill))?;
    print!("{}", report.to_text());

    let mut ts = TsOption::new(args.ts.into()).with_sparse_order(args.sparse_order).with_partial(args.partial);
    if let Some(path) = &args.bases {
        ts.self_bases = read_bases(&pop, path)?;
    }
    let masks = build_masks(&pop, &dec, &ts, d)?;
    if ts.mode != TsMode::Non {
        write_masks(&args.out, &pop, &masks)?;
    }
    if args.action == Action::Report {
        return Ok(());
    }

    let rp = assemble_cs_ts(&pop, &dec, &masks, d)?;
    let conversion_seconds = convert.elapsed().as_secs_f64();
    println!("relaxation order {d}: {} PSD blocks, {} moments", rp.blocks.len(), rp.npositions());
    if matches!(args.action, Action::Export | Action::Full) {
        write(&args.out.join("relaxation.dat-s"), &export_sdpa(&rp))?;
    }
    if args.action == Action::Export {
        return Ok(());
    }

    let defaults = SolverConfig::default();
    let cfg = SolverConfig {
        max_iters: args.max_iters.unwrap_or(defaults.max_iters),
        eps_abs: args.eps_abs.unwrap_or(defaults.eps_abs),
        eps_rel: args.eps_rel.unwrap_or(defaults.eps_rel),
        rho: args.rho.unwrap_or(defaults.rho),
        time_limit: args.time_limit.or(defaults.time_limit),
        ..defaults
    };
    cfg.validate()?;
    let sol = solve_side(&rp, args.side.into(), &cfg)?;
    let lower = sol.objective_value;
    write_json(
        &args.out.join("solution.json"),
        &json!({
            "side": sol.side,
            "status": sol.status,
            "d": d,
            "lower_bound": lower,
            "dual_value": sol.dual_value,
            "eta_kkt": sol.kkt_max,
            "kkt_digits": -sol.kkt_max.log10(),
            "iterations": sol.iterations,
            "residuals": sol.residuals,
            "block_sizes": rp.block_sizes(),
            "moments": rp.npositions(),
            "timings": {"conversion_seconds": conversion_seconds, "solve_seconds": sol.solve_seconds},
        }),
    )?;
    println!(
        "{:?} after {} iterations: lower bound {lower:.8}, -log10(eta_kkt) {:.2}",
        sol.status,
        sol.iterations,
        -sol.kkt_max.log10()
    );
    if args.action == Action::Solve {
        return Ok(());
    }

    let result = match args.extraction {
        ExtractionArg::Naive => extract_naive(&pop, &rp, &sol.y_values)?,
        ExtractionArg::Robust => extract_robust(&pop, &rp, &sol.y_values)?,
    };
    let cert = certify(&pop, lower, &result, args.feas_tol);
    let mut value = result.to_json(names, &dec.cliques);
    value["certificate"] = serde_json::to_value(&cert).expect("serializable");
    if let Some(x) = &rollout {
        let upper = pop.objective().eval(x);
        value["rollout"] = json!({"upper_bound": upper, "eta_g": suboptimality_gap(lower, upper)});
        println!("rollout upper bound {upper:.8}, eta_g {:.3e}", suboptimality_gap(lower, upper));
    }
    write_json(&args.out.join("extraction.json"), &value)?;
    match cert.eta_g {
        Some(eta) => println!("extracted point certified: eta_g {eta:.3e}"),
        None => println!("extracted point violates the constraints by {:.3e}", cert.residual),
    }
    Ok(())
}
