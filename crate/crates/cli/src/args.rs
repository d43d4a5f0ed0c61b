use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sparsepop::cs::CsMode;
use sparsepop::sdp::Side;

#[derive(Debug, Parser)]
#[command(name = "sparsepop", version, about = "Sparse moment-SOS relaxations for polynomial optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose, relax, solve and extract.
    Run(RunArgs),
    /// Print a built-in model in the POP text format.
    Model(ModelArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    DoubleIntegrator,
    SeparableModes,
    KinematicChain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Non,
    Max,
    Md,
    Mf,
    #[value(name = "self")]
    #[serde(rename = "self")]
    SelfDefined,
}

impl From<ModeArg> for CsMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Non => CsMode::Non,
            ModeArg::Max => CsMode::Max,
            ModeArg::Md => CsMode::Md,
            ModeArg::Mf => CsMode::Mf,
            ModeArg::SelfDefined => CsMode::SelfDefined,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    Moment,
    Sos,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Moment => Side::Moment,
            SideArg::Sos => Side::Sos,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    /// Clique report, CSP/TSP graphs and masks.
    Report,
    /// Report plus the SDPA file.
    Export,
    /// Report plus the solution.
    Solve,
    /// Everything, including minimizer extraction.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractionArg {
    Naive,
    Robust,
}

/// Options of `run`. Serialized as the resolved configuration, one key per
/// flag.
#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunArgs {
    /// POP text file.
    #[arg(long, conflicts_with_all = ["model", "graph"])]
    pub input: Option<PathBuf>,
    /// Built-in model.
    #[arg(long, value_enum, conflicts_with = "graph")]
    pub model: Option<ModelName>,
    /// Graph JSON `{"n", "edges", "labels"}`; only with `--action report`.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Horizon of the built-in models, or the mode count of separable-modes.
    #[arg(long = "N", default_value_t = 3)]
    #[serde(rename = "N")]
    pub horizon: usize,
    /// Link length of kinematic-chain.
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Correlative sparsity mode.
    #[arg(long, value_enum, default_value = "md")]
    pub cs: ModeArg,
    /// Term sparsity mode.
    #[arg(long, value_enum, default_value = "non")]
    pub ts: ModeArg,
    /// Term sparsity rounds.
    #[arg(long, default_value_t = 1)]
    pub sparse_order: usize,
    /// Mask moment and localizing matrices only.
    #[arg(long)]
    pub partial: bool,
    /// JSON list of variable-name lists, for `--cs self`.
    #[arg(long)]
    pub cliques: Option<PathBuf>,
    /// JSON list of `{"clique", "constraint", "monomials"}`, for `--ts self`.
    #[arg(long)]
    pub bases: Option<PathBuf>,
    /// Relaxation order; defaults to the minimum order.
    #[arg(long)]
    pub d: Option<u32>,
    /// Which side of the primal-dual pair to hand to the solver.
    #[arg(long, value_enum, default_value = "sos")]
    pub side: SideArg,
    #[arg(long, value_enum, default_value = "full")]
    pub action: Action,
    /// Output directory.
    #[arg(long, env = "SPARSEPOP_OUT", default_value = "sparsepop-out")]
    pub out: PathBuf,
    /// Worker threads; 1 gives fully deterministic runs.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value = "robust")]
    pub extraction: ExtractionArg,
    /// Constraint violation accepted when certifying an extracted point.
    #[arg(long, default_value_t = 1e-6)]
    pub feas_tol: f64,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub eps_abs: Option<f64>,
    #[arg(long)]
    pub eps_rel: Option<f64>,
    /// Initial ADMM penalty.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Wall-clock limit of the solver in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(value_enum)]
    pub name: ModelName,
    /// Horizon, or the mode count of separable-modes.
    #[arg(long = "N", default_value_t = 3)]
    pub horizon: usize,
    /// Link length of kinematic-chain.
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Write the POP here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// For kinematic-chain: write the hand-made cliques as a JSON list of
    /// variable-name lists.
    #[arg(long)]
    pub cliques_out: Option<PathBuf>,
}
