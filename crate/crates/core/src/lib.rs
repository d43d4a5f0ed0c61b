//! Sparse moment-SOS relaxations for polynomial optimization.
//!
//! The pipeline turns a polynomial optimization problem into a block
//! semidefinite program and back into candidate minimizers:
//!
//! 1. [`poly`]: polynomials, monomial bases and the POP text format.
//! 2. [`cs`]: correlative sparsity, splitting variables into cliques.
//! 3. [`ts`]: term sparsity, masking moment and localizing matrices.
//! 4. [`relax`]: assembling the moment relaxation and its SOS dual.
//! 5. [`sdp`]: an ADMM solver, KKT residuals and SDPA file exchange.
//! 6. [`extract`]: recovering minimizers and certifying them.
//!
//! ```
//! use sparsepop::prelude::*;
//!
//! let pop = parse_pop("vars x; min x^4 - x^2;").unwrap();
//! let dec = decompose(&pop, &CsOption::new(CsMode::Non)).unwrap();
//! let rp = assemble_cs(&pop, &dec, 2).unwrap();
//! let sol = solve(&rp, &SolverConfig::default()).unwrap();
//! assert!((sol.objective_value + 0.25).abs() < 1e-4);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cs;
mod error;
pub mod extract;
pub mod graph;
pub mod models;
pub mod poly;
pub mod relax;
pub mod sdp;
pub mod ts;

pub use error::{Error, Result};

/// The commonly used items of every module.
pub mod prelude {
    pub use crate::cs::{build_csp_graph, clique_report, decompose, CliqueDecomposition, CsMode, CsOption};
    pub use crate::extract::{certify, extract_naive, extract_robust, Certificate, ExtractionResult};
    pub use crate::graph::{check_rip, extend_max, extend_md, extend_mf, is_chordal, maximal_cliques, Graph};
    pub use crate::poly::{monomial_basis, parse_pop, Monomial, MonomialBasis, Polynomial, Pop};
    pub use crate::relax::{
        assemble_cs, assemble_cs_ts, assemble_dense, compute_dmin, dualize, RelaxationProblem, SosProblem,
    };
    pub use crate::sdp::{solve, solve_sos, suboptimality_gap, SdpSolution, SolverConfig, Status};
    pub use crate::ts::{build_masks, reduced_basis, TsMode, TsOption};
    pub use crate::{Error, Result};
}
