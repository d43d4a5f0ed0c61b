//! Monomials, sparse polynomials, monomial bases, the POP container and its
//! text format, and the Riesz functional.

mod basis;
mod monomial;
mod parse;
mod polynomial;
mod pop;
mod riesz;

pub use basis::{basis_len, monomial_basis, MonomialBasis};
pub use monomial::Monomial;
pub use parse::{parse_pop, parse_pop_with};
pub use polynomial::{ArithOp, Coefficient, Polynomial};
pub use pop::Pop;
pub use riesz::{riesz_apply, riesz_apply_frozen, riesz_localizing, riesz_vector, LinearForm, MomentSequence};
