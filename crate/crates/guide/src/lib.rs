//! Book listings compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/pop-format.md")]
mod pop_format {}
#[doc = include_str!("../../../book/src/correlative-sparsity.md")]
mod correlative_sparsity {}
#[doc = include_str!("../../../book/src/term-sparsity.md")]
mod term_sparsity {}
#[doc = include_str!("../../../book/src/solving.md")]
mod solving {}
#[doc = include_str!("../../../book/src/extraction.md")]
mod extraction {}
#[doc = include_str!("../../../book/src/models.md")]
mod models {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
#[doc = include_str!("../../../book/src/file-formats.md")]
mod file_formats {}
#[doc = include_str!("../../../README.md")]
mod readme {}
