pub mod circuit;
pub mod bqp;
pub mod compiler;
pub mod error;
pub mod fermion;
pub mod hadamard;
pub mod io;
pub mod lattice;
pub mod matrix;
pub mod spin_models;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/compiling.md")]
    mod compiling {}
    #[doc = include_str!("../../../book/src/free_fermions.md")]
    mod free_fermions {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/reductions.md")]
    mod reductions {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
