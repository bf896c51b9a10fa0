//! Weighted Dirichlet spaces, weak multiplicativity of moment tables and
//! de Branges–Rovnyak models.

// Guards like `!(x < 1.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dbr;
pub mod dirichlet;
pub mod error;
pub mod moments;
pub mod quadrature;
pub mod series;
pub mod weights;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/moments.md")]
    pub struct Moments;
    #[doc = include_str!("../../../book/src/weights.md")]
    pub struct Weights;
    #[doc = include_str!("../../../book/src/dirichlet.md")]
    pub struct Dirichlet;
    #[doc = include_str!("../../../book/src/dbr.md")]
    pub struct Dbr;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
