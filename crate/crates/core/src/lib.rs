//! Multimarginal optimal transport and its reduction to tuple minimization.

pub mod cli;
pub mod corpus;
pub mod cost;
pub mod error;
pub mod io;
pub mod lab;
pub mod limits;
pub mod lp;
pub mod min;
pub mod mot;
pub mod reduction;
pub mod tensor;

pub use error::{Error, Result};
