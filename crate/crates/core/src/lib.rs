#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod decay;
pub mod energy;
pub mod error;
pub mod io;
pub mod kernels;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
