#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod characterize;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod insertion;
pub mod material;
pub mod solver;

pub use error::{Error, Result};
