#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN
pub mod bayes;
pub mod channel;
pub mod cli;
pub mod error;
pub mod fidelity;
pub mod quadrature;
pub mod sagnac;
pub mod spectrum;

pub use error::{Error, Result};
