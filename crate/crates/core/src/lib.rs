// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod control;
pub mod error;
pub mod model;
pub mod params;
pub mod simulation;
pub mod trajectory;

pub use error::{Error, Result};
