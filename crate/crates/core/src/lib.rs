//! Nonclassical (Q-conditional) symmetries of reaction-diffusion-convection
//! equations: symbolic verification, determining systems and numeric checks.

pub mod catalog;
pub mod cli;
pub mod error;
pub mod invariance;
pub mod numerics;
pub mod parser;
pub mod symexpr;

pub use error::{Error, NumericError, Result};
