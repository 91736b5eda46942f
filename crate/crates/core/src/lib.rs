//! Monte Carlo simulation of the fair-coin fragmentation-coagulation chain on
//! uniform random trees, and of its two-time-scale continuum limit on reduced
//! continuum random trees.
//!
//! The discrete side lives in [`random_trees`], [`dynamic_forest`] and
//! [`frag_coag_chain`]; the limit side in [`crt_limit`]. [`urn_model`] is the
//! elementary two-urn exhibit, [`stats`] the comparison machinery and
//! [`cli_harness`] the reproducible experiment runner.

pub mod cli_harness;
pub mod crt_limit;
pub mod dynamic_forest;
mod error;
pub mod frag_coag_chain;
mod mass;
pub mod random_trees;
pub mod stats;
pub mod urn_model;

pub use error::{Error, Result};
pub use mass::MassPartition;
