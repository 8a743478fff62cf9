//! Loss hotspot localisation on tree measurement topologies.
//!
//! Path loss observations over a tree of unicast paths determine link loss
//! only up to a `(n - m)`-dimensional family. This crate selects the sparsest
//! and minimum-`l1` members of that family, both for exact observations
//! ([`noiseless`]) and for per-path confidence intervals ([`noisy`]), and
//! ships brute-force oracles ([`oracle`]), a binary-tomography baseline
//! ([`baselines`]) and a probing simulator ([`simulation`]) to check them.

pub mod baselines;
pub mod error;
pub mod fixtures;
pub mod lossmodel;
pub mod noiseless;
pub mod noisy;
pub mod oracle;
mod par;
pub mod rng;
pub mod simulation;
pub mod topology;

pub use error::{Error, Result};
pub use lossmodel::TOL;
pub use topology::{build_tree, LogicalTree, MeasurementMatrix, ROOT};
