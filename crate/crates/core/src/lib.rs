//! Proportionate affine projection sign algorithms for block-sparse system
//! identification under impulsive noise.
//!
//! - [`filters`]: APSA, MIP-APSA and BS-MIP-APSA update rules.
//! - [`signal`]: seeded white, AR(1) and Bernoulli-Gaussian processes.
//! - [`echo_path`]: block-sparse true systems and path switching.
//! - [`harness`]: trials, ensembles and normalized misalignment.
//! - [`cli`]: configuration files, WAV input and output files.

pub mod cli;
pub mod echo_path;
pub mod error;
pub mod filters;
pub mod harness;
pub mod signal;

pub use error::{Error, Result};
pub use filters::{AdaptiveFilter, Algorithm, FilterParams, FilterState, GainVariant};
pub use harness::{ExperimentConfig, MisalignmentTrace};
