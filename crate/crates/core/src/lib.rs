//! Sparse nonparametric additive models with group-structured sparsity.
//!
//! Components are fitted with Gaussian kernel smoothers. Three estimators
//! share one block coordinate descent loop: plain backfitting, SpAM
//! (componentwise soft-thresholding) and GroupSpAM (whole groups of
//! component functions are thresholded together). Overlapping groups are
//! handled by duplicating covariates into latent copies.

pub mod data;
pub mod error;
pub mod groups;
pub mod metrics;
pub mod model;
pub mod norm;
pub mod overlap;
pub mod path;
pub mod sim;
pub mod smoother;
pub mod solver;

pub use data::Dataset;
pub use error::{Error, Result};
pub use groups::{Group, GroupStructure};
pub use model::{Diagnostics, FittedModel, ModelParts, SolverConfig};
pub use smoother::SmootherSet;
pub use solver::Algorithm;
