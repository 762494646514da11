//! Synthetic distribution alignment.
//!
//! Each synthetic sample gets a nonnegative weight. The weights are fitted
//! so that, along every direction of an orthogonalised random projection
//! family, the weighted synthetic mean matches the real mean. The
//! synthetic corpus is then resampled with replacement in proportion to
//! the weights.

mod io;
mod objective;
mod optimizer;
mod projections;
mod resample;

use thiserror::Error;

pub use io::{read_weights_csv, write_loss_csv, write_weights_csv};
pub use objective::{mmd_gradient, mmd_loss, MmdObjective};
pub use optimizer::{learn_weights, AlignmentWeights, OptimizerConfig, MAX_HALVINGS};
pub use projections::{gram_schmidt_projections, ProjectionSet};
pub use resample::resample;

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("{what}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{0} contains non-finite values")]
    NonFinite(&'static str),
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("loss became non-finite at iteration {iter} even after backtracking")]
    NonFiniteLoss { iter: usize },
    #[error("all weights are zero")]
    ZeroWeights,
    #[error("{0}")]
    Io(String),
}
