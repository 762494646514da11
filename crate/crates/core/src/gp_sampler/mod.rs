//! Exploration-aware demonstration sampling.
//!
//! A zero-mean Gaussian process with unit prior variance tracks how
//! uncertain each real sample still is. Each round takes the most uncertain
//! sample plus its nearest neighbours as few-shot demonstrations, then
//! conditions the process on them so nearby samples lose uncertainty.

mod io;
mod kernel;
mod tracker;

use thiserror::Error;

pub use io::{read_batches, write_batches, write_variance_csv, BatchRecord};
pub use kernel::{rbf_kernel, ExponentForm, KernelConfig};
pub use tracker::{init_tracker, DemonstrationBatch, TrackerState, JITTER};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("kernel bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("vector dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cannot track uncertainty over an empty corpus")]
    EmptyCorpus,
    #[error("embeddings contain non-finite values")]
    NonFinite,
    #[error("batch size k must be at least 1, got {0}")]
    InvalidK(usize),
    #[error("requested {requested} demonstrations but only {available} unselected samples remain")]
    NotEnoughUnselected { requested: usize, available: usize },
    #[error("sample {0} is already selected")]
    AlreadySelected(usize),
    #[error("index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid batch: {0}")]
    InvalidBatch(String),
    #[error("threshold sigma must lie in (0, 1), got {0}")]
    InvalidSigma(f64),
    #[error("max_rounds must be at least 1")]
    InvalidMaxRounds,
    #[error("Cholesky factorisation failed (pivot {pivot:e})")]
    FactorizationFailed { pivot: f64 },
    #[error("batch file: {0}")]
    Io(String),
}
