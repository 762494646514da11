//! Alignment and diversity diagnostics.

mod coverage;
mod hull;
mod kdtree;
mod projection;
mod vocab;
mod wasserstein;

use thiserror::Error;

pub use coverage::{coverage_curve, CoverageReport};
pub use hull::{convex_hull, hull_of, HullSet, Point2D, Polygon};
pub use kdtree::KdTree2;
pub use projection::{load_coords_csv, project_2d, ProjectionMode};
pub use vocab::{vocabulary, vocabulary_size};
pub use wasserstein::{sliced_wasserstein, wasserstein_1d, DEFAULT_SLICES};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index {index} out of range for {len} points")]
    InvalidIndex { index: usize, len: usize },
    #[error("index {0} appears more than once in the sample order")]
    DuplicateIndex(usize),
    #[error("the reference points span zero area")]
    DegenerateGeometry,
    #[error("coordinate file has {found} rows, expected {expected}")]
    CoordsMismatch { expected: usize, found: usize },
    #[error("non-finite coordinate at row {0}")]
    NonFinite(usize),
    #[error("{0}")]
    Io(String),
}
