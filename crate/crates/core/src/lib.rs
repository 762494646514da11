//! Synthetic text data curation toolkit.
//!
//! The crate covers the full loop from real corpus to curated synthetic
//! corpus:
//!
//! * [`corpus_io`]: labeled text records, the binary embedding format and a
//!   deterministic feature-hashing embedder for offline runs.
//! * [`gp_sampler`]: a Gaussian-process uncertainty tracker that picks the
//!   most uncertain real sample plus its nearest neighbours as few-shot
//!   demonstrations, then conditions on them.
//! * [`attribute_reasoning`]: two-stage prompting (attribute summary, then
//!   attribute-conditioned generation) against any chat-completion backend.
//! * [`alignment`]: random-projection mean matching over per-sample weights
//!   followed by weighted resampling with replacement.
//! * [`evaluation`]: sliced Wasserstein distance, convex-hull coverage
//!   curves and vocabulary size.
//! * [`pipeline`]: configuration, stage commands and run manifests used by
//!   the `synthcurate` binary.

pub mod alignment;
pub mod attribute_reasoning;
pub mod corpus_io;
pub mod datasets;
pub mod evaluation;
pub mod gp_sampler;
pub mod matrix;
pub mod pipeline;

pub use corpus_io::{Corpus, EmbeddingMatrix, Source, TextRecord};
pub use matrix::Matrix;
