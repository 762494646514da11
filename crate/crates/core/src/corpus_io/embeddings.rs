//! Binary embedding files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   4 bytes  "SYAL"
//! version u32      1
//! rows    u32      N
//! dim     u32      d
//! fprint  u64      FNV-1a of the bound corpus ids
//! data    N*d f32  row-major IEEE-754
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::hashing::corpus_fingerprint;
use super::record::Corpus;

pub const EMBEDDING_MAGIC: [u8; 4] = *b"SYAL";
pub const EMBEDDING_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic bytes {0:?}, expected \"SYAL\"")]
    BadMagic([u8; 4]),
    #[error("unsupported embedding format version {0}")]
    UnsupportedVersion(u32),
    #[error("file holds {found} bytes but the header implies {expected}")]
    Truncated { expected: usize, found: usize },
    #[error("embedding has {found} rows but the corpus has {expected} records")]
    RowCountMismatch { expected: usize, found: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("corpus fingerprint mismatch: file {found:#018x}, corpus {expected:#018x}")]
    FingerprintMismatch { expected: u64, found: u64 },
    #[error("embedding dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("data length {len} does not match {rows}x{dim}")]
    BadShape { rows: usize, dim: usize, len: usize },
}

/// `N x d` matrix of `f32` embeddings, row-aligned with a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f32>,
    fingerprint: u64,
}

impl EmbeddingMatrix {
    pub fn new(
        rows: usize,
        dim: usize,
        data: Vec<f32>,
        fingerprint: u64,
    ) -> Result<Self, EmbeddingError> {
        if dim < 2 {
            return Err(EmbeddingError::DimensionTooSmall(dim));
        }
        if rows.checked_mul(dim) != Some(data.len()) {
            return Err(EmbeddingError::BadShape {
                rows,
                dim,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self {
            rows,
            dim,
            data,
            fingerprint,
        })
    }

    /// Builds a matrix from `f64` rows, rounding to `f32`.
    pub fn from_rows_f64<R: AsRef<[f64]>>(
        rows: &[R],
        fingerprint: u64,
    ) -> Result<Self, EmbeddingError> {
        let dim = rows.first().map_or(2, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(EmbeddingError::BadShape {
                    rows: rows.len(),
                    dim,
                    len: r.len(),
                });
            }
            data.extend(r.iter().map(|&v| v as f32));
        }
        Self::new(rows.len(), dim, data, fingerprint)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Same data, bound to a different corpus fingerprint.
    pub fn bound_to(mut self, fingerprint: u64) -> Self {
        self.fingerprint = fingerprint;
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.data.len() * 4);
        out.extend_from_slice(&EMBEDDING_MAGIC);
        out.extend_from_slice(&EMBEDDING_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&self.fingerprint.to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EmbeddingError> {
        if bytes.len() < HEADER_LEN {
            return Err(EmbeddingError::Truncated {
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != EMBEDDING_MAGIC {
            return Err(EmbeddingError::BadMagic(magic));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != EMBEDDING_VERSION {
            return Err(EmbeddingError::UnsupportedVersion(version));
        }
        let rows = u32_at(8) as usize;
        let dim = u32_at(12) as usize;
        let fingerprint = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let expected = HEADER_LEN + rows * dim * 4;
        if bytes.len() != expected {
            return Err(EmbeddingError::Truncated {
                expected,
                found: bytes.len(),
            });
        }
        let data = bytes[HEADER_LEN..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(rows, dim, data, fingerprint)
    }
}

pub fn save_embeddings(path: impl AsRef<Path>, m: &EmbeddingMatrix) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    fs::write(path, m.to_bytes()).map_err(|source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads an embedding file without checking it against a corpus.
pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix, EmbeddingError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    EmbeddingMatrix::from_bytes(&bytes)
}

/// Reads an embedding file and checks row count and fingerprint against
/// `corpus`.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    corpus: &Corpus,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    let m = read_embeddings(path)?;
    if m.rows() != corpus.len() {
        return Err(EmbeddingError::RowCountMismatch {
            expected: corpus.len(),
            found: m.rows(),
        });
    }
    let expected = corpus_fingerprint(corpus);
    if m.fingerprint() != expected {
        return Err(EmbeddingError::FingerprintMismatch {
            expected,
            found: m.fingerprint(),
        });
    }
    Ok(m)
}
