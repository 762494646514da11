use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::AlignError;
use crate::matrix::{dot, Matrix};

const RESIDUAL_FLOOR: f64 = 1e-8;

/// Family of unit projection directions, orthonormal within consecutive
/// blocks of `dim` rows. Fully determined by `(dim, count, seed)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSet {
    vectors: Matrix,
    seed: u64,
}

impl ProjectionSet {
    /// Wraps explicit directions (rows are used as given).
    pub fn from_matrix(vectors: Matrix, seed: u64) -> Self {
        Self { vectors, seed }
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn count(&self) -> usize {
        self.vectors.rows()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.vectors.row(i)
    }

    /// Row ranges of the orthonormal blocks.
    pub fn blocks(&self) -> impl Iterator<Item = std::ops::Range<usize>> {
        let (d, m) = (self.dim().max(1), self.count());
        (0..m).step_by(d).map(move |s| s..(s + d).min(m))
    }
}

/// Draws `count` standard-normal directions in `R^dim` and orthonormalises
/// them block-wise: each row is made orthogonal to the earlier rows of its
/// block (classical Gram-Schmidt, applied twice) and normalised. A new block
/// starts every `dim` rows. Candidates whose residual norm falls below
/// `1e-8` are redrawn.
pub fn gram_schmidt_projections(
    dim: usize,
    count: usize,
    seed: u64,
) -> Result<ProjectionSet, AlignError> {
    if dim < 2 {
        return Err(AlignError::InvalidParameter(format!(
            "projection dimension must be at least 2, got {dim}"
        )));
    }
    if count == 0 {
        return Err(AlignError::InvalidParameter(
            "projection count must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = Matrix::zeros(count, dim);
    let mut candidate = vec![0.0; dim];
    for i in 0..count {
        let block_start = i - i % dim;
        loop {
            candidate
                .iter_mut()
                .for_each(|v| *v = StandardNormal.sample(&mut rng));
            for _ in 0..2 {
                for j in block_start..i {
                    let prev = vectors.row(j);
                    let c = dot(&candidate, prev);
                    candidate.iter_mut().zip(prev).for_each(|(v, p)| *v -= c * p);
                }
            }
            let norm = dot(&candidate, &candidate).sqrt();
            if norm >= RESIDUAL_FLOOR {
                vectors
                    .row_mut(i)
                    .iter_mut()
                    .zip(&candidate)
                    .for_each(|(o, v)| *o = v / norm);
                break;
            }
        }
    }
    Ok(ProjectionSet { vectors, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(dim: usize, count: usize, seed: u64) {
        let p = gram_schmidt_projections(dim, count, seed).unwrap();
        assert_eq!((p.dim(), p.count()), (dim, count));
        for i in 0..count {
            assert!((dot(p.row(i), p.row(i)).sqrt() - 1.0).abs() < 1e-6);
        }
        for block in p.blocks() {
            for i in block.clone() {
                for j in block.start..i {
                    assert!(dot(p.row(i), p.row(j)).abs() <= 1e-6, "rows {i},{j}");
                }
            }
        }
    }

    #[test]
    fn small_cases() {
        for seed in 0..5 {
            check(2, 2, seed);
            check(3, 3, seed);
        }
    }

    #[test]
    fn blocks_for_more_rows_than_dims() {
        let p = gram_schmidt_projections(4, 10, 9).unwrap();
        let sizes: Vec<usize> = p.blocks().map(|b| b.len()).collect();
        assert_eq!(sizes, vec![4, 4, 2]);
        // Gram matrix of each block is the identity.
        for block in p.blocks() {
            for i in block.clone() {
                for j in block.clone() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(p.row(i), p.row(j)) - want).abs() < 1e-9);
                }
            }
        }
        check(4, 10, 1);
    }

    #[test]
    fn seeded() {
        assert_eq!(
            gram_schmidt_projections(8, 20, 3).unwrap(),
            gram_schmidt_projections(8, 20, 3).unwrap()
        );
        assert_ne!(
            gram_schmidt_projections(8, 20, 3).unwrap(),
            gram_schmidt_projections(8, 20, 4).unwrap()
        );
    }

    #[test]
    fn bad_parameters() {
        assert!(gram_schmidt_projections(1, 3, 0).is_err());
        assert!(gram_schmidt_projections(3, 0, 0).is_err());
    }
}
