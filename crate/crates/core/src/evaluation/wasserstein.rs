use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::EvalError;
use crate::matrix::{dot, Matrix};

pub const DEFAULT_SLICES: usize = 128;

/// Exact Wasserstein-1 distance between two 1-D empirical distributions
/// with uniform mass. Sorts both inputs in place.
///
/// Integrates `|Fa^-1(t) - Fb^-1(t)|` over the merged breakpoints of the two
/// quantile step functions; breakpoints are compared in integer units of
/// `1 / (n m)`, so unequal sizes need no interpolation.
pub fn wasserstein_1d(a: &mut [f64], b: &mut [f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return 0.0;
    }
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    if n == m {
        return a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64;
    }
    let total = (n as u128) * (m as u128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut t: u128 = 0;
    let mut acc = 0.0;
    while i < n && j < m {
        let next_a = (i as u128 + 1) * m as u128;
        let next_b = (j as u128 + 1) * n as u128;
        let next = next_a.min(next_b);
        acc += (next - t) as f64 * (a[i] - b[j]).abs();
        t = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    acc / total as f64
}

/// Average 1-D Wasserstein-1 distance over `n_slices` seeded random unit
/// directions.
pub fn sliced_wasserstein(
    a: &Matrix,
    b: &Matrix,
    n_slices: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    if a.cols() != b.cols() {
        return Err(EvalError::DimensionMismatch {
            left: a.cols(),
            right: b.cols(),
        });
    }
    if a.rows() == 0 || b.rows() == 0 {
        return Err(EvalError::Empty("point set"));
    }
    if n_slices == 0 {
        return Err(EvalError::InvalidParameter("n_slices must be at least 1".into()));
    }
    let d = a.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dir = vec![0.0; d];
    let mut pa = vec![0.0; a.rows()];
    let mut pb = vec![0.0; b.rows()];
    let mut total = 0.0;
    for _ in 0..n_slices {
        let norm = loop {
            dir.iter_mut()
                .for_each(|v| *v = StandardNormal.sample(&mut rng));
            let n = dot(&dir, &dir).sqrt();
            if n > 1e-12 {
                break n;
            }
        };
        dir.iter_mut().for_each(|v| *v /= norm);
        pa.iter_mut()
            .zip(a.iter_rows())
            .for_each(|(p, r)| *p = dot(&dir, r));
        pb.iter_mut()
            .zip(b.iter_rows())
            .for_each(|(p, r)| *p = dot(&dir, r));
        total += wasserstein_1d(&mut pa, &mut pb);
    }
    Ok(total / n_slices as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_d_closed_forms() {
        assert_eq!(wasserstein_1d(&mut [0.0], &mut [1.0]), 1.0);
        // {0, 1} vs {0}: half the mass moves by 1.
        assert!((wasserstein_1d(&mut [0.0, 1.0], &mut [0.0]) - 0.5).abs() < 1e-15);
        // {0,1,2} vs {0,2}: quantiles differ only on (1/3, 1/2) and (1/2, 2/3).
        let w = wasserstein_1d(&mut [0.0, 1.0, 2.0], &mut [0.0, 2.0]);
        assert!((w - (1.0 / 6.0 + 1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn unequal_sizes_match_cdf_integral() {
        // W1 = integral |Fa(x) - Fb(x)| dx, evaluated on a fine grid.
        let a = [0.1, 0.7, 1.9, 2.2, 3.0];
        let b = [0.0, 1.1, 2.5];
        let cdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
        let steps = 400_000;
        let (lo, hi) = (-0.5, 3.5);
        let h = (hi - lo) / steps as f64;
        let integral: f64 = (0..steps)
            .map(|k| {
                let x = lo + (k as f64 + 0.5) * h;
                (cdf(&a, x) - cdf(&b, x)).abs() * h
            })
            .sum();
        let w = wasserstein_1d(&mut a.clone(), &mut b.clone());
        assert!((w - integral).abs() < 1e-4, "{w} vs {integral}");
    }

    #[test]
    fn point_masses_in_one_dimension() {
        let a = Matrix::column(&[0.0]);
        let b = Matrix::column(&[1.0]);
        for seed in 0..4 {
            let w = sliced_wasserstein(&a, &b, 16, seed).unwrap();
            assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_and_symmetric() {
        let a = Matrix::from_rows(&[[0.0, 1.0, 2.0], [1.0, -1.0, 0.5], [3.0, 3.0, 3.0]]).unwrap();
        let b = Matrix::from_rows(&[[0.5, 0.5, 0.5], [2.0, 0.0, -1.0]]).unwrap();
        assert!(sliced_wasserstein(&a, &a, 32, 1).unwrap() < 1e-12);
        let ab = sliced_wasserstein(&a, &b, 32, 1).unwrap();
        let ba = sliced_wasserstein(&b, &a, 32, 1).unwrap();
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let a = Matrix::column(&[0.0]);
        let b = Matrix::from_rows(&[[0.0, 1.0]]).unwrap();
        assert!(sliced_wasserstein(&a, &b, 4, 0).is_err());
        assert!(sliced_wasserstein(&a, &a, 0, 0).is_err());
        assert!(sliced_wasserstein(&Matrix::zeros(0, 1), &a, 4, 0).is_err());
    }
}
