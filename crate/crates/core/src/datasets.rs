//! Seeded synthetic point sets used by the benchmark commands and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::matrix::Matrix;

/// Points drawn i.i.d. from an equal-weight isotropic Gaussian mixture,
/// with the component index of each point.
pub fn gaussian_mixture(
    centers: &[Vec<f64>],
    std_dev: f64,
    n: usize,
    seed: u64,
) -> (Matrix, Vec<usize>) {
    assert!(!centers.is_empty(), "mixture needs at least one centre");
    let dim = centers[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, std_dev).expect("finite standard deviation");
    let mut data = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.random_range(0..centers.len());
        labels.push(c);
        data.extend(centers[c].iter().map(|&m| m + noise.sample(&mut rng)));
    }
    (Matrix::new(n, dim, data).expect("shape is consistent"), labels)
}

/// Four-component 2-D mixture with centres at `(+-0.3, +-0.3)` and standard
/// deviation 0.1, roughly the spread of unit-normalised text embeddings.
pub fn four_cluster_2d(n: usize, seed: u64) -> (Matrix, Vec<usize>) {
    let centers = vec![
        vec![-0.3, -0.3],
        vec![0.3, -0.3],
        vec![-0.3, 0.3],
        vec![0.3, 0.3],
    ];
    gaussian_mixture(&centers, 0.1, n, seed)
}

/// Real and generated samples from the same two clusters with different
/// mixing proportions.
#[derive(Debug, Clone)]
pub struct BiasedPair {
    pub real: Matrix,
    pub real_labels: Vec<usize>,
    pub generated: Matrix,
    pub generated_labels: Vec<usize>,
}

/// Two clusters at `+-2 e_1` in `dim` dimensions with noise 0.5. Real
/// points are split 50/50 exactly, generated points
/// `round(gen_fraction_first * n_gen)` / rest.
pub fn biased_two_cluster(
    n_real: usize,
    n_gen: usize,
    gen_fraction_first: f64,
    dim: usize,
    seed: u64,
) -> BiasedPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.5).expect("finite standard deviation");
    let mut draw = |n: usize, n_first: usize| {
        let mut data = Vec::with_capacity(n * dim);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let c = usize::from(i >= n_first);
            labels.push(c);
            for j in 0..dim {
                let center = if j == 0 { if c == 0 { -2.0 } else { 2.0 } } else { 0.0 };
                data.push(center + noise.sample(&mut rng));
            }
        }
        (Matrix::new(n, dim, data).expect("shape is consistent"), labels)
    };
    let (real, real_labels) = draw(n_real, n_real / 2);
    let n_first = (gen_fraction_first * n_gen as f64).round() as usize;
    let (generated, generated_labels) = draw(n_gen, n_first);
    BiasedPair {
        real,
        real_labels,
        generated,
        generated_labels,
    }
}
