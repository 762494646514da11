mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{finite_difference_gradient, least_squares_weights, random_matrix};
use synthcurate::alignment::{
    gram_schmidt_projections, learn_weights, mmd_gradient, mmd_loss, read_weights_csv, resample,
    write_weights_csv, OptimizerConfig,
};
use synthcurate::corpus_io::{Corpus, TextRecord};
use synthcurate::datasets::biased_two_cluster;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..10 {
        let d = rng.random_range(2..=8);
        let (n_real, n_gen) = (rng.random_range(1..=30), rng.random_range(1..=30));
        let real = random_matrix(&mut rng, n_real, d, 1.0);
        let gen = random_matrix(&mut rng, n_gen, d, 1.0);
        let p = gram_schmidt_projections(d, 25, case).unwrap();
        let omega: Vec<f64> = (0..gen.rows()).map(|_| rng.random_range(0.0..2.0)).collect();
        let g = mmd_gradient(&real, &gen, &omega, &p).unwrap();
        let fd = finite_difference_gradient(|w| mmd_loss(&real, &gen, w, &p).unwrap(), &omega, 1e-5);
        let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        assert!(norm(&diff) <= 1e-6 * norm(&g).max(1e-12), "case {case}");
    }
}

#[test]
fn unconstrained_fit_reaches_least_squares_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n_gen = 6;
    let real = random_matrix(&mut rng, 15, 18, 1.0);
    let gen = random_matrix(&mut rng, n_gen, 18, 1.0);
    let p = gram_schmidt_projections(18, 20, 1).unwrap();
    let cfg = OptimizerConfig {
        nonneg_projection: false,
        tol: 1e-16,
        max_iters: 50_000,
        ..Default::default()
    };
    let fit = learn_weights(&real, &gen, &p, &cfg).unwrap();
    let oracle = least_squares_weights(&real, &gen, &p);
    for (a, b) in fit.weights.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }
}

#[test]
fn identical_sets_keep_uniform_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let e = random_matrix(&mut rng, 20, 4, 1.0);
    let p = gram_schmidt_projections(4, 100, 0).unwrap();
    let fit = learn_weights(&e, &e, &p, &OptimizerConfig::default()).unwrap();
    assert!(fit.initial_loss() < 1e-20);
    assert!(fit.final_loss() < 1e-20);
    assert!(fit.weights.iter().all(|w| (w - 1.0).abs() < 1e-12));
}

#[test]
fn biased_mixture_loss_drops_tenfold() {
    let pair = biased_two_cluster(200, 300, 0.8, 6, 4);
    let p = gram_schmidt_projections(6, 100, 4).unwrap();
    let fit = learn_weights(&pair.real, &pair.generated, &p, &OptimizerConfig::default()).unwrap();
    assert!(fit.final_loss() <= 0.1 * fit.initial_loss());
    for w in fit.loss_trace.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

fn corpus(n: usize) -> Corpus {
    Corpus::new(
        (0..n).map(|i| TextRecord::synthetic(format!("g{i}"), format!("text {i}"), "p")).collect(),
        None,
    )
    .unwrap()
}

#[test]
fn resampling_follows_weights() {
    let gen = corpus(3);
    let out = resample(&gen, &[0.0, 1.0, 3.0], 4000, 11).unwrap();
    assert_eq!(out.len(), 4000);
    let count = |id: &str| {
        out.records()
            .iter()
            .filter(|r| r.id == id || r.meta.get("parent_id").map(String::as_str) == Some(id))
            .count()
    };
    assert_eq!(count("g0"), 0);
    let share = count("g2") as f64 / 4000.0;
    assert!((share - 0.75).abs() < 0.03, "{share}");
    assert_eq!(resample(&gen, &[0.0, 1.0, 3.0], 4000, 11).unwrap(), out);
}

#[test]
fn weights_csv_round_trip() {
    let gen = corpus(3);
    let f = tempfile::NamedTempFile::new().unwrap();
    let w = [0.125, 1.0 / 3.0, 2.5e-9];
    write_weights_csv(f.path(), &gen, &w).unwrap();
    assert_eq!(read_weights_csv(f.path(), &gen).unwrap(), w);
    assert!(read_weights_csv(f.path(), &corpus(2)).is_err());
}
