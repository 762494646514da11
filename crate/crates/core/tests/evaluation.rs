use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use synthcurate::evaluation::{
    convex_hull, coverage_curve, project_2d, sliced_wasserstein, HullSet, Point2D, ProjectionMode,
};
use synthcurate::Matrix;

#[test]
fn translated_gaussian_sample_distance() {
    // Translating by v gives sliced W1 = E|theta . v| = 2/pi in 2-D for |v| = 1.
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let data: Vec<f64> = (0..4000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let a = Matrix::new(2000, 2, data).unwrap();
    let b = a.translated(&[1.0, 0.0]);
    let sw = sliced_wasserstein(&a, &b, 400, 1).unwrap();
    assert!((sw - 2.0 / std::f64::consts::PI).abs() < 0.05, "{sw}");
}

#[test]
fn hulls_merge_into_one_area() {
    let square = |x0: f64, i0: usize| {
        convex_hull(&[
            Point2D::new(x0, 0.0, i0),
            Point2D::new(x0 + 2.0, 0.0, i0 + 1),
            Point2D::new(x0 + 2.0, 2.0, i0 + 2),
            Point2D::new(x0, 2.0, i0 + 3),
        ])
    };
    let mut set = HullSet::new();
    set.insert(square(0.0, 0));
    set.insert(square(5.0, 4));
    assert_eq!(set.len(), 2);
    assert!((set.total_area() - 8.0).abs() < 1e-12);
    set.insert(square(1.0, 8));
    assert_eq!(set.len(), 2);
    assert!((set.total_area() - 10.0).abs() < 1e-12);
    // Touches both remaining hulls, so everything collapses into one.
    set.insert(square(3.0, 12));
    assert_eq!(set.len(), 1);
    assert!((set.total_area() - 14.0).abs() < 1e-12);
}

#[test]
fn coverage_on_a_grid() {
    let mut pts = Vec::new();
    for i in 0..10 {
        for j in 0..10 {
            pts.push(Point2D::new(i as f64, j as f64, pts.len()));
        }
    }
    let order: Vec<usize> = (0..100).collect();
    let report = coverage_curve(&pts, &order, 8, 100).unwrap();
    assert_eq!(report.rates.len(), 100);
    for w in report.rates.windows(2) {
        assert!(w[1] >= w[0]);
    }
    assert!((report.final_rate() - 1.0).abs() < 1e-9);
}

#[test]
fn pca_recovers_dominant_axis() {
    let rows: Vec<[f64; 3]> = (0..20)
        .map(|i| {
            let t = i as f64 - 9.5;
            [3.0 * t, 0.1 * (i % 3) as f64, 5.0]
        })
        .collect();
    let m = Matrix::from_rows(&rows).unwrap();
    let p = project_2d(&m, ProjectionMode::Pca, None).unwrap();
    for (i, pt) in p.iter().enumerate() {
        assert!((pt.x.abs() - 3.0 * (i as f64 - 9.5).abs()).abs() < 1e-2);
    }
}
