#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use synthcurate::alignment::ProjectionSet;
use synthcurate::gp_sampler::{ExponentForm, KernelConfig};
use synthcurate::Matrix;

pub fn kernel_value(a: &[f64], b: &[f64], cfg: &KernelConfig) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let d = match cfg.exponent_form {
        ExponentForm::Unsquared => sq.sqrt(),
        ExponentForm::Squared => sq,
    };
    (-d / (2.0 * cfg.tau)).exp()
}

/// Posterior variances from scratch: `1 - k_uS (K_SS + I)^-1 k_Su` for
/// unselected points, 0 for selected ones.
pub fn dense_posterior_variance(points: &Matrix, selected: &[usize], cfg: &KernelConfig) -> Vec<f64> {
    let n = points.rows();
    if selected.is_empty() {
        return vec![1.0; n];
    }
    let s = selected.len();
    let kss = DMatrix::from_fn(s, s, |i, j| {
        kernel_value(points.row(selected[i]), points.row(selected[j]), cfg) + if i == j { 1.0 } else { 0.0 }
    });
    let lu = kss.lu();
    (0..n)
        .map(|u| {
            if selected.contains(&u) {
                return 0.0;
            }
            let k = DVector::from_fn(s, |i, _| kernel_value(points.row(u), points.row(selected[i]), cfg));
            let alpha = lu.solve(&k).expect("K + I is nonsingular");
            1.0 - k.dot(&alpha)
        })
        .collect()
}

/// Unconstrained minimiser of the projected mean-matching loss, from the
/// normal equations of `min ||A w - b||^2` with `A = Theta E^T / M` and
/// `b = Theta mu`.
pub fn least_squares_weights(real: &Matrix, generated: &Matrix, projections: &ProjectionSet) -> Vec<f64> {
    let (m_gen, d) = (generated.rows(), generated.cols());
    let theta = DMatrix::from_fn(projections.count(), d, |i, j| projections.row(i)[j]);
    let e_t = DMatrix::from_fn(d, m_gen, |i, j| generated.row(j)[i] / m_gen as f64);
    let mu = DVector::from_fn(d, |i, _| {
        (0..real.rows()).map(|r| real.row(r)[i]).sum::<f64>() / real.rows() as f64
    });
    let a = &theta * e_t;
    let b = &theta * mu;
    let ata = a.transpose() * &a;
    let atb = a.transpose() * b;
    ata.lu().solve(&atb).expect("full column rank").iter().copied().collect()
}

/// Central differences of `f` at `x` with step `h`.
pub fn finite_difference_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|j| {
            probe[j] = x[j] + h;
            let up = f(&probe);
            probe[j] = x[j] - h;
            let down = f(&probe);
            probe[j] = x[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn random_matrix(rng: &mut impl rand::Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(-scale..scale)).collect();
    Matrix::new(rows, cols, data).unwrap()
}
