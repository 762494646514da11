use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::hull::Point2D;
use super::EvalError;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionMode {
    #[default]
    Pca,
    Precomputed,
}

/// Reduces embeddings to 2-D points.
///
/// `Pca` returns the scores on the two leading principal components, each
/// component signed so its first non-negligible loading is positive;
/// components with (numerically) zero variance score 0. `Precomputed`
/// reads `x,y` rows from `coords_path` and checks the row count.
pub fn project_2d(
    embeddings: &Matrix,
    mode: ProjectionMode,
    coords_path: Option<&Path>,
) -> Result<Vec<Point2D>, EvalError> {
    match mode {
        ProjectionMode::Pca => pca_2d(embeddings),
        ProjectionMode::Precomputed => {
            let path = coords_path.ok_or_else(|| {
                EvalError::InvalidParameter("precomputed projection needs a coordinate file".into())
            })?;
            let coords = load_coords_csv(path)?;
            if coords.len() != embeddings.rows() {
                return Err(EvalError::CoordsMismatch {
                    expected: embeddings.rows(),
                    found: coords.len(),
                });
            }
            Ok(coords
                .into_iter()
                .enumerate()
                .map(|(i, [x, y])| Point2D::new(x, y, i))
                .collect())
        }
    }
}

fn pca_2d(e: &Matrix) -> Result<Vec<Point2D>, EvalError> {
    let (n, d) = (e.rows(), e.cols());
    if n < 2 {
        return Err(EvalError::InvalidParameter(format!(
            "PCA needs at least 2 points, got {n}"
        )));
    }
    if !e.is_finite() {
        return Err(EvalError::NonFinite(
            (0..n).find(|&i| e.row(i).iter().any(|v| !v.is_finite())).unwrap_or(0),
        ));
    }
    let mean = e.column_means();
    let centered = DMatrix::from_fn(n, d, |i, j| e.get(i, j) - mean[j]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let mut scores = vec![[0.0f64; 2]; n];
    for (c, &k) in order.iter().take(2).enumerate() {
        let lambda = eig.eigenvalues[k];
        if top == 0.0 || lambda <= 1e-12 * top {
            continue;
        }
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        for (i, s) in scores.iter_mut().enumerate() {
            s[c] = centered.row(i).iter().zip(&v).map(|(a, b)| a * b).sum();
        }
    }
    Ok(scores
        .into_iter()
        .enumerate()
        .map(|(i, [x, y])| Point2D::new(x, y, i))
        .collect())
}

/// Reads `x,y` rows; a non-numeric first row is treated as a header.
pub fn load_coords_csv(path: &Path) -> Result<Vec<[f64; 2]>, EvalError> {
    let io = |e: &dyn std::fmt::Display| EvalError::Io(format!("{}: {e}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io(&e))?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| io(&e))?;
        if row.len() != 2 {
            return Err(io(&format!("row {} has {} fields, expected 2", i + 1, row.len())));
        }
        let parsed = (row[0].parse::<f64>(), row[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) => {
                if !(x.is_finite() && y.is_finite()) {
                    return Err(EvalError::NonFinite(out.len()));
                }
                out.push([x, y]);
            }
            _ if i == 0 => continue,
            _ => return Err(io(&format!("row {} is not numeric", i + 1))),
        }
    }
    Ok(out)
}
