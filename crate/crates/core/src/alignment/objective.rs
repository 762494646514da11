use super::{AlignError, ProjectionSet};
use crate::matrix::{dot, Matrix};

/// Projected mean-matching objective over per-sample weights.
///
/// With `mu` the real mean, `g(w) = (1/M) sum_j w_j e_j` the weighted
/// synthetic mean and `r_t = theta_t . (g(w) - mu)` the signed residual on
/// direction `t`:
///
/// ```text
/// L(w)       = (1/m) sum_t r_t^2
/// dL/dw_j    = (2 / (m M)) sum_t r_t (theta_t . e_j)
/// ```
///
/// Both are evaluated through the `d`-dimensional means, so one evaluation
/// costs `O(M d + m d)`.
#[derive(Debug, Clone)]
pub struct MmdObjective<'a> {
    generated: &'a Matrix,
    projections: &'a ProjectionSet,
    real_mean: Vec<f64>,
    real_projected: Vec<f64>,
}

impl<'a> MmdObjective<'a> {
    pub fn new(
        real: &Matrix,
        generated: &'a Matrix,
        projections: &'a ProjectionSet,
    ) -> Result<Self, AlignError> {
        if real.rows() == 0 {
            return Err(AlignError::Empty("real embeddings"));
        }
        if generated.rows() == 0 {
            return Err(AlignError::Empty("generated embeddings"));
        }
        let d = projections.dim();
        for (what, found) in [
            ("real embeddings", real.cols()),
            ("generated embeddings", generated.cols()),
        ] {
            if found != d {
                return Err(AlignError::DimensionMismatch {
                    what,
                    expected: d,
                    found,
                });
            }
        }
        if !real.is_finite() {
            return Err(AlignError::NonFinite("real embeddings"));
        }
        if !generated.is_finite() {
            return Err(AlignError::NonFinite("generated embeddings"));
        }
        if !projections.vectors().is_finite() {
            return Err(AlignError::NonFinite("projection set"));
        }
        let real_mean = real.column_means();
        let real_projected = projections
            .vectors()
            .iter_rows()
            .map(|t| dot(t, &real_mean))
            .collect();
        Ok(Self {
            generated,
            projections,
            real_mean,
            real_projected,
        })
    }

    pub fn generated_len(&self) -> usize {
        self.generated.rows()
    }

    pub fn real_mean(&self) -> &[f64] {
        &self.real_mean
    }

    fn check_weights(&self, omega: &[f64]) -> Result<(), AlignError> {
        if omega.len() != self.generated.rows() {
            return Err(AlignError::DimensionMismatch {
                what: "weight vector",
                expected: self.generated.rows(),
                found: omega.len(),
            });
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(AlignError::NonFinite("weight vector"));
        }
        Ok(())
    }

    fn weighted_mean(&self, omega: &[f64]) -> Vec<f64> {
        let mut mean = vec![0.0; self.generated.cols()];
        for (row, &w) in self.generated.iter_rows().zip(omega) {
            if w != 0.0 {
                mean.iter_mut().zip(row).for_each(|(m, v)| *m += w * v);
            }
        }
        let scale = 1.0 / self.generated.rows() as f64;
        mean.iter_mut().for_each(|m| *m *= scale);
        mean
    }

    /// Signed residuals `theta_t . (g(w) - mu)`, one per direction.
    fn residuals(&self, omega: &[f64]) -> Vec<f64> {
        let mean = self.weighted_mean(omega);
        self.projections
            .vectors()
            .iter_rows()
            .zip(&self.real_projected)
            .map(|(t, a)| dot(t, &mean) - a)
            .collect()
    }

    pub fn loss(&self, omega: &[f64]) -> Result<f64, AlignError> {
        self.check_weights(omega)?;
        Ok(self.loss_unchecked(omega))
    }

    pub(crate) fn loss_unchecked(&self, omega: &[f64]) -> f64 {
        let r = self.residuals(omega);
        r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64
    }

    pub fn gradient(&self, omega: &[f64]) -> Result<Vec<f64>, AlignError> {
        self.check_weights(omega)?;
        Ok(self.gradient_unchecked(omega))
    }

    pub(crate) fn gradient_unchecked(&self, omega: &[f64]) -> Vec<f64> {
        let r = self.residuals(omega);
        // c = sum_t r_t theta_t, so dL/dw_j = 2 / (m M) * (c . e_j)
        let mut c = vec![0.0; self.projections.dim()];
        for (t, rt) in self.projections.vectors().iter_rows().zip(&r) {
            c.iter_mut().zip(t).for_each(|(ci, ti)| *ci += rt * ti);
        }
        let scale = 2.0 / (r.len() as f64 * self.generated.rows() as f64);
        self.generated
            .iter_rows()
            .map(|e| scale * dot(&c, e))
            .collect()
    }
}

/// Projected mean-matching loss, see [`MmdObjective`].
pub fn mmd_loss(
    real: &Matrix,
    generated: &Matrix,
    omega: &[f64],
    projections: &ProjectionSet,
) -> Result<f64, AlignError> {
    MmdObjective::new(real, generated, projections)?.loss(omega)
}

/// Analytic gradient of [`mmd_loss`] with respect to the weights.
pub fn mmd_gradient(
    real: &Matrix,
    generated: &Matrix,
    omega: &[f64],
    projections: &ProjectionSet,
) -> Result<Vec<f64>, AlignError> {
    MmdObjective::new(real, generated, projections)?.gradient(omega)
}
