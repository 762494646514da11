use serde::{Deserialize, Serialize};

use super::SamplerError;
use crate::matrix::squared_distance;

/// How the distance enters the exponent of the RBF kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExponentForm {
    /// `exp(-||a - b|| / (2 tau))`
    #[default]
    Unsquared,
    /// `exp(-||a - b||^2 / (2 tau))`
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub tau: f64,
    #[serde(default)]
    pub exponent_form: ExponentForm,
}

impl KernelConfig {
    pub fn new(tau: f64) -> Result<Self, SamplerError> {
        Self::with_form(tau, ExponentForm::Unsquared)
    }

    pub fn with_form(tau: f64, exponent_form: ExponentForm) -> Result<Self, SamplerError> {
        let cfg = Self { tau, exponent_form };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.tau > 0.0 && self.tau.is_finite() {
            Ok(())
        } else {
            Err(SamplerError::InvalidBandwidth(self.tau))
        }
    }

    /// Kernel value from a precomputed squared distance.
    pub(crate) fn eval_sq(&self, sq_dist: f64) -> f64 {
        let d = match self.exponent_form {
            ExponentForm::Unsquared => sq_dist.sqrt(),
            ExponentForm::Squared => sq_dist,
        };
        (-d / (2.0 * self.tau)).exp()
    }
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            tau: 0.9,
            exponent_form: ExponentForm::Unsquared,
        }
    }
}

/// Radial basis kernel between two points. Symmetric, equal to 1 exactly
/// when the points coincide.
pub fn rbf_kernel(a: &[f64], b: &[f64], config: &KernelConfig) -> Result<f64, SamplerError> {
    if a.len() != b.len() {
        return Err(SamplerError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    config.validate()?;
    Ok(config.eval_sq(squared_distance(a, b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn identity_is_one() {
        let cfg = KernelConfig::new(0.3).unwrap();
        assert_eq!(rbf_kernel(&[0.2, -1.0], &[0.2, -1.0], &cfg).unwrap(), 1.0);
    }

    #[test]
    fn unit_distance_half_bandwidth() {
        let cfg = KernelConfig::new(0.5).unwrap();
        let v = rbf_kernel(&[0.0, 0.0], &[0.6, 0.8], &cfg).unwrap();
        assert!(approx(v, (-1.0f64).exp()));
        assert!((v - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn sst2_bandwidth() {
        let cfg = KernelConfig::new(0.9).unwrap();
        let v = rbf_kernel(&[1.8], &[0.0], &cfg).unwrap();
        assert!(approx(v, (-1.0f64).exp()));
    }

    #[test]
    fn squared_form() {
        let cfg = KernelConfig::with_form(0.5, ExponentForm::Squared).unwrap();
        let v = rbf_kernel(&[0.0], &[2.0], &cfg).unwrap();
        assert!(approx(v, (-4.0f64).exp()));
    }

    #[test]
    fn symmetric() {
        let cfg = KernelConfig::new(1.3).unwrap();
        let a = [0.1, 2.0, -3.0];
        let b = [1.0, -0.5, 0.25];
        assert_eq!(
            rbf_kernel(&a, &b, &cfg).unwrap(),
            rbf_kernel(&b, &a, &cfg).unwrap()
        );
    }

    #[test]
    fn errors() {
        let cfg = KernelConfig::new(1.0).unwrap();
        assert!(matches!(
            rbf_kernel(&[0.0], &[0.0, 1.0], &cfg),
            Err(SamplerError::DimensionMismatch { left: 1, right: 2 })
        ));
        assert!(KernelConfig::new(0.0).is_err());
        assert!(KernelConfig::new(f64::NAN).is_err());
    }
}
