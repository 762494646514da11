use serde::{Deserialize, Serialize};

use super::{AlignError, MmdObjective, ProjectionSet};
use crate::matrix::Matrix;

/// Maximum number of step halvings tried before giving up on an iteration.
pub const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Initial step size.
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop when the relative loss decrease falls below this.
    pub tol: f64,
    /// Clip weights at zero after every step.
    pub nonneg_projection: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_iters: 2000,
            tol: 1e-8,
            nonneg_projection: true,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), AlignError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(AlignError::InvalidParameter(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.max_iters == 0 {
            return Err(AlignError::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(AlignError::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Fitted per-sample weights plus the optimisation record.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentWeights {
    pub weights: Vec<f64>,
    /// Loss at the initial weights followed by the loss after every
    /// accepted step.
    pub loss_trace: Vec<f64>,
    pub projection_seed: u64,
    pub optimizer: OptimizerConfig,
}

impl AlignmentWeights {
    pub fn initial_loss(&self) -> f64 {
        self.loss_trace[0]
    }

    pub fn final_loss(&self) -> f64 {
        *self.loss_trace.last().expect("trace holds the initial loss")
    }

    pub fn iterations(&self) -> usize {
        self.loss_trace.len() - 1
    }
}

/// Gradient descent on the weights from the all-ones start.
///
/// Each iteration tries `w - step * grad` (clipped at zero when
/// `nonneg_projection` is set) and halves the step up to [`MAX_HALVINGS`]
/// times until the loss does not increase, so the trace is monotone. After
/// an accepted step the next trial step is doubled; the loss curvature
/// scales like `1/M`, and a fixed step would crawl on large synthetic sets.
/// Stops after `max_iters` steps, when the relative decrease drops below
/// `tol`, or when no trial step decreases the loss.
pub fn learn_weights(
    real: &Matrix,
    generated: &Matrix,
    projections: &ProjectionSet,
    config: &OptimizerConfig,
) -> Result<AlignmentWeights, AlignError> {
    config.validate()?;
    let objective = MmdObjective::new(real, generated, projections)?;
    let mut omega = vec![1.0; generated.rows()];
    let mut loss = objective.loss_unchecked(&omega);
    if !loss.is_finite() {
        return Err(AlignError::NonFiniteLoss { iter: 0 });
    }
    let mut trace = vec![loss];
    let mut step = config.learning_rate;
    let mut candidate = vec![0.0; omega.len()];

    for iter in 1..=config.max_iters {
        if loss == 0.0 {
            break;
        }
        let grad = objective.gradient_unchecked(&omega);
        if grad.iter().all(|&g| g == 0.0) {
            break;
        }
        let mut trial = step;
        let mut accepted = None;
        let mut saw_finite = false;
        for _ in 0..=MAX_HALVINGS {
            for ((c, w), g) in candidate.iter_mut().zip(&omega).zip(&grad) {
                let v = w - trial * g;
                *c = if config.nonneg_projection { v.max(0.0) } else { v };
            }
            let new_loss = objective.loss_unchecked(&candidate);
            if new_loss.is_finite() {
                saw_finite = true;
                if new_loss <= loss {
                    accepted = Some(new_loss);
                    break;
                }
            }
            trial *= 0.5;
        }
        let Some(new_loss) = accepted else {
            if !saw_finite {
                return Err(AlignError::NonFiniteLoss { iter });
            }
            break;
        };
        let rel = (loss - new_loss) / loss;
        std::mem::swap(&mut omega, &mut candidate);
        loss = new_loss;
        trace.push(loss);
        step = trial * 2.0;
        if rel < config.tol {
            break;
        }
    }

    Ok(AlignmentWeights {
        weights: omega,
        loss_trace: trace,
        projection_seed: projections.seed(),
        optimizer: config.clone(),
    })
}
