use serde::{Deserialize, Serialize};

use super::hull::{hull_of, HullSet, Point2D};
use super::kdtree::KdTree2;
use super::{EvalError, ProjectionMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Coverage after each step, in `[0, 1]` and non-decreasing.
    pub rates: Vec<f64>,
    pub k: usize,
    pub steps: usize,
    pub projection: ProjectionMode,
}

impl CoverageReport {
    pub fn final_rate(&self) -> f64 {
        self.rates.last().copied().unwrap_or(0.0)
    }

    /// Rate after `step` steps (1-based), clamped to the last step.
    pub fn at_step(&self, step: usize) -> f64 {
        if step == 0 || self.rates.is_empty() {
            return 0.0;
        }
        self.rates[step.min(self.rates.len()) - 1]
    }

    pub fn with_projection(mut self, projection: ProjectionMode) -> Self {
        self.projection = projection;
        self
    }
}

/// Convex-hull coverage of a 2-D point set by a sampling order.
///
/// At step `t` the point `sample_order[t]` and its `k` nearest other points
/// form a hull that is merged into the running [`HullSet`]; the rate is the
/// set's total area over the area of the hull of all points.
pub fn coverage_curve(
    points: &[Point2D],
    sample_order: &[usize],
    k: usize,
    steps: usize,
) -> Result<CoverageReport, EvalError> {
    if steps > sample_order.len() {
        return Err(EvalError::InvalidParameter(format!(
            "{steps} steps requested but the sample order has {} entries",
            sample_order.len()
        )));
    }
    let n = points.len();
    let mut seen = vec![false; n];
    for &i in sample_order {
        if i >= n {
            return Err(EvalError::InvalidIndex { index: i, len: n });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(EvalError::DuplicateIndex(i));
        }
    }
    if let Some(row) = points.iter().position(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(EvalError::NonFinite(row));
    }
    let raw: Vec<[f64; 2]> = points.iter().map(Point2D::xy).collect();
    let total = hull_of(&raw).area();
    if total <= 0.0 {
        return Err(EvalError::DegenerateGeometry);
    }
    let tree = KdTree2::new(raw.clone());
    let mut buffer = HullSet::new();
    let mut rates = Vec::with_capacity(steps);
    let mut last = 0.0f64;
    for &i in &sample_order[..steps] {
        let mut verts = vec![raw[i]];
        verts.extend(tree.nearest(raw[i], k, Some(i)).into_iter().map(|j| raw[j]));
        buffer.insert(hull_of(&verts));
        // Guard against last-ulp wobble from re-summing merged areas.
        last = last.max((buffer.total_area() / total).min(1.0));
        rates.push(last);
    }
    Ok(CoverageReport {
        rates,
        k,
        steps,
        projection: ProjectionMode::Precomputed,
    })
}
