use serde::{Deserialize, Serialize};

use super::kernel::KernelConfig;
use super::SamplerError;
use crate::corpus_io::EmbeddingMatrix;
use crate::matrix::{squared_distance, Matrix};

/// Added to the `K_ss + I` diagonal before factorisation.
pub const JITTER: f64 = 1e-8;
/// Observation noise on selected points (the `+ I` term).
const NOISE: f64 = 1.0;
/// Incremental pivots below this trigger a full refactorisation.
const PIVOT_FLOOR: f64 = 1e-10;

/// One round's demonstrations: the most uncertain sample followed by its
/// nearest unselected neighbours.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemonstrationBatch {
    pub anchor: usize,
    pub members: Vec<usize>,
    pub round: usize,
}

impl DemonstrationBatch {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Gaussian-process uncertainty tracker over a fixed point set.
///
/// The prior is zero-mean with unit variance and RBF covariance. Selected
/// points are treated as noisy observations (unit noise), so the posterior
/// variance of an unselected point `u` is
///
/// ```text
/// var(u) = k(u,u) - k(u,S) (K(S,S) + I)^-1 k(S,u)
/// ```
///
/// and selected points are pinned to exactly zero. The Cholesky factor of
/// `K(S,S) + I` grows by one row per selected point; alongside it the
/// tracker keeps `W = L^-1 K(S, all)` so each append costs `O(N |S|)` and
/// the variance update is `var(u) -= w_new(u)^2`.
#[derive(Debug, Clone)]
pub struct TrackerState {
    points: Matrix,
    kernel: KernelConfig,
    variance: Vec<f64>,
    selected: Vec<usize>,
    is_selected: Vec<bool>,
    history: Vec<DemonstrationBatch>,
    /// Lower-triangular rows of `L`, row `r` has `r + 1` entries.
    factor: Vec<Vec<f64>>,
    /// Rows of `L^-1 K(S, all)`.
    whitened: Vec<Vec<f64>>,
}

/// Fresh tracker over the rows of an embedding matrix.
pub fn init_tracker(
    embeddings: &EmbeddingMatrix,
    config: KernelConfig,
) -> Result<TrackerState, SamplerError> {
    TrackerState::new(Matrix::from(embeddings), config)
}

impl TrackerState {
    pub fn new(points: Matrix, kernel: KernelConfig) -> Result<Self, SamplerError> {
        kernel.validate()?;
        if points.rows() == 0 {
            return Err(SamplerError::EmptyCorpus);
        }
        if !points.is_finite() {
            return Err(SamplerError::NonFinite);
        }
        let n = points.rows();
        Ok(Self {
            points,
            kernel,
            variance: vec![1.0; n],
            selected: Vec::new(),
            is_selected: vec![false; n],
            history: Vec::new(),
            factor: Vec::new(),
            whitened: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn kernel(&self) -> &KernelConfig {
        &self.kernel
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn is_selected(&self, index: usize) -> bool {
        self.is_selected[index]
    }

    pub fn history(&self) -> &[DemonstrationBatch] {
        &self.history
    }

    pub fn unselected_count(&self) -> usize {
        self.len() - self.selected.len()
    }

    /// Largest variance among unselected points, 0 when none remain.
    pub fn max_unselected_variance(&self) -> f64 {
        self.variance
            .iter()
            .zip(&self.is_selected)
            .filter(|(_, &s)| !s)
            .map(|(&v, _)| v)
            .fold(0.0, f64::max)
    }

    /// Copy of the tracker with `offset` added to every variance entry.
    /// Selection depends only on the ordering of unselected variances, so
    /// the copy makes the same choices; a unit offset reproduces the
    /// `K(u,u) + I` diagonal reading of the posterior.
    pub fn with_variance_offset(&self, offset: f64) -> Self {
        let mut out = self.clone();
        out.variance.iter_mut().for_each(|v| *v += offset);
        out
    }

    /// Picks the unselected point with the highest variance (lowest index on
    /// ties) and its `k - 1` nearest unselected neighbours by Euclidean
    /// distance (lowest index on ties). Does not modify the tracker.
    pub fn select(&self, k: usize) -> Result<DemonstrationBatch, SamplerError> {
        if k == 0 {
            return Err(SamplerError::InvalidK(k));
        }
        let available = self.unselected_count();
        if available < k {
            return Err(SamplerError::NotEnoughUnselected {
                requested: k,
                available,
            });
        }
        let mut anchor = None;
        for (i, &v) in self.variance.iter().enumerate() {
            if self.is_selected[i] {
                continue;
            }
            match anchor {
                Some((_, best)) if v <= best => {}
                _ => anchor = Some((i, v)),
            }
        }
        let (anchor, _) = anchor.expect("at least k >= 1 unselected points");

        let origin = self.points.row(anchor);
        let mut candidates: Vec<(f64, usize)> = (0..self.len())
            .filter(|&i| i != anchor && !self.is_selected[i])
            .map(|i| (squared_distance(origin, self.points.row(i)), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let want = k - 1;
        if want > 0 && want < candidates.len() {
            candidates.select_nth_unstable_by(want - 1, cmp);
            candidates.truncate(want);
        }
        candidates.sort_unstable_by(cmp);
        candidates.truncate(want);

        let mut members = Vec::with_capacity(k);
        members.push(anchor);
        members.extend(candidates.into_iter().map(|(_, i)| i));
        Ok(DemonstrationBatch {
            anchor,
            members,
            round: self.history.len(),
        })
    }

    /// Conditions the tracker on the batch members and pins their variance
    /// to zero.
    pub fn update(&mut self, batch: &DemonstrationBatch) -> Result<(), SamplerError> {
        self.validate_batch(batch)?;
        for &m in &batch.members {
            self.is_selected[m] = true;
            self.selected.push(m);
            self.append(m)?;
        }
        for &m in &self.selected {
            self.variance[m] = 0.0;
        }
        self.history.push(batch.clone());
        Ok(())
    }

    fn validate_batch(&self, batch: &DemonstrationBatch) -> Result<(), SamplerError> {
        if batch.members.first() != Some(&batch.anchor) {
            return Err(SamplerError::InvalidBatch(
                "anchor must be the first member".into(),
            ));
        }
        for (pos, &m) in batch.members.iter().enumerate() {
            if m >= self.len() {
                return Err(SamplerError::IndexOutOfRange {
                    index: m,
                    len: self.len(),
                });
            }
            if self.is_selected[m] {
                return Err(SamplerError::AlreadySelected(m));
            }
            if batch.members[..pos].contains(&m) {
                return Err(SamplerError::InvalidBatch(format!(
                    "member {m} listed twice"
                )));
            }
        }
        Ok(())
    }

    fn kernel_row(&self, s: usize) -> impl Iterator<Item = f64> + '_ {
        let origin = self.points.row(s);
        self.points
            .iter_rows()
            .map(move |p| self.kernel.eval_sq(squared_distance(origin, p)))
    }

    /// Extends the factor with the most recently selected point (already
    /// pushed onto `selected`).
    fn append(&mut self, s: usize) -> Result<(), SamplerError> {
        let q = self.factor.len();
        let l: Vec<f64> = self.whitened.iter().map(|w| w[s]).collect();
        let pivot_sq = 1.0 + NOISE + JITTER - l.iter().map(|v| v * v).sum::<f64>();
        if !(pivot_sq.is_finite() && pivot_sq > PIVOT_FLOOR * PIVOT_FLOOR) {
            log::warn!("incremental pivot {pivot_sq:e} for point {s}; refactorising");
            return self.refactorize();
        }
        let pivot = pivot_sq.sqrt();
        let mut row: Vec<f64> = self.kernel_row(s).collect();
        for (u, value) in row.iter_mut().enumerate() {
            let mut acc = *value;
            for (r, lr) in l.iter().enumerate() {
                acc -= lr * self.whitened[r][u];
            }
            *value = acc / pivot;
        }
        for (u, w) in row.iter().enumerate() {
            if !self.is_selected[u] {
                self.variance[u] = (self.variance[u] - w * w).max(0.0);
            }
        }
        let mut frow = l;
        frow.push(pivot);
        debug_assert_eq!(frow.len(), q + 1);
        self.factor.push(frow);
        self.whitened.push(row);
        Ok(())
    }

    /// Rebuilds the factor and whitened rows from scratch over the current
    /// selected set.
    pub(crate) fn refactorize(&mut self) -> Result<(), SamplerError> {
        let q = self.selected.len();
        let n = self.len();
        let kss = |a: usize, b: usize| {
            self.kernel.eval_sq(squared_distance(
                self.points.row(self.selected[a]),
                self.points.row(self.selected[b]),
            ))
        };
        let mut factor: Vec<Vec<f64>> = Vec::with_capacity(q);
        for i in 0..q {
            let mut row = vec![0.0; i + 1];
            for j in 0..=i {
                let mut acc = kss(i, j);
                if i == j {
                    acc += NOISE + JITTER;
                }
                let prev: &[f64] = if j == i { &row } else { &factor[j] };
                acc -= (0..j).map(|p| row[p] * prev[p]).sum::<f64>();
                if i == j {
                    if !(acc.is_finite() && acc > 0.0) {
                        return Err(SamplerError::FactorizationFailed { pivot: acc });
                    }
                    row[j] = acc.sqrt();
                } else {
                    row[j] = acc / factor[j][j];
                }
            }
            factor.push(row);
        }
        let mut whitened: Vec<Vec<f64>> = Vec::with_capacity(q);
        for r in 0..q {
            let mut row: Vec<f64> = self.kernel_row(self.selected[r]).collect();
            for (u, value) in row.iter_mut().enumerate() {
                let mut acc = *value;
                for (p, w) in whitened.iter().enumerate() {
                    acc -= factor[r][p] * w[u];
                }
                *value = acc / factor[r][r];
            }
            whitened.push(row);
        }
        for u in 0..n {
            self.variance[u] = if self.is_selected[u] {
                0.0
            } else {
                (1.0 - whitened.iter().map(|w| w[u] * w[u]).sum::<f64>()).max(0.0)
            };
        }
        self.factor = factor;
        self.whitened = whitened;
        Ok(())
    }

    /// Takes up to `rounds` batches with no variance threshold, stopping early
    /// only when fewer than `k` unselected points remain.
    pub fn take_rounds(
        &mut self,
        k: usize,
        rounds: usize,
    ) -> Result<Vec<DemonstrationBatch>, SamplerError> {
        if k == 0 {
            return Err(SamplerError::InvalidK(k));
        }
        let mut batches = Vec::with_capacity(rounds);
        while batches.len() < rounds && self.unselected_count() >= k {
            let batch = self.select(k)?;
            self.update(&batch)?;
            batches.push(batch);
        }
        Ok(batches)
    }

    /// Alternates select and update until the largest unselected variance is
    /// at most `sigma`, fewer than `k` unselected points remain, or
    /// `max_rounds` batches have been taken.
    pub fn run_sampling(
        &mut self,
        k: usize,
        sigma: f64,
        max_rounds: usize,
    ) -> Result<Vec<DemonstrationBatch>, SamplerError> {
        if k == 0 {
            return Err(SamplerError::InvalidK(k));
        }
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(SamplerError::InvalidSigma(sigma));
        }
        if max_rounds == 0 {
            return Err(SamplerError::InvalidMaxRounds);
        }
        let mut batches = Vec::new();
        while batches.len() < max_rounds
            && self.unselected_count() >= k
            && self.max_unselected_variance() > sigma
        {
            let batch = self.select(k)?;
            self.update(&batch)?;
            batches.push(batch);
        }
        Ok(batches)
    }
}
