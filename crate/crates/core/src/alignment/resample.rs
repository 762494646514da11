use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::AlignError;
use crate::corpus_io::Corpus;

/// Draws `target_size` records i.i.d. with replacement, record `j` with
/// probability `w_j / sum(w)`.
///
/// The first copy of a record keeps its id; later copies get
/// `<id>~<n>` and a `parent_id` meta entry.
pub fn resample(
    generated: &Corpus,
    weights: &[f64],
    target_size: usize,
    seed: u64,
) -> Result<Corpus, AlignError> {
    if weights.len() != generated.len() {
        return Err(AlignError::DimensionMismatch {
            what: "weight vector",
            expected: generated.len(),
            found: weights.len(),
        });
    }
    if target_size == 0 {
        return Err(AlignError::InvalidParameter(
            "target size must be at least 1".into(),
        ));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(AlignError::InvalidParameter(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(AlignError::ZeroWeights);
    }
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let dist = WeightedIndex::new(&probs).map_err(|e| AlignError::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut copies: HashMap<usize, usize> = HashMap::new();
    let mut out = Vec::with_capacity(target_size);
    for _ in 0..target_size {
        let j = dist.sample(&mut rng);
        let n = copies.entry(j).or_insert(0);
        let mut rec = generated.records()[j].clone();
        if *n > 0 {
            rec.meta.insert("parent_id".into(), rec.id.clone());
            rec.id = format!("{}~{}", rec.id, n);
        }
        *n += 1;
        out.push(rec);
    }
    Corpus::new(out, Some(generated.label_set().to_vec()))
        .map_err(|e| AlignError::InvalidParameter(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::TextRecord;

    fn gen(n: usize) -> Corpus {
        Corpus::new(
            (0..n)
                .map(|i| TextRecord::synthetic(format!("g{i}"), format!("text {i}"), "p"))
                .collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn degenerate_weights_copy_one_record() {
        let out = resample(&gen(3), &[1.0, 0.0, 0.0], 5, 1).unwrap();
        assert_eq!(out.len(), 5);
        assert!(out.records().iter().all(|r| r.text == "text 0"));
        assert_eq!(out.records()[0].id, "g0");
        assert_eq!(out.records()[1].id, "g0~1");
        assert_eq!(out.records()[4].meta["parent_id"], "g0");
    }

    #[test]
    fn seeded_bootstrap_is_reproducible() {
        let c = gen(50);
        let w = vec![1.0; 50];
        assert_eq!(resample(&c, &w, 50, 9).unwrap(), resample(&c, &w, 50, 9).unwrap());
        assert_ne!(resample(&c, &w, 50, 9).unwrap(), resample(&c, &w, 50, 10).unwrap());
    }

    #[test]
    fn scale_invariant() {
        let c = gen(20);
        let w: Vec<f64> = (0..20).map(|i| (i % 7) as f64 + 0.5).collect();
        let scaled: Vec<f64> = w.iter().map(|v| v * 8.0).collect();
        assert_eq!(resample(&c, &w, 40, 3).unwrap(), resample(&c, &scaled, 40, 3).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        let c = gen(2);
        assert!(matches!(resample(&c, &[0.0, 0.0], 3, 0), Err(AlignError::ZeroWeights)));
        assert!(resample(&c, &[1.0], 3, 0).is_err());
        assert!(resample(&c, &[1.0, -1.0], 3, 0).is_err());
        assert!(resample(&c, &[1.0, 1.0], 0, 0).is_err());
    }
}
