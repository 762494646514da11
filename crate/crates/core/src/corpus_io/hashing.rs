use super::embeddings::{EmbeddingError, EmbeddingMatrix};
use super::record::Corpus;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    fnv1a64_extend(FNV_OFFSET, bytes)
}

fn fnv1a64_extend(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// FNV-1a over the record ids concatenated in corpus order.
pub fn corpus_fingerprint(corpus: &Corpus) -> u64 {
    corpus
        .records()
        .iter()
        .fold(FNV_OFFSET, |h, r| fnv1a64_extend(h, r.id.as_bytes()))
}

/// Lowercases and splits on every non-alphanumeric character, dropping
/// empty pieces.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Seeded signed feature hashing of word unigrams into `dim` buckets,
/// L2-normalised. The returned matrix carries fingerprint 0; use
/// [`hash_embed_corpus`] to bind it to a corpus.
///
/// A text with no word tokens (or whose tokens cancel exactly) hashes its
/// whole lowercased string instead, so every row has unit norm.
pub fn hash_embed(texts: &[&str], dim: usize, seed: u64) -> Result<EmbeddingMatrix, EmbeddingError> {
    if dim < 2 {
        return Err(EmbeddingError::DimensionTooSmall(dim));
    }
    let seeded = fnv1a64_extend(FNV_OFFSET, &seed.to_le_bytes());
    let mut data = Vec::with_capacity(texts.len() * dim);
    let mut row = vec![0.0f64; dim];
    for text in texts {
        row.iter_mut().for_each(|v| *v = 0.0);
        for tok in tokenize(text) {
            add_feature(&mut row, seeded, tok.as_bytes());
        }
        if row.iter().all(|&v| v == 0.0) {
            add_feature(&mut row, seeded, text.to_lowercase().as_bytes());
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        data.extend(row.iter().map(|v| (v / norm) as f32));
    }
    EmbeddingMatrix::new(texts.len(), dim, data, 0)
}

fn add_feature(row: &mut [f64], seeded: u64, token: &[u8]) {
    let h = fnv1a64_extend(seeded, token);
    let bucket = (h % row.len() as u64) as usize;
    row[bucket] += if h >> 63 == 1 { -1.0 } else { 1.0 };
}

/// [`hash_embed`] over the corpus texts, bound to the corpus fingerprint.
pub fn hash_embed_corpus(
    corpus: &Corpus,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    Ok(hash_embed(&corpus.texts(), dim, seed)?.bound_to(corpus_fingerprint(corpus)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::TextRecord;
    use proptest::prelude::*;

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn fingerprint_is_order_sensitive() {
        let a = TextRecord::new("a", "x", "p");
        let b = TextRecord::new("b", "y", "p");
        let ab = Corpus::new(vec![a.clone(), b.clone()], None).unwrap();
        let ba = Corpus::new(vec![b, a], None).unwrap();
        assert_eq!(corpus_fingerprint(&ab), fnv1a64(b"ab"));
        assert_ne!(corpus_fingerprint(&ab), corpus_fingerprint(&ba));
    }

    #[test]
    fn tokenizer_folds_case_and_punctuation() {
        let toks: Vec<_> = tokenize("A a. B-c,,d").collect();
        assert_eq!(toks, ["a", "a", "b", "c", "d"]);
    }

    #[test]
    fn equal_texts_equal_rows() {
        let m = hash_embed(&["a b", "a b", "c d"], 64, 0).unwrap();
        assert_eq!(m.row(0), m.row(1));
        assert_ne!(m.row(0), m.row(2));
    }

    #[test]
    fn matches_direct_hash_definition() {
        // Rebuild the "a b" row from the definition alone.
        let mut seeded = FNV_OFFSET;
        for b in 0u64.to_le_bytes() {
            seeded ^= u64::from(b);
            seeded = seeded.wrapping_mul(FNV_PRIME);
        }
        let mut expected = [0.0f64; 64];
        for tok in ["a", "b"] {
            let mut h = seeded;
            for &b in tok.as_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(FNV_PRIME);
            }
            expected[(h % 64) as usize] += if h >> 63 == 1 { -1.0 } else { 1.0 };
        }
        let norm = expected.iter().map(|v| v * v).sum::<f64>().sqrt();
        let m = hash_embed(&["A, b!"], 64, 0).unwrap();
        for (got, want) in m.row(0).iter().zip(expected) {
            assert_eq!(*got, (want / norm) as f32);
        }
    }

    #[test]
    fn tokenless_text_still_unit_norm() {
        let m = hash_embed(&["...", ""], 8, 3).unwrap();
        for i in 0..2 {
            let n: f32 = m.row(i).iter().map(|v| v * v).sum();
            assert!((n.sqrt() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_dim_one() {
        assert!(hash_embed(&["x"], 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn rows_are_unit_norm_and_pure(
            texts in proptest::collection::vec("[a-zA-Z ,.!]{0,40}", 1..8),
            dim in 2usize..96,
            seed in any::<u64>(),
        ) {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let a = hash_embed(&refs, dim, seed).unwrap();
            let b = hash_embed(&refs, dim, seed).unwrap();
            prop_assert_eq!(&a, &b);
            for i in 0..a.rows() {
                let n: f64 = a.row(i).iter().map(|&v| f64::from(v).powi(2)).sum();
                prop_assert!((n.sqrt() - 1.0).abs() < 1e-6);
            }
        }
    }
}
