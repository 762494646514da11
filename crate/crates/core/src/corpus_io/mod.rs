//! Corpora of labeled text records, their embedding matrices and the
//! on-disk formats for both.
//!
//! Corpus files are JSON lines: an optional header object
//! `{"label_set": [...]}` followed by one record object per line.
//! Embedding files use a small little-endian binary layout (see
//! [`embeddings`]) bound to a corpus through an FNV-1a fingerprint of the
//! record ids.

mod embeddings;
mod hashing;
mod record;

pub use embeddings::{
    load_embeddings, read_embeddings, save_embeddings, EmbeddingError, EmbeddingMatrix,
    EMBEDDING_MAGIC, EMBEDDING_VERSION,
};
pub use hashing::{corpus_fingerprint, fnv1a64, hash_embed, hash_embed_corpus, tokenize};
pub use record::{load_corpus, save_corpus, Corpus, CorpusError, Source, TextRecord};

/// Anything that maps a list of texts to an embedding matrix.
///
/// Implementations must be deterministic: the same text list under the same
/// configuration yields bit-identical output.
pub trait Embedder {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed(&self, texts: &[&str]) -> Result<EmbeddingMatrix, EmbeddingError>;

    fn embed_corpus(&self, corpus: &Corpus) -> Result<EmbeddingMatrix, EmbeddingError> {
        let texts: Vec<&str> = corpus.records().iter().map(|r| r.text.as_str()).collect();
        Ok(self.embed(&texts)?.bound_to(corpus_fingerprint(corpus)))
    }
}

/// Feature-hashing embedder, see [`hash_embed`].
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl Embedder for HashEmbedder {
    fn name(&self) -> &str {
        "hash-unigram"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, texts: &[&str]) -> Result<EmbeddingMatrix, EmbeddingError> {
        hash_embed(texts, self.dim, self.seed)
    }
}
