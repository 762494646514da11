use std::collections::BTreeSet;

use crate::corpus_io::{tokenize, Corpus};

/// Distinct lowercased alphanumeric tokens across all texts.
pub fn vocabulary<'a>(texts: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
    texts.into_iter().flat_map(tokenize).collect()
}

pub fn vocabulary_size(corpus: &Corpus) -> usize {
    vocabulary(corpus.records().iter().map(|r| r.text.as_str())).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::TextRecord;

    fn corpus(texts: &[&str]) -> Corpus {
        Corpus::new(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| TextRecord::new(i.to_string(), *t, "p"))
                .collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(vocabulary_size(&corpus(&["a a b"])), 2);
        assert_eq!(vocabulary_size(&corpus(&["A", "a."])), 1);
        assert_eq!(vocabulary_size(&corpus(&[])), 0);
        assert_eq!(vocabulary_size(&corpus(&["don't stop", "Don T"])), 3);
    }
}
