use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedDoc;
use crate::error::{Error, Result};

/// Ordered word list with raw counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    /// Tokens in the training text, including those below `min_count`.
    total_tokens: u64,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    words: Vec<String>,
    counts: Vec<u64>,
    total_tokens: u64,
}

impl From<VocabRepr> for Vocabulary {
    fn from(r: VocabRepr) -> Self {
        let index = r.words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Vocabulary {
            words: r.words,
            counts: r.counts,
            index,
            total_tokens: r.total_tokens,
        }
    }
}

impl From<Vocabulary> for VocabRepr {
    fn from(v: Vocabulary) -> Self {
        VocabRepr {
            words: v.words,
            counts: v.counts,
            total_tokens: v.total_tokens,
        }
    }
}

impl Vocabulary {
    /// Keeps the given order; total token count is the sum of counts.
    pub fn from_ordered(entries: Vec<(String, u64)>) -> Result<Self> {
        let total = entries.iter().map(|(_, c)| c).sum();
        Self::with_total(entries, total)
    }

    pub fn with_total(entries: Vec<(String, u64)>, total_tokens: u64) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (i, (w, c)) in entries.into_iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary entry {w:?}")));
            }
            words.push(w);
            counts.push(c);
        }
        Ok(Vocabulary {
            words,
            counts,
            index,
            total_tokens,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn count(&self, word: &str) -> u64 {
        self.index_of(word).map_or(0, |i| self.counts[i])
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Count divided by the bin's token total (0 when the bin is empty).
    pub fn relative_frequency(&self, word: &str) -> f64 {
        if self.total_tokens == 0 {
            0.0
        } else {
            self.count(word) as f64 / self.total_tokens as f64
        }
    }
}

pub(crate) fn count_tokens<D: AsRef<TokenizedDoc>>(docs: &[D]) -> (HashMap<&str, u64>, u64) {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    let mut total = 0;
    for d in docs {
        for t in &d.as_ref().tokens {
            *counts.entry(t.as_str()).or_insert(0) += 1;
            total += 1;
        }
    }
    (counts, total)
}

/// Descending count, then lexicographic.
pub(crate) fn sort_entries(entries: &mut [(String, u64)]) {
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
}

/// Words occurring at least `min_count` times, most frequent first with
/// lexicographic tie order.
pub fn build_vocab<D: AsRef<TokenizedDoc>>(docs: &[D], min_count: u64) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::NoDocuments);
    }
    let (counts, total) = count_tokens(docs);
    let mut entries: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(w, c)| (w.to_owned(), c))
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    sort_entries(&mut entries);
    Vocabulary::with_total(entries, total)
}
