//! Per-bin vocabularies, skip-gram negative-sampling training and the
//! embedding text format.

mod io;
mod sgns;
pub(crate) mod vocab;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub use io::{check_compatible, load_space, read_vectors, save_space, write_vectors, SpaceMeta};
pub use sgns::{sgns_gradients, sgns_loss, sigmoid, train_incremental, train_sgns, NegativeSampler, SgnsGradients};
pub use vocab::{build_vocab, Vocabulary};

/// SGNS hyper-parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub negative: usize,
    pub epochs: usize,
    pub seed: u64,
    pub initial_lr: f64,
    pub min_lr: f64,
    /// Frequent-word downsampling threshold; 0 disables it.
    pub subsample_threshold: f64,
    pub unigram_power: f64,
    /// Use the full window for every center word instead of sampling its size.
    pub fixed_window: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 300,
            window: 5,
            min_count: 10,
            negative: 10,
            epochs: 5,
            seed: 42,
            initial_lr: 0.025,
            min_lr: 0.0001,
            subsample_threshold: 0.0,
            unigram_power: 0.75,
            fixed_window: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.dim == 0 {
            problems.push("dim must be >= 1");
        }
        if self.window == 0 {
            problems.push("window must be >= 1");
        }
        if self.negative == 0 {
            problems.push("negative must be >= 1");
        }
        if self.epochs == 0 {
            problems.push("epochs must be >= 1");
        }
        if !(self.min_lr > 0.0 && self.min_lr <= self.initial_lr) {
            problems.push("learning rates must satisfy 0 < min_lr <= initial_lr");
        }
        if self.subsample_threshold < 0.0 || !self.subsample_threshold.is_finite() {
            problems.push("subsample_threshold must be finite and >= 0");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(problems.join("; ")))
        }
    }
}

/// How a space came to be.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Provenance {
    Independent,
    IncrementalFrom {
        label: String,
    },
    AlignedTo {
        base: String,
        shared_count: usize,
        normalized: bool,
        centered: bool,
        source: Box<Provenance>,
    },
}

impl Provenance {
    pub fn tag(&self) -> String {
        match self {
            Provenance::Independent => "independent".into(),
            Provenance::IncrementalFrom { label } => format!("incremental-from:{label}"),
            Provenance::AlignedTo { base, .. } => format!("aligned-to:{base}"),
        }
    }
}

/// One bin's vocabulary with its word vectors (rows follow vocabulary order).
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSpace<T> {
    pub label: String,
    pub vocab: Vocabulary,
    pub vectors: Matrix<T>,
    pub config: TrainConfig,
    pub provenance: Provenance,
}

impl<T: Scalar> EmbeddingSpace<T> {
    pub fn new(
        label: impl Into<String>,
        vocab: Vocabulary,
        vectors: Matrix<T>,
        config: TrainConfig,
        provenance: Provenance,
    ) -> Result<Self> {
        if vectors.rows() != vocab.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors for {} words",
                vectors.rows(),
                vocab.len()
            )));
        }
        if !vectors.is_finite() {
            return Err(Error::invalid("embedding matrix has non-finite entries"));
        }
        Ok(EmbeddingSpace {
            label: label.into(),
            vocab,
            vectors,
            config,
            provenance,
        })
    }

    /// Builds a space from explicit `(word, vector)` rows; counts default to 1.
    pub fn from_rows<S: AsRef<str>, R: AsRef<[T]>>(label: &str, rows: &[(S, R)]) -> Result<Self> {
        let words: Vec<(String, u64)> = rows.iter().map(|(w, _)| (w.as_ref().to_owned(), 1)).collect();
        let vocab = Vocabulary::from_ordered(words)?;
        let vecs: Vec<&[T]> = rows.iter().map(|(_, v)| v.as_ref()).collect();
        let matrix = Matrix::from_rows(&vecs)?;
        let config = TrainConfig {
            dim: matrix.cols(),
            ..TrainConfig::default()
        };
        Self::new(label, vocab, matrix, config, Provenance::Independent)
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vocab.index_of(word).is_some()
    }

    pub fn vector(&self, word: &str) -> Option<&[T]> {
        self.vocab.index_of(word).map(|i| self.vectors.row(i))
    }

    /// Like [`vector`](Self::vector) but reports which space lacked the word.
    pub fn require(&self, word: &str) -> Result<&[T]> {
        self.vector(word).ok_or_else(|| Error::oov(word, &self.label))
    }
}
