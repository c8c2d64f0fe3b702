use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EmbeddingSpace, Provenance, TrainConfig, Vocabulary};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Contents of the `<label>.meta.json` sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceMeta {
    pub label: String,
    pub dim: usize,
    pub vocab_size: usize,
    pub config: TrainConfig,
    pub provenance: Provenance,
    /// Raw counts in vocabulary order.
    pub counts: Vec<u64>,
    pub total_tokens: u64,
}

/// Writes `<vocab_size> <dim>` and then `word v1 … v_dim` per line.
/// Values use the shortest representation that parses back exactly.
pub fn write_vectors<T: Scalar, W: Write>(space: &EmbeddingSpace<T>, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{} {}", space.len(), space.dim())?;
    for (word, row) in space.vocab.words().iter().zip(space.vectors.row_iter()) {
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(Error::invalid(format!(
                "word {word:?} cannot be written in the text format"
            )));
        }
        out.write_all(word.as_bytes())?;
        for x in row {
            write!(out, " {x}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Parses the text format into `(words, matrix)`.
pub fn read_vectors<T: Scalar, R: BufRead>(input: R) -> Result<(Vec<String>, Matrix<T>)> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.ok_or(Error::Format {
        line: 1,
        message: "missing header".into(),
    })?;
    let mut fields = header.split_whitespace();
    let parse_dim = |s: Option<&str>| s.and_then(|s| s.parse::<usize>().ok());
    let (n, dim) = match (parse_dim(fields.next()), parse_dim(fields.next()), fields.next()) {
        (Some(n), Some(d), None) if d > 0 => (n, d),
        _ => {
            return Err(Error::Format {
                line: 1,
                message: format!("expected `<vocab_size> <dim>`, found {header:?}"),
            })
        }
    };
    let mut words = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for i in 0..n {
        let line_no = i + 2;
        let line = lines.next().transpose()?.ok_or_else(|| Error::Format {
            line: line_no,
            message: format!("file ends after {i} of {n} rows"),
        })?;
        let mut parts = line.split_whitespace();
        let word = parts.next().ok_or_else(|| Error::Format {
            line: line_no,
            message: "empty row".into(),
        })?;
        let before = data.len();
        for p in parts {
            let v: T = p.parse().map_err(|_| Error::Format {
                line: line_no,
                message: format!("invalid number {p:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Format {
                    line: line_no,
                    message: format!("non-finite value {p:?}"),
                });
            }
            data.push(v);
        }
        if data.len() - before != dim {
            return Err(Error::Format {
                line: line_no,
                message: format!("{} values, expected {dim}", data.len() - before),
            });
        }
        words.push(word.to_owned());
    }
    if let Some(extra) = lines.next().transpose()? {
        if !extra.trim().is_empty() {
            return Err(Error::Format {
                line: n + 2,
                message: format!("more rows than the header's {n}"),
            });
        }
    }
    Ok((words, Matrix::from_vec(n, dim, data)?))
}

pub fn vectors_path(dir: &Path, label: &str) -> PathBuf {
    dir.join(format!("{label}.vec"))
}

pub fn meta_path(dir: &Path, label: &str) -> PathBuf {
    dir.join(format!("{label}.meta.json"))
}

/// Writes `<label>.vec` and `<label>.meta.json` into `dir`; returns both paths.
pub fn save_space<T: Scalar>(space: &EmbeddingSpace<T>, dir: &Path) -> Result<[PathBuf; 2]> {
    fs::create_dir_all(dir)?;
    let vec_path = vectors_path(dir, &space.label);
    write_vectors(space, File::create(&vec_path)?)?;
    let meta = SpaceMeta {
        label: space.label.clone(),
        dim: space.dim(),
        vocab_size: space.len(),
        config: space.config.clone(),
        provenance: space.provenance.clone(),
        counts: space.vocab.counts().to_vec(),
        total_tokens: space.vocab.total_tokens(),
    };
    let meta_file = meta_path(dir, &space.label);
    let mut f = BufWriter::new(File::create(&meta_file)?);
    serde_json::to_writer_pretty(&mut f, &meta)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok([vec_path, meta_file])
}

pub fn load_space<T: Scalar>(dir: &Path, label: &str) -> Result<EmbeddingSpace<T>> {
    let meta: SpaceMeta = serde_json::from_reader(BufReader::new(File::open(meta_path(dir, label))?))?;
    let (words, vectors) = read_vectors::<T, _>(BufReader::new(File::open(vectors_path(dir, label))?))?;
    if meta.dim != vectors.cols() || meta.vocab_size != words.len() || meta.counts.len() != words.len() {
        return Err(Error::Format {
            line: 1,
            message: format!(
                "sidecar for {label} describes {}x{} with {} counts, vectors are {}x{}",
                meta.vocab_size,
                meta.dim,
                meta.counts.len(),
                words.len(),
                vectors.cols()
            ),
        });
    }
    let vocab = Vocabulary::with_total(words.into_iter().zip(meta.counts).collect(), meta.total_tokens)?;
    EmbeddingSpace::new(meta.label, vocab, vectors, meta.config, meta.provenance)
}

/// Guards against combining spaces that cannot be compared.
///
/// Different dimensions are an error; different training seeds only warn.
pub fn check_compatible<T: Scalar>(a: &EmbeddingSpace<T>, b: &EmbeddingSpace<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "space {} has dim {}, space {} has dim {}",
            a.label,
            a.dim(),
            b.label,
            b.dim()
        )));
    }
    if a.config.seed != b.config.seed {
        log::warn!(
            "spaces {} and {} were trained with different seeds ({} vs {})",
            a.label,
            b.label,
            a.config.seed,
            b.config.seed
        );
    }
    Ok(())
}
