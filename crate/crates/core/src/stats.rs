//! Target-word frequencies, the frequency-control regression and PCA trajectories.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedDoc;
use crate::drift::{csv_err, top_k_neighbors, DriftRecord, SkippedWord};
use crate::embeddings::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::linalg::{ols, pca_project, Matrix, RegressionResult};
use crate::scalar::Scalar;

pub const FREQUENCY_HEADER: [&str; 4] = ["word", "bin", "count", "per_million"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["word", "bin", "x", "y"];
pub const TRAJECTORY_CONTEXT_HEADER: [&str; 5] = ["word", "bin", "x", "y", "focal"];

/// Raw token counts of one bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinCounts {
    pub label: String,
    pub total_tokens: u64,
    pub counts: BTreeMap<String, u64>,
}

impl BinCounts {
    pub fn from_docs<D: AsRef<TokenizedDoc>>(label: &str, docs: &[D]) -> Self {
        let (counts, total) = crate::embeddings::vocab::count_tokens(docs);
        BinCounts {
            label: label.to_owned(),
            total_tokens: total,
            counts: counts.into_iter().map(|(w, c)| (w.to_owned(), c)).collect(),
        }
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRecord {
    pub word: String,
    pub bin_label: String,
    pub count: u64,
    pub per_million: f64,
}

/// One record per (word, bin); absent words get zero.
pub fn freq_per_million(bins: &[BinCounts], targets: &[String]) -> Vec<FrequencyRecord> {
    targets
        .iter()
        .flat_map(|w| {
            bins.iter().map(move |b| {
                let count = b.count(w);
                let per_million = if b.total_tokens == 0 {
                    0.0
                } else {
                    count as f64 * 1e6 / b.total_tokens as f64
                };
                FrequencyRecord {
                    word: w.clone(),
                    bin_label: b.label.clone(),
                    count,
                    per_million,
                }
            })
        })
        .collect()
}

pub fn write_frequency_csv<W: Write>(records: &[FrequencyRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FREQUENCY_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.word.as_str(),
            r.bin_label.as_str(),
            &r.count.to_string(),
            &format!("{:.6}", r.per_million),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyTransform {
    #[default]
    Log10,
    Raw,
}

impl FrequencyTransform {
    fn apply(self, per_million: f64) -> Option<f64> {
        match self {
            FrequencyTransform::Log10 => (per_million > 0.0).then(|| per_million.log10()),
            FrequencyTransform::Raw => Some(per_million),
        }
    }
}

/// One (word, span) row of the regression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionObservation {
    pub word: String,
    pub start_label: String,
    pub end_label: String,
    pub drift: f64,
    pub mean_freq: f64,
    pub delta_freq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRegression {
    pub transform: FrequencyTransform,
    /// Coefficient order: intercept, mean frequency, delta frequency.
    pub terms: Vec<String>,
    pub n_observations: usize,
    pub observations: Vec<RegressionObservation>,
    pub skipped: Vec<SkippedWord>,
    pub result: RegressionResult,
}

pub const REGRESSION_TERMS: [&str; 3] = ["intercept", "mean_freq", "delta_freq"];

/// Assembles the `(intercept, mean, delta)` design from the drift table
/// (one row per distinct word and span) and fits it by least squares.
pub fn frequency_regression(
    drift_records: &[DriftRecord],
    freq_records: &[FrequencyRecord],
    transform: FrequencyTransform,
) -> Result<FrequencyRegression> {
    let freq: HashMap<(&str, &str), f64> = freq_records
        .iter()
        .map(|r| ((r.word.as_str(), r.bin_label.as_str()), r.per_million))
        .collect();
    let mut seen = BTreeSet::new();
    let mut observations = Vec::new();
    let mut skipped = Vec::new();
    for r in drift_records {
        if !seen.insert((r.word.as_str(), r.start_label.as_str(), r.end_label.as_str())) {
            continue;
        }
        let context = format!("{}->{}", r.start_label, r.end_label);
        let lookup = |bin: &str| freq.get(&(r.word.as_str(), bin)).copied();
        let (Some(fs), Some(fe)) = (lookup(&r.start_label), lookup(&r.end_label)) else {
            skipped.push(SkippedWord {
                word: r.word.clone(),
                context,
                reason: "no frequency record".into(),
            });
            continue;
        };
        let (Some(ts), Some(te)) = (transform.apply(fs), transform.apply(fe)) else {
            skipped.push(SkippedWord {
                word: r.word.clone(),
                context,
                reason: "zero frequency under log transform".into(),
            });
            continue;
        };
        observations.push(RegressionObservation {
            word: r.word.clone(),
            start_label: r.start_label.clone(),
            end_label: r.end_label.clone(),
            drift: r.drift,
            mean_freq: (ts + te) / 2.0,
            delta_freq: te - ts,
        });
    }
    if observations.len() < 4 {
        return Err(Error::invalid(format!(
            "frequency regression needs at least 4 observations, got {}",
            observations.len()
        )));
    }
    let (y, design) = regression_design(&observations)?;
    let result = ols(&y, &design)?;
    Ok(FrequencyRegression {
        transform,
        terms: REGRESSION_TERMS.iter().map(|s| s.to_string()).collect(),
        n_observations: observations.len(),
        observations,
        skipped,
        result,
    })
}

/// Response vector and design matrix for the given observations.
pub fn regression_design(observations: &[RegressionObservation]) -> Result<(Vec<f64>, Matrix<f64>)> {
    let y = observations.iter().map(|o| o.drift).collect();
    let rows: Vec<[f64; 3]> = observations.iter().map(|o| [1.0, o.mean_freq, o.delta_freq]).collect();
    Ok((y, Matrix::from_rows(&rows)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub word: String,
    pub bin_label: String,
    pub x: f64,
    pub y: f64,
    /// The focal word this point annotates, for neighbor context points.
    pub context_of: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectories {
    /// Focal points grouped by word, each in chronological bin order.
    pub points: Vec<TrajectoryPoint>,
    pub context: Vec<TrajectoryPoint>,
    pub explained_ratio: Vec<f64>,
    pub skipped: Vec<SkippedWord>,
}

/// Projects each focal word's aligned vector per bin (and optionally its
/// top-`neighbor_context` neighbors in that bin) onto a shared 2-D PCA plane.
/// `aligned` must be in chronological order.
pub fn trajectory_coordinates<T: Scalar>(
    aligned: &[EmbeddingSpace<T>],
    focal_words: &[String],
    neighbor_context: usize,
) -> Result<Trajectories> {
    let mut rows: Vec<Vec<T>> = Vec::new();
    let mut meta: Vec<(String, String, Option<String>)> = Vec::new();
    let mut skipped = Vec::new();
    for word in focal_words {
        let present: Vec<&EmbeddingSpace<T>> = aligned.iter().filter(|s| s.contains(word)).collect();
        if present.len() < 2 {
            skipped.push(SkippedWord {
                word: word.clone(),
                context: "trajectory".into(),
                reason: format!("present in {} bin(s), need 2", present.len()),
            });
            continue;
        }
        for space in present {
            rows.push(space.require(word)?.to_vec());
            meta.push((word.clone(), space.label.clone(), None));
            if neighbor_context > 0 {
                let k = neighbor_context.min(space.len().saturating_sub(1));
                for n in top_k_neighbors(space, word, k)? {
                    rows.push(space.require(&n.word)?.to_vec());
                    meta.push((n.word, space.label.clone(), Some(word.clone())));
                }
            }
        }
    }
    if rows.is_empty() {
        return Ok(Trajectories {
            points: vec![],
            context: vec![],
            explained_ratio: vec![],
            skipped,
        });
    }
    let points = Matrix::from_rows(&rows)?;
    let k = 2.min(points.rows()).min(points.cols());
    let pca = pca_project(&points, k)?;
    let mut focal = Vec::new();
    let mut context = Vec::new();
    for (i, (word, bin_label, context_of)) in meta.into_iter().enumerate() {
        let row = pca.coords.row(i);
        let p = TrajectoryPoint {
            word,
            bin_label,
            x: row[0].as_f64(),
            y: row.get(1).map_or(0.0, |v| v.as_f64()),
            context_of,
        };
        if p.context_of.is_some() {
            context.push(p);
        } else {
            focal.push(p);
        }
    }
    Ok(Trajectories {
        points: focal,
        context,
        explained_ratio: pca.explained_ratio.iter().map(|v| v.as_f64()).collect(),
        skipped,
    })
}

pub fn write_trajectories_csv<W: Write>(t: &Trajectories, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    for p in &t.points {
        w.write_record([
            p.word.as_str(),
            p.bin_label.as_str(),
            &format!("{:.6}", p.x),
            &format!("{:.6}", p.y),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_context_csv<W: Write>(t: &Trajectories, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_CONTEXT_HEADER).map_err(csv_err)?;
    for p in &t.context {
        w.write_record([
            p.word.as_str(),
            p.bin_label.as_str(),
            &format!("{:.6}", p.x),
            &format!("{:.6}", p.y),
            p.context_of.as_deref().unwrap_or(""),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
