//! Semantic axes built from seed sets, word projections and leave-one-out
//! seed sensitivity.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::drift::SkippedWord;
use crate::embeddings::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::scalar::{cosine, Scalar};

pub const AXIS_SCORES_HEADER: [&str; 6] = ["axis", "word", "bin", "score", "pos_found", "neg_found"];
pub const AXIS_SENSITIVITY_HEADER: [&str; 8] = ["axis", "word", "bin", "full", "mean", "min", "max", "variants"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub name: String,
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

impl AxisSpec {
    /// Mercy (positive pole) against retribution (negative pole).
    pub fn mercy_retribution() -> Self {
        let owned = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect();
        AxisSpec {
            name: "mercy-retribution".into(),
            positive: owned(&["mercy", "pity", "charity", "kindness"]),
            negative: owned(&["punishment", "law", "authority", "order", "duty"]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.positive.is_empty() || self.negative.is_empty() {
            return Err(Error::invalid(format!("axis {} needs seeds on both sides", self.name)));
        }
        let pos: HashSet<&str> = self.positive.iter().map(String::as_str).collect();
        if let Some(w) = self.negative.iter().find(|w| pos.contains(w.as_str())) {
            return Err(Error::invalid(format!("axis {}: seed {w} is on both sides", self.name)));
        }
        Ok(())
    }

    pub fn swapped(&self) -> Self {
        AxisSpec {
            name: format!("{}-swapped", self.name),
            positive: self.negative.clone(),
            negative: self.positive.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis<T> {
    pub vector: Vec<T>,
    pub pos_found: usize,
    pub neg_found: usize,
    pub missing: Vec<String>,
}

fn seed_mean<T: Scalar>(space: &EmbeddingSpace<T>, seeds: &[String], missing: &mut Vec<String>) -> (Vec<T>, usize) {
    let mut sum = vec![T::zero(); space.dim()];
    let mut found = 0;
    for s in seeds {
        match space.vector(s) {
            Some(v) => {
                found += 1;
                for (a, &x) in sum.iter_mut().zip(v) {
                    *a += x;
                }
            }
            None => missing.push(s.clone()),
        }
    }
    if found > 0 {
        let n = T::of(found as f64);
        for a in &mut sum {
            *a /= n;
        }
    }
    (sum, found)
}

/// `mean(positive seeds) − mean(negative seeds)` in `space`. Seeds missing
/// from the vocabulary are skipped and reported.
pub fn build_axis<T: Scalar>(space: &EmbeddingSpace<T>, spec: &AxisSpec) -> Result<Axis<T>> {
    spec.validate()?;
    let mut missing = Vec::new();
    let (pos, pos_found) = seed_mean(space, &spec.positive, &mut missing);
    let (neg, neg_found) = seed_mean(space, &spec.negative, &mut missing);
    if pos_found == 0 || neg_found == 0 {
        return Err(Error::invalid(format!(
            "axis {} in {}: no {} seed in vocabulary",
            spec.name,
            space.label,
            if pos_found == 0 { "positive" } else { "negative" }
        )));
    }
    let vector: Vec<T> = pos.iter().zip(&neg).map(|(&p, &n)| p - n).collect();
    if vector.iter().all(|x| x.is_zero()) {
        return Err(Error::invalid(format!(
            "axis {} in {} has zero norm",
            spec.name, space.label
        )));
    }
    Ok(Axis {
        vector,
        pos_found,
        neg_found,
        missing,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisProjection {
    pub axis: String,
    pub word: String,
    pub bin_label: String,
    /// Cosine of the word vector with the axis vector.
    pub score: f64,
    pub seeds_found_pos: usize,
    pub seeds_found_neg: usize,
}

pub fn project<T: Scalar>(space: &EmbeddingSpace<T>, axis: &Axis<T>, word: &str) -> Result<AxisProjection> {
    let v = space.require(word)?;
    Ok(AxisProjection {
        axis: String::new(),
        word: word.to_owned(),
        bin_label: space.label.clone(),
        score: cosine(v, &axis.vector),
        seeds_found_pos: axis.pos_found,
        seeds_found_neg: axis.neg_found,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityBand {
    pub axis: String,
    pub word: String,
    pub bin_label: String,
    pub full_score: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub variants: usize,
}

/// Re-scores `word` with every single present seed dropped in turn. A side
/// with fewer than two present seeds is held fixed; when neither side can
/// vary the band collapses to the full-seed score.
pub fn loo_sensitivity<T: Scalar>(space: &EmbeddingSpace<T>, spec: &AxisSpec, word: &str) -> Result<SensitivityBand> {
    let full = project(space, &build_axis(space, spec)?, word)?.score;
    let present = |seeds: &[String]| -> Vec<String> { seeds.iter().filter(|s| space.contains(s)).cloned().collect() };
    let (pos, neg) = (present(&spec.positive), present(&spec.negative));
    let mut scores = Vec::new();
    for (side, seeds) in [(true, &pos), (false, &neg)] {
        if seeds.len() < 2 {
            log::warn!(
                "axis {} in {}: {} side has {} present seed(s), held fixed",
                spec.name,
                space.label,
                if side { "positive" } else { "negative" },
                seeds.len()
            );
            continue;
        }
        for drop in seeds.iter() {
            let kept: Vec<String> = seeds.iter().filter(|s| *s != drop).cloned().collect();
            let variant = if side {
                AxisSpec {
                    name: spec.name.clone(),
                    positive: kept,
                    negative: neg.clone(),
                }
            } else {
                AxisSpec {
                    name: spec.name.clone(),
                    positive: pos.clone(),
                    negative: kept,
                }
            };
            scores.push(project(space, &build_axis(space, &variant)?, word)?.score);
        }
    }
    let (mean, min, max) = if scores.is_empty() {
        (full, full, full)
    } else {
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (mean.clamp(min, max), min, max)
    };
    Ok(SensitivityBand {
        axis: spec.name.clone(),
        word: word.to_owned(),
        bin_label: space.label.clone(),
        full_score: full,
        mean,
        min,
        max,
        variants: scores.len(),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AxisTables {
    pub scores: Vec<AxisProjection>,
    pub bands: Vec<SensitivityBand>,
    pub skipped: Vec<SkippedWord>,
}

/// Projections and bands for every (axis, word, space); the axis is rebuilt
/// in each space from that space's own seed vectors.
pub fn axis_tables<T: Scalar>(spaces: &[EmbeddingSpace<T>], specs: &[AxisSpec], words: &[String]) -> AxisTables {
    let mut out = AxisTables::default();
    for spec in specs {
        for space in spaces {
            let axis = match build_axis(space, spec) {
                Ok(a) => a,
                Err(e) => {
                    out.skipped.push(SkippedWord {
                        word: format!("<axis {}>", spec.name),
                        context: space.label.clone(),
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            for w in words {
                let result = project(space, &axis, w).and_then(|p| Ok((p, loo_sensitivity(space, spec, w)?)));
                match result {
                    Ok((mut p, band)) => {
                        p.axis = spec.name.clone();
                        out.scores.push(p);
                        out.bands.push(band);
                    }
                    Err(e) => out.skipped.push(SkippedWord {
                        word: w.clone(),
                        context: format!("{} {}", spec.name, space.label),
                        reason: e.to_string(),
                    }),
                }
            }
        }
    }
    out
}

impl AxisTables {
    pub fn write_scores_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(AXIS_SCORES_HEADER).map_err(crate::drift::csv_err)?;
        for p in &self.scores {
            w.write_record([
                p.axis.as_str(),
                p.word.as_str(),
                p.bin_label.as_str(),
                &format!("{:.6}", p.score),
                &p.seeds_found_pos.to_string(),
                &p.seeds_found_neg.to_string(),
            ])
            .map_err(crate::drift::csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_sensitivity_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(AXIS_SENSITIVITY_HEADER).map_err(crate::drift::csv_err)?;
        for b in &self.bands {
            w.write_record([
                b.axis.as_str(),
                b.word.as_str(),
                b.bin_label.as_str(),
                &format!("{:.6}", b.full_score),
                &format!("{:.6}", b.mean),
                &format!("{:.6}", b.min),
                &format!("{:.6}", b.max),
                &b.variants.to_string(),
            ])
            .map_err(crate::drift::csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}
