use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{bin_documents, TimeBin, TokenizedDoc};
use crate::error::Result;

pub const DIAGNOSTICS_HEADER: &str = "bin,start_year,end_year,tokens,vocab,lemma_vocab,reduction_pct";

// longest suffix first; "ies" is rewritten to "y"
const SUFFIXES: [(&str, &str); 5] = [("ies", "y"), ("ing", ""), ("es", ""), ("ed", ""), ("s", "")];
const MIN_STEM: usize = 3;

/// Naive suffix-stripping lemmatisation used for vocabulary diagnostics.
///
/// A token is reduced by its longest applicable suffix when the stem keeps at
/// least three characters and is attested: either already in the vocabulary
/// or produced by reducing some other token.
pub fn lemma_reduce(vocab: &BTreeSet<String>) -> BTreeSet<String> {
    let candidates: BTreeMap<&str, Vec<String>> = vocab
        .iter()
        .map(|w| {
            let stems = SUFFIXES
                .iter()
                .filter_map(|(suffix, repl)| {
                    let stem = w.strip_suffix(suffix)?;
                    (stem.chars().count() >= MIN_STEM).then(|| format!("{stem}{repl}"))
                })
                .collect();
            (w.as_str(), stems)
        })
        .collect();

    let mut producers: HashMap<&str, HashSet<&str>> = HashMap::new();
    for (w, stems) in &candidates {
        for s in stems {
            producers.entry(s.as_str()).or_default().insert(w);
        }
    }
    let attested = |stem: &str, from: &str| {
        vocab.contains(stem) || producers.get(stem).is_some_and(|p| p.iter().any(|&o| o != from))
    };

    candidates
        .iter()
        .map(|(w, stems)| {
            stems
                .iter()
                .find(|s| attested(s, w))
                .cloned()
                .unwrap_or_else(|| (*w).to_owned())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub bin: String,
    pub start_year: i32,
    pub end_year: i32,
    pub tokens: u64,
    pub vocab: usize,
    pub lemma_vocab: usize,
    pub reduction_pct: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusDiagnostics {
    pub rows: Vec<DiagnosticsRow>,
}

impl CorpusDiagnostics {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{DIAGNOSTICS_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{:.3}",
                r.bin, r.start_year, r.end_year, r.tokens, r.vocab, r.lemma_vocab, r.reduction_pct
            )?;
        }
        Ok(())
    }
}

/// Token, type and lemma-reduced type counts per bin.
pub fn diagnostics(bins: &[TimeBin], docs: &[TokenizedDoc]) -> Result<CorpusDiagnostics> {
    let members = bin_documents(bins, docs)?;
    let rows = bins
        .iter()
        .zip(members)
        .map(|(bin, ds)| {
            let vocab: BTreeSet<String> = ds.iter().flat_map(|d| d.tokens.iter().cloned()).collect();
            let tokens: u64 = ds.iter().map(|d| d.tokens.len() as u64).sum();
            let lemma_vocab = lemma_reduce(&vocab).len();
            let reduction_pct = if vocab.is_empty() {
                0.0
            } else {
                100.0 * (vocab.len() - lemma_vocab) as f64 / vocab.len() as f64
            };
            DiagnosticsRow {
                bin: bin.spec.label.clone(),
                start_year: bin.spec.start_year,
                end_year: bin.spec.end_year,
                tokens,
                vocab: vocab.len(),
                lemma_vocab,
                reduction_pct,
            }
        })
        .collect();
    Ok(CorpusDiagnostics { rows })
}
