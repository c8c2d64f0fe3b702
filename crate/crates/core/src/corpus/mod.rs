//! Corpus ingestion, normalization, decade binning and diagnostics.

mod binning;
mod diagnostics;
mod tei;
mod tokenize;

use std::collections::HashSet;
use std::io::BufRead;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use binning::{bin_by_decade, bin_documents, BinSpec, TimeBin, DEFAULT_MIN_TOKENS};
pub use diagnostics::{diagnostics, lemma_reduce, CorpusDiagnostics, DiagnosticsRow, DIAGNOSTICS_HEADER};
pub use tei::{extract_tei_text, TeiExtraction, TeiOptions};
pub use tokenize::{is_normalized_token, normalize_tokenize, tokenize_text};

pub const DEFAULT_YEAR_RANGE: RangeInclusive<i32> = 1600..=2100;

/// A dated raw text record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub year: i32,
    pub text: String,
}

/// A document after lowercasing and punctuation stripping.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub id: String,
    pub year: i32,
    pub tokens: Vec<String>,
}

impl AsRef<TokenizedDoc> for TokenizedDoc {
    fn as_ref(&self) -> &TokenizedDoc {
        self
    }
}

/// Reads one JSON document (`id`, `year`, `text`) per non-blank line.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| Error::Format {
            line: i + 1,
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_jsonl<W: std::io::Write, S: Serialize>(mut out: W, records: &[S]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Checks id uniqueness and the year range.
pub fn validate_documents(docs: &[Document], years: &RangeInclusive<i32>) -> Result<()> {
    let mut seen = HashSet::with_capacity(docs.len());
    for d in docs {
        if !years.contains(&d.year) {
            return Err(Error::invalid(format!(
                "document {} has year {} outside {}..={}",
                d.id,
                d.year,
                years.start(),
                years.end()
            )));
        }
        if !seen.insert(d.id.as_str()) {
            return Err(Error::invalid(format!("duplicate document id {}", d.id)));
        }
    }
    Ok(())
}

/// Sorts documents by `(year, id)`, the order every downstream stage assumes.
pub fn sort_documents(docs: &mut [TokenizedDoc]) {
    docs.sort_by(|a, b| (a.year, &a.id).cmp(&(b.year, &b.id)));
}
