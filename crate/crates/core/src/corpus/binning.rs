use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::TokenizedDoc;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_TOKENS: u64 = 5_000_000;

/// Labeled, inclusive year span. The label is the first covered decade.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinSpec {
    pub label: String,
    pub start_year: i32,
    pub end_year: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeBin {
    pub spec: BinSpec,
    /// Member documents in `(year, id)` order.
    pub doc_ids: Vec<String>,
    pub token_count: u64,
    pub vocab_size: usize,
}

impl TimeBin {
    pub fn label(&self) -> &str {
        &self.spec.label
    }
}

fn decade_of(year: i32) -> i32 {
    year.div_euclid(10) * 10
}

pub fn decade_label(decade: i32) -> String {
    format!("{decade}s")
}

/// Groups documents by calendar decade and merges under-filled decades
/// forward until each bin holds at least `min_tokens` tokens. The last bin is
/// kept even when it stays below the threshold.
pub fn bin_by_decade(docs: &[TokenizedDoc], min_tokens: u64) -> Result<Vec<TimeBin>> {
    if docs.is_empty() {
        return Err(Error::NoDocuments);
    }
    let mut sorted: Vec<&TokenizedDoc> = docs.iter().collect();
    sorted.sort_by(|a, b| (a.year, &a.id).cmp(&(b.year, &b.id)));

    let mut decades: BTreeMap<i32, Vec<&TokenizedDoc>> = BTreeMap::new();
    for d in sorted {
        decades.entry(decade_of(d.year)).or_default().push(d);
    }

    let mut bins = Vec::new();
    let mut pending: Option<(i32, Vec<&TokenizedDoc>, u64)> = None;
    for (decade, members) in decades {
        let tokens: u64 = members.iter().map(|d| d.tokens.len() as u64).sum();
        let acc = pending.get_or_insert_with(|| (decade, Vec::new(), 0));
        acc.1.extend(members);
        acc.2 += tokens;
        if acc.2 >= min_tokens {
            let (first, members, total) = pending.take().expect("just inserted");
            bins.push(make_bin(first, &members, total));
        }
    }
    if let Some((first, members, total)) = pending {
        bins.push(make_bin(first, &members, total));
    }
    Ok(bins)
}

fn make_bin(first_decade: i32, members: &[&TokenizedDoc], token_count: u64) -> TimeBin {
    let vocab: HashSet<&str> = members
        .iter()
        .flat_map(|d| d.tokens.iter().map(String::as_str))
        .collect();
    TimeBin {
        spec: BinSpec {
            label: decade_label(first_decade),
            start_year: members.first().map_or(first_decade, |d| d.year),
            end_year: members.last().map_or(first_decade, |d| d.year),
        },
        doc_ids: members.iter().map(|d| d.id.clone()).collect(),
        token_count,
        vocab_size: vocab.len(),
    }
}

/// Resolves each bin's member documents, preserving bin order.
pub fn bin_documents<'a>(bins: &[TimeBin], docs: &'a [TokenizedDoc]) -> Result<Vec<Vec<&'a TokenizedDoc>>> {
    let by_id: HashMap<&str, &TokenizedDoc> = docs.iter().map(|d| (d.id.as_str(), d)).collect();
    bins.iter()
        .map(|b| {
            b.doc_ids
                .iter()
                .map(|id| {
                    by_id
                        .get(id.as_str())
                        .copied()
                        .ok_or_else(|| Error::invalid(format!("bin {} references unknown document {id}", b.label())))
                })
                .collect()
        })
        .collect()
}
