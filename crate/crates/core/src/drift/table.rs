use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{cosine_drift, jaccard, pivot_baseline, temporal_norm, top_k_neighbors, Neighbor, PivotBaselineRecord};
use crate::embeddings::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DRIFT_HEADER: [&str; 7] = ["word", "domain", "start", "end", "k", "drift", "overlap"];
pub const PIVOT_HEADER: [&str; 7] = ["word", "start", "end", "n_pivots", "top_m", "jaccard_top", "spearman"];
pub const TEMPORAL_NORM_HEADER: [&str; 4] = ["word", "bin", "anchor", "norm"];

/// A word to track with its user-supplied domain label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub word: String,
    pub domain: String,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: String,
    pub end: String,
}

impl Span {
    pub fn new(start: impl Into<String>, end: impl Into<String>) -> Self {
        Span {
            start: start.into(),
            end: end.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftRecord {
    pub word: String,
    pub domain: String,
    pub start_label: String,
    pub end_label: String,
    pub drift: f64,
    pub overlap_k: usize,
    pub overlap: f64,
    pub neighbors_start: Vec<Neighbor>,
    pub neighbors_end: Vec<Neighbor>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedWord {
    pub word: String,
    pub context: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborList {
    pub word: String,
    pub bin: String,
    pub k: usize,
    pub neighbors: Vec<Neighbor>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftTable {
    /// Sorted by (word, start, end, k).
    pub records: Vec<DriftRecord>,
    pub skipped: Vec<SkippedWord>,
}

impl DriftTable {
    /// Records ordered by descending drift (ties by word, span, k).
    pub fn by_drift(&self) -> Vec<&DriftRecord> {
        let mut v: Vec<&DriftRecord> = self.records.iter().collect();
        v.sort_by(|a, b| {
            b.drift
                .total_cmp(&a.drift)
                .then_with(|| record_key(a).cmp(&record_key(b)))
        });
        v
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(DRIFT_HEADER).map_err(csv_err)?;
        for r in &self.records {
            w.write_record([
                r.word.as_str(),
                r.domain.as_str(),
                r.start_label.as_str(),
                r.end_label.as_str(),
                &r.overlap_k.to_string(),
                &format!("{:.6}", r.drift),
                &format!("{:.6}", r.overlap),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Deduplicated top-k lists per (word, bin, k).
    pub fn neighbor_lists(&self) -> Vec<NeighborList> {
        let mut map: BTreeMap<(String, String, usize), Vec<Neighbor>> = BTreeMap::new();
        for r in &self.records {
            map.entry((r.word.clone(), r.start_label.clone(), r.overlap_k))
                .or_insert_with(|| r.neighbors_start.clone());
            map.entry((r.word.clone(), r.end_label.clone(), r.overlap_k))
                .or_insert_with(|| r.neighbors_end.clone());
        }
        map.into_iter()
            .map(|((word, bin, k), neighbors)| NeighborList {
                word,
                bin,
                k,
                neighbors,
            })
            .collect()
    }
}

fn record_key(r: &DriftRecord) -> (&str, &str, &str, usize) {
    (&r.word, &r.start_label, &r.end_label, r.overlap_k)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("csv: {other:?}")),
    }
}

/// Reads a `word,domain` CSV. A `word,domain` header row is optional; a
/// missing domain becomes the empty string.
pub fn read_targets<R: Read>(input: R) -> Result<Vec<Target>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format {
            line: i + 1,
            message: e.to_string(),
        })?;
        let word = rec.get(0).unwrap_or("").to_owned();
        let domain = rec.get(1).unwrap_or("").to_owned();
        if i == 0 && word == "word" {
            continue;
        }
        if word.is_empty() {
            continue;
        }
        out.push(Target { word, domain });
    }
    Ok(out)
}

fn index_spaces<T>(spaces: &[EmbeddingSpace<T>]) -> HashMap<&str, &EmbeddingSpace<T>> {
    spaces.iter().map(|s| (s.label.as_str(), s)).collect()
}

fn lookup<'a, T>(idx: &HashMap<&str, &'a EmbeddingSpace<T>>, label: &str) -> Result<&'a EmbeddingSpace<T>> {
    idx.get(label)
        .copied()
        .ok_or_else(|| Error::invalid(format!("span references unknown bin {label}")))
}

/// One record per (target, span, k). Words missing from either endpoint
/// (or with a vocabulary too small for `k`) are listed in `skipped`.
pub fn drift_table<T: Scalar>(
    aligned: &[EmbeddingSpace<T>],
    targets: &[Target],
    spans: &[Span],
    k_list: &[usize],
) -> Result<DriftTable> {
    let idx = index_spaces(aligned);
    let mut table = DriftTable::default();
    for span in spans {
        let a = lookup(&idx, &span.start)?;
        let b = lookup(&idx, &span.end)?;
        for t in targets {
            let context = format!("{}-{}", span.start, span.end);
            let drift = match cosine_drift(a, b, &t.word) {
                Ok(d) => d,
                Err(e) => {
                    table.skipped.push(SkippedWord {
                        word: t.word.clone(),
                        context,
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            for &k in k_list {
                let na = top_k_neighbors(a, &t.word, k);
                let nb = top_k_neighbors(b, &t.word, k);
                match (na, nb) {
                    (Ok(na), Ok(nb)) => {
                        let wa: Vec<&str> = na.iter().map(|n| n.word.as_str()).collect();
                        let wb: Vec<&str> = nb.iter().map(|n| n.word.as_str()).collect();
                        table.records.push(DriftRecord {
                            word: t.word.clone(),
                            domain: t.domain.clone(),
                            start_label: span.start.clone(),
                            end_label: span.end.clone(),
                            drift,
                            overlap_k: k,
                            overlap: jaccard(&wa, &wb),
                            neighbors_start: na,
                            neighbors_end: nb,
                        });
                    }
                    (Err(e), _) | (_, Err(e)) => table.skipped.push(SkippedWord {
                        word: t.word.clone(),
                        context: format!("{context} k={k}"),
                        reason: e.to_string(),
                    }),
                }
            }
        }
    }
    table.records.sort_by(|a, b| record_key(a).cmp(&record_key(b)));
    Ok(table)
}

/// Pivot baseline for every (target, span) over unaligned spaces.
pub fn pivot_table<T: Scalar>(
    spaces: &[EmbeddingSpace<T>],
    targets: &[Target],
    spans: &[Span],
    n_pivots: usize,
    top_m: usize,
) -> Result<(Vec<PivotBaselineRecord>, Vec<SkippedWord>)> {
    let idx = index_spaces(spaces);
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for span in spans {
        let a = lookup(&idx, &span.start)?;
        let b = lookup(&idx, &span.end)?;
        for t in targets {
            match pivot_baseline(a, b, &t.word, n_pivots, top_m) {
                Ok(r) => records.push(r),
                Err(e) => skipped.push(SkippedWord {
                    word: t.word.clone(),
                    context: format!("{}-{}", span.start, span.end),
                    reason: e.to_string(),
                }),
            }
        }
    }
    records.sort_by(|x, y| (&x.word, &x.start, &x.end).cmp(&(&y.word, &y.start, &y.end)));
    Ok((records, skipped))
}

pub fn write_pivot_csv<W: Write>(records: &[PivotBaselineRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PIVOT_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.word.as_str(),
            r.start.as_str(),
            r.end.as_str(),
            &r.n_pivots.to_string(),
            &r.top_m.to_string(),
            &format!("{:.6}", r.jaccard_top),
            &format!("{:.6}", r.spearman),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemporalNormRecord {
    pub word: String,
    pub bin: String,
    pub anchor_label: String,
    pub norm: f64,
}

/// `‖v_bin − v_anchor‖₂` for every target in every aligned space.
pub fn temporal_norm_table<T: Scalar>(
    aligned: &[EmbeddingSpace<T>],
    anchor_label: &str,
    targets: &[Target],
) -> Result<(Vec<TemporalNormRecord>, Vec<SkippedWord>)> {
    let idx = index_spaces(aligned);
    let anchor = lookup(&idx, anchor_label)?;
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for t in targets {
        for s in aligned {
            match temporal_norm(s, anchor, &t.word) {
                Ok(norm) => records.push(TemporalNormRecord {
                    word: t.word.clone(),
                    bin: s.label.clone(),
                    anchor_label: anchor_label.to_owned(),
                    norm,
                }),
                Err(e) => skipped.push(SkippedWord {
                    word: t.word.clone(),
                    context: s.label.clone(),
                    reason: e.to_string(),
                }),
            }
        }
    }
    Ok((records, skipped))
}

pub fn write_temporal_norm_csv<W: Write>(records: &[TemporalNormRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TEMPORAL_NORM_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.word.as_str(),
            r.bin.as_str(),
            r.anchor_label.as_str(),
            &format!("{:.6}", r.norm),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spaces() -> Vec<EmbeddingSpace<f64>> {
        let a = EmbeddingSpace::from_rows(
            "a",
            &[
                ("w", [1.0, 0.0]),
                ("x", [0.9, 0.1]),
                ("y", [0.0, 1.0]),
                ("z", [-1.0, 0.2]),
            ],
        )
        .unwrap();
        let b = EmbeddingSpace::from_rows(
            "b",
            &[
                ("w", [0.0, 1.0]),
                ("x", [0.9, 0.1]),
                ("y", [0.1, 1.0]),
                ("z", [-1.0, 0.2]),
            ],
        )
        .unwrap();
        vec![a, b]
    }

    #[test]
    fn oov_targets_are_reported() {
        let targets = vec![
            Target {
                word: "w".into(),
                domain: "legal".into(),
            },
            Target {
                word: "nope".into(),
                domain: "social".into(),
            },
        ];
        let t = drift_table(&spaces(), &targets, &[Span::new("a", "b")], &[1, 2, 9]).unwrap();
        assert_eq!(t.records.len(), 2);
        assert_eq!(t.skipped.len(), 2);
        assert_eq!(t.records[0].neighbors_start[0].word, "x");
        assert_eq!(t.records[0].neighbors_end[0].word, "y");
        assert_eq!(t.records[0].overlap, 0.0);
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "word,domain,start,end,k,drift,overlap");
        assert_eq!(csv.lines().nth(1).unwrap(), "w,legal,a,b,1,1.000000,0.000000");
    }

    #[test]
    fn unknown_span_label_is_error() {
        assert!(drift_table(&spaces(), &[], &[Span::new("a", "q")], &[1]).is_err());
    }

    #[test]
    fn targets_with_and_without_header() {
        let t = read_targets("word,domain\njustice,legal\n# note\ncharity\n".as_bytes()).unwrap();
        assert_eq!(
            t,
            vec![
                Target {
                    word: "justice".into(),
                    domain: "legal".into()
                },
                Target {
                    word: "charity".into(),
                    domain: "".into()
                },
            ]
        );
    }
}
