//! Per-word change measures between embedding spaces.

mod pivot;
mod table;

use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::scalar::{cosine, Scalar};

pub use pivot::{pivot_baseline, select_pivots, spearman, PivotBaselineRecord};
pub(crate) use table::csv_err;
pub use table::{
    drift_table, pivot_table, read_targets, temporal_norm_table, write_pivot_csv, write_temporal_norm_csv, DriftRecord,
    DriftTable, NeighborList, SkippedWord, Span, Target, TemporalNormRecord, DRIFT_HEADER, PIVOT_HEADER,
    TEMPORAL_NORM_HEADER,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub word: String,
    pub cosine: f64,
}

/// `1 − cos(v_a, v_b)` for a word present in both (aligned) spaces.
pub fn cosine_drift<T: Scalar>(a: &EmbeddingSpace<T>, b: &EmbeddingSpace<T>, word: &str) -> Result<f64> {
    let va = a.require(word)?;
    let vb = b.require(word)?;
    Ok((1.0 - cosine(va, vb)).clamp(0.0, 2.0))
}

/// Exhaustive top-`k` cosine neighbors, query excluded, ties broken
/// lexicographically.
pub fn top_k_neighbors<T: Scalar>(space: &EmbeddingSpace<T>, word: &str, k: usize) -> Result<Vec<Neighbor>> {
    let query = space.require(word)?;
    if k >= space.len() {
        return Err(Error::invalid(format!(
            "k = {k} needs a vocabulary larger than {} in {}",
            space.len(),
            space.label
        )));
    }
    let mut scored: Vec<(f64, &str)> = space
        .vocab
        .words()
        .iter()
        .zip(space.vectors.row_iter())
        .filter(|(w, _)| w.as_str() != word)
        .map(|(w, v)| (cosine(query, v), w.as_str()))
        .collect();
    let by_rank = |a: &(f64, &str), b: &(f64, &str)| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1));
    if k < scored.len() {
        scored.select_nth_unstable_by(k, by_rank);
        scored.truncate(k);
    }
    scored.sort_by(by_rank);
    Ok(scored
        .into_iter()
        .map(|(c, w)| Neighbor {
            word: w.to_owned(),
            cosine: c,
        })
        .collect())
}

pub(crate) fn jaccard<S: AsRef<str>>(a: &[S], b: &[S]) -> f64 {
    use std::collections::HashSet;
    let sa: HashSet<&str> = a.iter().map(AsRef::as_ref).collect();
    let sb: HashSet<&str> = b.iter().map(AsRef::as_ref).collect();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// Jaccard overlap of the word's top-`k` neighbor sets in two spaces.
pub fn neighbor_jaccard<T: Scalar>(a: &EmbeddingSpace<T>, b: &EmbeddingSpace<T>, word: &str, k: usize) -> Result<f64> {
    let na: Vec<String> = top_k_neighbors(a, word, k)?.into_iter().map(|n| n.word).collect();
    let nb: Vec<String> = top_k_neighbors(b, word, k)?.into_iter().map(|n| n.word).collect();
    Ok(jaccard(&na, &nb))
}

/// Euclidean distance between a word's aligned vector and its anchor vector.
pub fn temporal_norm<T: Scalar>(aligned: &EmbeddingSpace<T>, anchor: &EmbeddingSpace<T>, word: &str) -> Result<f64> {
    let v = aligned.require(word)?;
    let a = anchor.require(word)?;
    if v.len() != a.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} has dim {}, anchor {} has dim {}",
            aligned.label,
            v.len(),
            anchor.label,
            a.len()
        )));
    }
    Ok(v.iter()
        .zip(a)
        .map(|(&x, &y)| (x.as_f64() - y.as_f64()).powi(2))
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(label: &str, rows: &[(&str, [f64; 2])]) -> EmbeddingSpace<f64> {
        EmbeddingSpace::from_rows(label, rows).unwrap()
    }

    #[test]
    fn drift_cases() {
        let a = space("a", &[("w", [1.0, 0.0])]);
        let same = space("b", &[("w", [3.0, 0.0])]);
        let orth = space("c", &[("w", [0.0, 2.0])]);
        let anti = space("d", &[("w", [-1.0, 0.0])]);
        let diag = space("e", &[("w", [1.0, 1.0])]);
        assert_eq!(cosine_drift(&a, &same, "w").unwrap(), 0.0);
        assert_eq!(cosine_drift(&a, &orth, "w").unwrap(), 1.0);
        assert_eq!(cosine_drift(&a, &anti, "w").unwrap(), 2.0);
        let expected = 1.0 - 1.0 / 2f64.sqrt();
        assert!((cosine_drift(&a, &diag, "w").unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn oov_names_space() {
        let a = space("1750s", &[("w", [1.0, 0.0])]);
        let b = space("1900s", &[("v", [1.0, 0.0])]);
        match cosine_drift(&a, &b, "w") {
            Err(Error::OutOfVocabulary { space, .. }) => assert_eq!(space, "1900s"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn neighbors_hand_checked() {
        // cos(q,a)=1, cos(q,b)=cos(q,c)=1/√2 (tie → lexicographic), cos(q,d)=0
        let s = space(
            "s",
            &[
                ("q", [1.0, 0.0]),
                ("d", [0.0, 1.0]),
                ("c", [1.0, 1.0]),
                ("b", [1.0, -1.0]),
                ("a", [2.0, 0.0]),
            ],
        );
        let n = top_k_neighbors(&s, "q", 3).unwrap();
        let words: Vec<_> = n.iter().map(|n| n.word.as_str()).collect();
        assert_eq!(words, ["a", "b", "c"]);
        let all = top_k_neighbors(&s, "q", 4).unwrap();
        assert_eq!(all.len(), 4);
        assert!(top_k_neighbors(&s, "q", 5).is_err());
    }

    #[test]
    fn jaccard_one_shared_of_five() {
        let a = ["x", "a1", "a2", "a3", "a4"];
        let b = ["x", "b1", "b2", "b3", "b4"];
        assert!((jaccard(&a, &b) - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(jaccard(&a, &a), 1.0);
    }

    #[test]
    fn temporal_norm_cases() {
        let a = space("a", &[("w", [1.0, 0.0])]);
        let b = space("b", &[("w", [0.0, 1.0])]);
        assert_eq!(temporal_norm(&a, &a, "w").unwrap(), 0.0);
        assert!((temporal_norm(&a, &b, "w").unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }
}
