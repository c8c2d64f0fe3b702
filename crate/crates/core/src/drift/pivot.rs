use serde::{Deserialize, Serialize};

use super::jaccard;
use crate::embeddings::EmbeddingSpace;
use crate::error::Result;
use crate::scalar::{cosine, Scalar};

/// Alignment-free comparison through similarities to shared frequent words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotBaselineRecord {
    pub word: String,
    pub start: String,
    pub end: String,
    pub n_pivots: usize,
    pub top_m: usize,
    pub jaccard_top: f64,
    pub spearman: f64,
}

impl PivotBaselineRecord {
    /// `1 − spearman`: 0 for an unchanged similarity profile, up to 2.
    pub fn divergence(&self) -> f64 {
        1.0 - self.spearman
    }
}

/// Highest summed relative frequency words shared by both spaces (ties
/// lexicographic), excluding `exclude`.
pub fn select_pivots<T: Scalar>(a: &EmbeddingSpace<T>, b: &EmbeddingSpace<T>, n: usize, exclude: &str) -> Vec<String> {
    let mut shared: Vec<(&str, f64)> = a
        .vocab
        .words()
        .iter()
        .filter(|w| w.as_str() != exclude && b.contains(w))
        .map(|w| {
            (
                w.as_str(),
                a.vocab.relative_frequency(w) + b.vocab.relative_frequency(w),
            )
        })
        .collect();
    shared.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(y.0)));
    shared.truncate(n);
    shared.into_iter().map(|(w, _)| w.to_owned()).collect()
}

fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. A constant input
/// gives 0 unless both inputs are identical.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "spearman needs equally long inputs");
    if x == y {
        return 1.0;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

fn top_by_similarity(pivots: &[String], sims: &[f64], m: usize) -> Vec<String> {
    let mut idx: Vec<usize> = (0..pivots.len()).collect();
    idx.sort_by(|&i, &j| sims[j].total_cmp(&sims[i]).then_with(|| pivots[i].cmp(&pivots[j])));
    idx.into_iter().take(m).map(|i| pivots[i].clone()).collect()
}

/// Compares the word's similarity profile over `n_pivots` shared frequent
/// words in two unaligned spaces: Jaccard of the `top_m` most similar pivots
/// and Spearman correlation of the full profiles.
pub fn pivot_baseline<T: Scalar>(
    a: &EmbeddingSpace<T>,
    b: &EmbeddingSpace<T>,
    word: &str,
    n_pivots: usize,
    top_m: usize,
) -> Result<PivotBaselineRecord> {
    let va = a.require(word)?;
    let vb = b.require(word)?;
    let pivots = select_pivots(a, b, n_pivots, word);
    if pivots.len() < n_pivots {
        log::warn!(
            "only {} shared pivots between {} and {} (requested {n_pivots})",
            pivots.len(),
            a.label,
            b.label
        );
    }
    let sims = |space: &EmbeddingSpace<T>, v: &[T]| -> Vec<f64> {
        pivots
            .iter()
            .map(|p| cosine(v, space.vector(p).expect("shared pivot")))
            .collect()
    };
    let (sa, sb) = (sims(a, va), sims(b, vb));
    let m = top_m.min(pivots.len());
    Ok(PivotBaselineRecord {
        word: word.to_owned(),
        start: a.label.clone(),
        end: b.label.clone(),
        n_pivots: pivots.len(),
        top_m: m,
        jaccard_top: jaccard(&top_by_similarity(&pivots, &sa, m), &top_by_similarity(&pivots, &sb, m)),
        spearman: spearman(&sa, &sb),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        // ties: ranks (1.5, 1.5, 3) vs (1, 2, 3)
        let r = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]);
        assert!((r - 0.866_025_403_784_438_6).abs() < 1e-12);
    }

    #[test]
    fn identical_spaces() {
        let s = EmbeddingSpace::from_rows(
            "s",
            &[
                ("w", [1.0, 0.2]),
                ("p", [0.0, 1.0]),
                ("q", [1.0, 1.0]),
                ("r", [-1.0, 0.5]),
            ],
        )
        .unwrap();
        let rec = pivot_baseline(&s, &s, "w", 500, 2).unwrap();
        assert_eq!((rec.spearman, rec.jaccard_top, rec.n_pivots), (1.0, 1.0, 3));
    }

    #[test]
    fn reversed_profile() {
        // pivots at angles 0, 45, 90 degrees; the word flips from the first to the last
        let piv = [("p1", [1.0, 0.0]), ("p2", [1.0, 1.0]), ("p3", [0.0, 1.0])];
        let mut ra = piv.to_vec();
        ra.push(("w", [1.0, -0.1]));
        let mut rb = piv.to_vec();
        rb.push(("w", [-0.1, 1.0]));
        let a = EmbeddingSpace::from_rows("a", &ra).unwrap();
        let b = EmbeddingSpace::from_rows("b", &rb).unwrap();
        let rec = pivot_baseline(&a, &b, "w", 3, 1).unwrap();
        assert_eq!(rec.spearman, -1.0);
        assert_eq!(rec.jaccard_top, 0.0);
    }
}
