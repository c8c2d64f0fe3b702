//! Orthogonal Procrustes alignment of embedding spaces onto an anchor.

use serde::{Deserialize, Serialize};

use crate::embeddings::{check_compatible, EmbeddingSpace, Provenance};
use crate::error::{Error, Result};
use crate::linalg::{svd, Matrix};
use crate::scalar::{dot, Scalar};

/// Optional preprocessing of the shared rows before estimating the rotation.
/// The rotation is always applied to the raw target vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignOptions {
    /// Length-normalize shared rows.
    pub normalize: bool,
    /// Mean-center shared rows.
    pub center: bool,
    /// Keep only the `n` most frequent shared words (summed relative frequency).
    pub top_n: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentMap<T> {
    pub base_label: String,
    pub target_label: String,
    /// `dim × dim` orthogonal matrix; aligned rows are `v · rotation`.
    pub rotation: Matrix<T>,
    pub shared_vocab: Vec<String>,
    pub shared_count: usize,
    pub options: AlignOptions,
}

/// Words present in both spaces, lexicographically ordered.
pub fn shared_vocabulary<T: Scalar>(base: &EmbeddingSpace<T>, target: &EmbeddingSpace<T>) -> Result<Vec<String>> {
    check_compatible(base, target)?;
    let mut shared: Vec<String> = base
        .vocab
        .words()
        .iter()
        .filter(|w| target.contains(w))
        .cloned()
        .collect();
    if shared.is_empty() {
        return Err(Error::invalid(format!(
            "spaces {} and {} share no vocabulary",
            base.label, target.label
        )));
    }
    shared.sort();
    Ok(shared)
}

fn stacked_rows<T: Scalar>(space: &EmbeddingSpace<T>, words: &[String], opts: &AlignOptions) -> Matrix<T> {
    let dim = space.dim();
    let mut m = Matrix::zeros(words.len(), dim);
    for (r, w) in words.iter().enumerate() {
        let v = space.vector(w).expect("shared word");
        let scale = if opts.normalize {
            let n = dot(v, v).sqrt();
            if n > T::zero() {
                T::one() / n
            } else {
                T::one()
            }
        } else {
            T::one()
        };
        for (o, &x) in m.row_mut(r).iter_mut().zip(v) {
            *o = x * scale;
        }
    }
    if opts.center {
        let inv = T::one() / T::of(words.len() as f64);
        let mut mean = vec![T::zero(); dim];
        for row in m.row_iter() {
            for (a, &x) in mean.iter_mut().zip(row) {
                *a += x * inv;
            }
        }
        for r in 0..words.len() {
            for (x, &mu) in m.row_mut(r).iter_mut().zip(&mean) {
                *x -= mu;
            }
        }
    }
    m
}

/// Rotation `R = UVᵀ` from `SVD(YᵀX) = UΣVᵀ`, minimizing `‖YR − X‖_F`
/// where `X` holds base rows and `Y` target rows over the shared vocabulary.
pub fn procrustes_align<T: Scalar>(base: &EmbeddingSpace<T>, target: &EmbeddingSpace<T>) -> Result<AlignmentMap<T>> {
    procrustes_align_with(base, target, &AlignOptions::default())
}

pub fn procrustes_align_with<T: Scalar>(
    base: &EmbeddingSpace<T>,
    target: &EmbeddingSpace<T>,
    opts: &AlignOptions,
) -> Result<AlignmentMap<T>> {
    let mut shared = shared_vocabulary(base, target)?;
    if let Some(n) = opts.top_n {
        let freq = |w: &str| base.vocab.relative_frequency(w) + target.vocab.relative_frequency(w);
        shared.sort_by(|a, b| freq(b).total_cmp(&freq(a)).then_with(|| a.cmp(b)));
        shared.truncate(n.max(1));
        shared.sort();
    }
    if shared.len() < base.dim() {
        log::warn!(
            "aligning {} to {} on {} shared words (< dim {}): rotation is underdetermined",
            target.label,
            base.label,
            shared.len(),
            base.dim()
        );
    }
    let x = stacked_rows(base, &shared, opts);
    let y = stacked_rows(target, &shared, opts);
    let rotation = rotation_between(&x, &y)?;
    Ok(AlignmentMap {
        base_label: base.label.clone(),
        target_label: target.label.clone(),
        rotation,
        shared_count: shared.len(),
        shared_vocab: shared,
        options: opts.clone(),
    })
}

/// Orthogonal `R` minimizing `‖YR − X‖_F` for row-aligned `X`, `Y`.
pub fn rotation_between<T: Scalar>(x: &Matrix<T>, y: &Matrix<T>) -> Result<Matrix<T>> {
    let m = y.t_matmul(x)?;
    let dec = svd(&m)?;
    dec.u.matmul(&dec.vt)
}

/// Replaces every row `v` of `space` by `v · R`.
pub fn apply_alignment<T: Scalar>(map: &AlignmentMap<T>, space: &EmbeddingSpace<T>) -> Result<EmbeddingSpace<T>> {
    if map.rotation.rows() != space.dim() {
        return Err(Error::DimensionMismatch(format!(
            "rotation is {}x{}, space {} has dim {}",
            map.rotation.rows(),
            map.rotation.cols(),
            space.label,
            space.dim()
        )));
    }
    if map.target_label != space.label {
        return Err(Error::invalid(format!(
            "map was estimated for {}, not {}",
            map.target_label, space.label
        )));
    }
    let vectors = space.vectors.matmul(&map.rotation)?;
    let provenance = Provenance::AlignedTo {
        base: map.base_label.clone(),
        shared_count: map.shared_count,
        normalized: map.options.normalize,
        centered: map.options.center,
        source: Box::new(space.provenance.clone()),
    };
    EmbeddingSpace::new(
        space.label.clone(),
        space.vocab.clone(),
        vectors,
        space.config.clone(),
        provenance,
    )
}

/// Aligns every space directly to the anchor (no chaining). The anchor is
/// returned unrotated; maps are returned for the non-anchor spaces in input
/// order.
pub fn align_all_to_anchor<T: Scalar>(
    spaces: &[EmbeddingSpace<T>],
    anchor_label: &str,
    opts: &AlignOptions,
) -> Result<(Vec<EmbeddingSpace<T>>, Vec<AlignmentMap<T>>)> {
    let anchor = spaces
        .iter()
        .find(|s| s.label == anchor_label)
        .ok_or_else(|| Error::invalid(format!("anchor {anchor_label} not among the spaces")))?;
    let mut aligned = Vec::with_capacity(spaces.len());
    let mut maps = Vec::new();
    for s in spaces {
        if s.label == anchor_label {
            aligned.push(s.clone());
            continue;
        }
        let map = procrustes_align_with(anchor, s, opts)?;
        aligned.push(apply_alignment(&map, s)?);
        maps.push(map);
    }
    Ok((aligned, maps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormality_error;

    fn space(label: &str, rows: &[(&str, [f64; 2])]) -> EmbeddingSpace<f64> {
        EmbeddingSpace::from_rows(label, rows).unwrap()
    }

    #[test]
    fn identical_space_gives_identity() {
        let a = space("a", &[("x", [1.0, 0.2]), ("y", [-0.3, 2.0]), ("z", [0.5, 0.5])]);
        let map = procrustes_align(&a, &a).unwrap();
        assert!(map.rotation.max_abs_diff(&Matrix::identity(2)).unwrap() < 1e-12);
        assert_eq!(map.shared_vocab, ["x", "y", "z"]);
    }

    #[test]
    fn quarter_turn_matches_angle_grid() {
        let base = space("base", &[("p", [1.0, 0.0]), ("q", [0.0, 1.0])]);
        let target = space("target", &[("p", [0.0, 1.0]), ("q", [-1.0, 0.0])]);
        let map = procrustes_align(&base, &target).unwrap();
        let expected = Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        assert!(map.rotation.max_abs_diff(&expected).unwrap() < 1e-12);

        // brute force over rotations and reflections on a fine angle grid
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let y = Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        let objective = |r: &Matrix<f64>| {
            let diff = y.matmul(r).unwrap();
            diff.as_slice()
                .iter()
                .zip(x.as_slice())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..36_000 {
            let t = i as f64 * std::f64::consts::TAU / 36_000.0;
            let (s, c) = t.sin_cos();
            for r in [[[c, -s], [s, c]], [[c, s], [s, -c]]] {
                let v = objective(&Matrix::from_rows(&r).unwrap());
                if v < best.0 {
                    best = (v, t);
                }
            }
        }
        assert!(objective(&map.rotation) <= best.0 + 1e-9);
        assert!((best.1 - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
    }

    #[test]
    fn disjoint_vocabularies_fail() {
        let a = space("a", &[("x", [1.0, 0.0])]);
        let b = space("b", &[("y", [1.0, 0.0])]);
        assert!(shared_vocabulary(&a, &b).is_err());
    }

    #[test]
    fn apply_checks_target_and_dim() {
        let a = space("a", &[("x", [1.0, 0.0]), ("y", [0.0, 1.0])]);
        let b = space("b", &[("x", [0.0, 1.0]), ("y", [1.0, 0.0])]);
        let map = procrustes_align(&a, &b).unwrap();
        assert!(apply_alignment(&map, &a).is_err());
        let aligned = apply_alignment(&map, &b).unwrap();
        assert_eq!(aligned.provenance.tag(), "aligned-to:a");
        assert!(orthonormality_error(&map.rotation) < 1e-12);
    }

    #[test]
    fn missing_anchor() {
        let a = space("a", &[("x", [1.0, 0.0])]);
        assert!(align_all_to_anchor(std::slice::from_ref(&a), "1900s", &AlignOptions::default()).is_err());
        let (out, maps) = align_all_to_anchor(std::slice::from_ref(&a), "a", &AlignOptions::default()).unwrap();
        assert_eq!(out, vec![a]);
        assert!(maps.is_empty());
    }

    #[test]
    fn top_n_restricts_rows() {
        let a = space("a", &[("x", [1.0, 0.0]), ("y", [0.0, 1.0]), ("z", [1.0, 1.0])]);
        let opts = AlignOptions {
            top_n: Some(2),
            ..AlignOptions::default()
        };
        let map = procrustes_align_with(&a, &a, &opts).unwrap();
        assert_eq!(map.shared_count, 2);
    }
}
