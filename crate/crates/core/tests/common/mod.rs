#![allow(dead_code)]

use aetas::embeddings::EmbeddingSpace;
use aetas::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix<f64> {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| gaussian(rng)).collect()).unwrap()
}

/// Haar-ish random orthogonal matrix by modified Gram-Schmidt on Gaussian rows.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> Matrix<f64> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
        for _ in 0..2 {
            for q in &rows {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            rows.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    Matrix::from_rows(&rows).unwrap()
}

pub fn random_space(label: &str, n_words: usize, dim: usize, rng: &mut impl Rng) -> EmbeddingSpace<f64> {
    let rows: Vec<(String, Vec<f64>)> = (0..n_words)
        .map(|i| (format!("w{i:04}"), (0..dim).map(|_| gaussian(rng)).collect()))
        .collect();
    EmbeddingSpace::from_rows(label, &rows).unwrap()
}

/// Every vector multiplied on the right by `r`.
pub fn rotate_space(space: &EmbeddingSpace<f64>, r: &Matrix<f64>, label: &str) -> EmbeddingSpace<f64> {
    let rows: Vec<(String, Vec<f64>)> = space
        .vocab
        .words()
        .iter()
        .map(|w| {
            let v = space.vector(w).unwrap();
            let out = (0..r.cols())
                .map(|j| v.iter().enumerate().map(|(i, x)| x * r[(i, j)]).sum())
                .collect();
            (w.clone(), out)
        })
        .collect();
    EmbeddingSpace::from_rows(label, &rows).unwrap()
}

pub fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn naive_cosine(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    d / (na * nb)
}
