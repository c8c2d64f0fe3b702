use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{svd, Matrix};

/// Principal component projection of a point set.
#[derive(Clone, Debug)]
pub struct Pca<T> {
    /// `n × k` coordinates of the centered points.
    pub coords: Matrix<T>,
    /// `k × dim` principal directions (rows are unit vectors).
    pub components: Matrix<T>,
    pub mean: Vec<T>,
    /// Fraction of total variance captured by each retained component.
    pub explained_ratio: Vec<T>,
}

/// Centers `points` (one per row) and projects them onto the top `k` right
/// singular vectors of the centered matrix.
///
/// Each component's sign is fixed so that its largest-magnitude loading is
/// positive (first such index on ties).
pub fn pca_project<T: Scalar>(points: &Matrix<T>, k: usize) -> Result<Pca<T>> {
    let (n, dim) = points.shape();
    if n < 2 {
        return Err(Error::invalid("pca needs at least two points"));
    }
    if k == 0 || k > n.min(dim) {
        return Err(Error::invalid(format!(
            "pca with k = {k} on {n} points of dimension {dim}"
        )));
    }
    let inv_n = T::one() / T::of(n as f64);
    let mut mean = vec![T::zero(); dim];
    for row in points.row_iter() {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += x * inv_n;
        }
    }
    let mut centered = points.clone();
    for r in 0..n {
        for (x, &m) in centered.row_mut(r).iter_mut().zip(&mean) {
            *x -= m;
        }
    }
    let dec = svd(&centered)?;
    let mut components = Matrix::zeros(k, dim);
    for c in 0..k {
        let dir = dec.vt.row(c);
        let mut pivot = 0;
        for (i, &x) in dir.iter().enumerate() {
            if x.abs() > dir[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if dir[pivot] < T::zero() { -T::one() } else { T::one() };
        for (o, &x) in components.row_mut(c).iter_mut().zip(dir) {
            *o = sign * x;
        }
    }
    let coords = centered.matmul(&components.transpose())?;
    let total: T = dec.singular.iter().map(|&s| s * s).sum();
    let explained_ratio = dec.singular[..k]
        .iter()
        .map(|&s| if total > T::zero() { s * s / total } else { T::zero() })
        .collect();
    Ok(Pca {
        coords,
        components,
        mean,
        explained_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(m: &Matrix<f64>, a: usize, b: usize) -> f64 {
        m.row(a)
            .iter()
            .zip(m.row(b))
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn collinear_points_one_component() {
        let rows: Vec<[f64; 2]> = (1..=5).map(|t| [t as f64, 2.0 * t as f64]).collect();
        let p = pca_project(&Matrix::from_rows(&rows).unwrap(), 1).unwrap();
        assert!((p.explained_ratio[0] - 1.0).abs() < 1e-12);
        // loading (1,2)/√5, largest loading positive
        assert!(p.components[(0, 1)] > 0.0);
    }

    #[test]
    fn full_rank_projection_is_isometry() {
        let m = Matrix::from_rows(&[[0.3, 1.0, -2.0], [4.0, 0.5, 1.5], [-1.0, 2.0, 0.0], [2.0, -3.0, 1.0]]).unwrap();
        let p = pca_project(&m, 3).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((dist(&m, a, b) - dist(&p.coords, a, b)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rectangle_axes() {
        // 4 × 2 rectangle: component 1 along x, variance ratio (4/2)² = 4
        let m = Matrix::<f64>::from_rows(&[[0.0, 0.0], [4.0, 0.0], [0.0, 2.0], [4.0, 2.0]]).unwrap();
        let p = pca_project(&m, 2).unwrap();
        assert!((p.components[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!((p.components[(1, 1)].abs() - 1.0).abs() < 1e-12);
        let ratio = p.explained_ratio[0] / p.explained_ratio[1];
        assert!((ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn k_too_large() {
        let m = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(pca_project(&m, 3).is_err());
    }
}
