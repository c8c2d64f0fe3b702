use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::special::t_two_sided_p;
use super::Matrix;

/// Least squares fit with classical (homoskedastic) inference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    /// Intercept first when the design's first column is the intercept.
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub dof: usize,
}

/// Ordinary least squares via Householder QR of the design.
///
/// Standard errors come from `σ̂²(XᵀX)⁻¹` with `σ̂² = RSS/(n−p)`, where
/// `(XᵀX)⁻¹ = R⁻¹R⁻ᵀ`. `R²` is centered (the design is expected to carry an
/// intercept column); a constant response gives `R² = 0`.
pub fn ols<T: Scalar>(y: &[T], design: &Matrix<T>) -> Result<RegressionResult> {
    let (n, p) = design.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    if p == 0 || n <= p {
        return Err(Error::invalid(format!(
            "ols needs more rows than columns (rows {n}, columns {p})"
        )));
    }
    // QR on an f64 copy; y carried along so Qᵀy falls out of the reflections.
    let mut a: Vec<Vec<f64>> = (0..p)
        .map(|c| design.column(c).iter().map(|x| x.as_f64()).collect())
        .collect();
    let mut qty: Vec<f64> = y.iter().map(|v| v.as_f64()).collect();
    let mut r = vec![vec![0.0; p]; p];
    for k in 0..p {
        let norm = a[k][k..].iter().map(|x| x * x).sum::<f64>().sqrt();
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(k) {
                reflect(&v, vnorm2, &mut col[k..]);
            }
            reflect(&v, vnorm2, &mut qty[k..]);
        }
        for (j, col) in a.iter().enumerate().skip(k) {
            r[k][j] = col[k];
        }
    }

    let diag_max = (0..p).map(|i| r[i][i].abs()).fold(0.0, f64::max);
    let tol = diag_max * f64::EPSILON.powf(2.0 / 3.0);
    if diag_max == 0.0 || (0..p).any(|i| r[i][i].abs() <= tol) {
        return Err(Error::RankDeficient);
    }

    // back substitution R β = (Qᵀy)[..p]
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = ((i + 1)..p).map(|j| r[i][j] * beta[j]).sum();
        beta[i] = (qty[i] - s) / r[i][i];
    }

    // R⁻¹ (upper triangular)
    let mut rinv = vec![vec![0.0; p]; p];
    for i in 0..p {
        rinv[i][i] = 1.0 / r[i][i];
        for j in (i + 1)..p {
            let s: f64 = (i..j).map(|k| rinv[i][k] * r[k][j]).sum();
            rinv[i][j] = -s / r[j][j];
        }
    }

    let y64: Vec<f64> = y.iter().map(|v| v.as_f64()).collect();
    let residuals: Vec<f64> = (0..n)
        .map(|i| {
            let fit: f64 = (0..p).map(|j| design[(i, j)].as_f64() * beta[j]).sum();
            y64[i] - fit
        })
        .collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let dof = n - p;
    let sigma2 = rss / dof as f64;

    let mean = y64.iter().sum::<f64>() / n as f64;
    let tss: f64 = y64.iter().map(|v| (v - mean) * (v - mean)).sum();
    let scale = y64.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let r_squared = if tss <= (scale * f64::EPSILON).powi(2) * n as f64 * 16.0 {
        0.0
    } else {
        (1.0 - rss / tss).clamp(0.0, 1.0)
    };

    let mut std_errors = Vec::with_capacity(p);
    let mut t_stats = Vec::with_capacity(p);
    let mut p_values = Vec::with_capacity(p);
    for j in 0..p {
        let cjj: f64 = (j..p).map(|k| rinv[j][k] * rinv[j][k]).sum();
        let se = (sigma2 * cjj).sqrt();
        let t = if se > 0.0 {
            beta[j] / se
        } else if beta[j] == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(beta[j])
        };
        std_errors.push(se);
        t_stats.push(t);
        p_values.push(t_two_sided_p(t, dof as f64));
    }

    Ok(RegressionResult {
        coefficients: beta,
        std_errors,
        t_stats,
        p_values,
        r_squared,
        residuals,
        dof,
    })
}

fn reflect(v: &[f64], vnorm2: f64, x: &mut [f64]) {
    let s: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let f = 2.0 * s / vnorm2;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(xs: &[f64]) -> Matrix<f64> {
        let rows: Vec<[f64; 2]> = xs.iter().map(|&x| [1.0, x]).collect();
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let fit = ols(&y, &design(&xs)).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncorrelated_response() {
        // x symmetric, y even in x: zero covariance
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let y = [1.0, -1.0, 0.0, -1.0, 1.0];
        let fit = ols(&y, &design(&xs)).unwrap();
        assert!(fit.coefficients[1].abs() < 1e-12);
        assert!(fit.r_squared < 1e-12);
    }

    #[test]
    fn constant_response_has_zero_r2() {
        let xs = [0.1, 0.5, 0.9, 1.7];
        let y = [0.3; 4];
        let fit = ols(&y, &design(&xs)).unwrap();
        assert_eq!(fit.r_squared, 0.0);
        assert!(fit.coefficients[1].abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_detected() {
        let rows = [[1.0, 2.0, 4.0], [1.0, 3.0, 6.0], [1.0, 5.0, 10.0], [1.0, 7.0, 14.0]];
        let x = Matrix::from_rows(&rows).unwrap();
        assert!(matches!(ols(&[1.0, 2.0, 3.0, 4.0], &x), Err(Error::RankDeficient)));
    }

    #[test]
    fn too_few_rows() {
        assert!(ols(&[1.0, 2.0], &design(&[0.0, 1.0])).is_err());
    }
}
