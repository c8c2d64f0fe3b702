use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

use super::Matrix;

const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `M = U · diag(singular) · Vᵀ`.
///
/// With `r = min(rows, cols)`, `u` is `rows × r`, `vt` is `r × cols`, and the
/// singular values are non-negative and sorted in descending order.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub singular: Vec<T>,
    pub vt: Matrix<T>,
}

impl<T: Scalar> Svd<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        let mut us = self.u.clone();
        for r in 0..us.rows() {
            for (x, &s) in us.row_mut(r).iter_mut().zip(&self.singular) {
                *x *= s;
            }
        }
        us.matmul(&self.vt).expect("conforming factors")
    }
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns of the tall orientation are orthogonalized pairwise by plane
/// rotations until every pair is orthogonal to working precision; the column
/// norms are then the singular values.
pub fn svd<T: Scalar>(m: &Matrix<T>) -> Result<Svd<T>> {
    if !m.is_finite() {
        return Err(Error::invalid("svd input contains non-finite entries"));
    }
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("svd of an empty matrix"));
    }
    // Work on the rows of `w`; they are the columns of the tall orientation B.
    let tall = rows >= cols;
    let w = if tall { m.transpose() } else { m.clone() };
    let (basis, singular, left) = jacobi(w)?;
    // B = left · Σ · basisᵀ, with B = M (tall) or B = Mᵀ (wide).
    if tall {
        Ok(Svd {
            u: left,
            singular,
            vt: basis.transpose(),
        })
    } else {
        Ok(Svd {
            u: basis,
            singular,
            vt: left.transpose(),
        })
    }
}

/// Orthogonalizes the rows of `w` (n vectors of length len, n ≤ len).
/// Returns (V as n×n with columns = right vectors, σ, U as len×n).
fn jacobi<T: Scalar>(mut w: Matrix<T>) -> Result<(Matrix<T>, Vec<T>, Matrix<T>)> {
    let (n, len) = w.shape();
    // rows of vrows are the columns of V
    let mut vrows = Matrix::<T>::identity(n);
    let eps = T::epsilon();
    let mut converged = false;
    let mut residual = T::zero();
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        residual = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (wp, wq) = (w.row(p), w.row(q));
                    (dot(wp, wp), dot(wq, wq), dot(wp, wq))
                };
                if alpha == T::zero() || beta == T::zero() {
                    continue;
                }
                let off = gamma.abs() / (alpha * beta).sqrt();
                residual = residual.max(off);
                if off <= eps {
                    continue;
                }
                rotated = true;
                let two = T::one() + T::one();
                let zeta = (beta - alpha) / (two * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut w, p, q, c, s);
                rotate_rows(&mut vrows, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps,
            residual: residual.as_f64(),
        });
    }

    let norms: Vec<T> = w.row_iter().map(|r| dot(r, r).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).expect("finite norms"));

    let sigma_max = norms[order[0]];
    let tol = sigma_max * eps * T::of(len.max(n) as f64);
    let singular: Vec<T> = order.iter().map(|&i| norms[i]).collect();

    let mut left_cols: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        if norms[i] > tol {
            left_cols.push(w.row(i).iter().map(|&x| x / norms[i]).collect());
        } else {
            left_cols.push(vec![T::zero(); len]);
            pending.push(k);
        }
    }
    complete_orthonormal(&mut left_cols, &pending);

    let mut left = Matrix::zeros(len, n);
    for (k, col) in left_cols.iter().enumerate() {
        for (r, &x) in col.iter().enumerate() {
            left[(r, k)] = x;
        }
    }
    let mut basis = Matrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for (r, &x) in vrows.row(i).iter().enumerate() {
            basis[(r, k)] = x;
        }
    }
    Ok((basis, singular, left))
}

fn rotate_rows<T: Scalar>(m: &mut Matrix<T>, p: usize, q: usize, c: T, s: T) {
    let cols = m.cols();
    let data = &mut m.data[..];
    let (head, tail) = data.split_at_mut(q * cols);
    let rp = &mut head[p * cols..(p + 1) * cols];
    let rq = &mut tail[..cols];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Replaces the vectors at `pending` with unit vectors orthogonal to all
/// others (Gram-Schmidt over the standard basis, two passes).
fn complete_orthonormal<T: Scalar>(cols: &mut [Vec<T>], pending: &[usize]) {
    if pending.is_empty() {
        return;
    }
    let len = cols[0].len();
    let mut candidate = 0;
    for &k in pending {
        loop {
            assert!(candidate < len, "basis completion exhausted");
            let mut v = vec![T::zero(); len];
            v[candidate] = T::one();
            candidate += 1;
            for _ in 0..2 {
                for (j, other) in cols.iter().enumerate() {
                    if j == k {
                        continue;
                    }
                    let proj = dot(&v, other);
                    for (a, &b) in v.iter_mut().zip(other) {
                        *a -= proj * b;
                    }
                }
            }
            let nv = dot(&v, &v).sqrt();
            if nv > T::of(0.5) {
                cols[k] = v.into_iter().map(|x| x / nv).collect();
                break;
            }
        }
    }
}
