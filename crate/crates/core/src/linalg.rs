//! Spectral helpers built on the SVD hook: pseudo-inverses, rank-tolerant
//! solves, numerical rank and nuclear norm.

use crate::error::{dim_err, Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{compensated_sum, Real};

/// Relative singular-value cutoff used by every rank-tolerant solve.
pub const PINV_RCOND: f64 = 1e-12;

/// Relative cutoff defining numerical rank.
pub const RANK_RCOND: f64 = 1e-10;

/// Thin SVD `M = U · diag(σ) · Vᵀ`, σ non-increasing.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    /// `rows × r`, orthonormal columns.
    pub u: DenseMatrix<T>,
    pub singular_values: Vec<T>,
    /// `r × cols`, orthonormal rows.
    pub v_t: DenseMatrix<T>,
}

impl<T: Real> Svd<T> {
    /// Recombines `U · diag(s) · Vᵀ` with replacement singular values.
    pub fn recompose_with(&self, s: &[T]) -> Result<DenseMatrix<T>> {
        if s.len() != self.singular_values.len() {
            return dim_err("replacement spectrum has the wrong length");
        }
        let (rows, r) = self.u.shape();
        // Scaling columns of U first keeps the product a single GEMM.
        let us = DenseMatrix::from_fn(rows, r, |i, j| self.u[(i, j)] * s[j]);
        us.matmul(&self.v_t)
    }

    /// Number of leading singular values above `rcond · σ_max`.
    pub fn rank(&self, rcond: T) -> usize {
        let Some(&smax) = self.singular_values.first() else {
            return 0;
        };
        if smax <= T::zero() {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s > rcond * smax).count()
    }
}

/// Thin SVD. The [`Real::svd`] kernel result is checked for orthonormal
/// factors and a rounding-level reconstruction residual; on failure the
/// decomposition is recomputed by one-sided Jacobi.
pub fn svd<T: Real>(m: &DenseMatrix<T>) -> Result<Svd<T>> {
    if !m.is_finite() {
        return Err(Error::NonFinite("svd input"));
    }
    match T::svd(m) {
        Ok(s) if is_valid_svd(m, &s)? => Ok(s),
        _ => jacobi_svd(m),
    }
}

fn is_valid_svd<T: Real>(m: &DenseMatrix<T>, s: &Svd<T>) -> Result<bool> {
    let (rows, cols) = m.shape();
    let r = s.singular_values.len();
    if r == 0 {
        return Ok(true);
    }
    if s.singular_values.iter().any(|v| !(*v >= T::zero())) {
        return Ok(false);
    }
    let slack = T::lit(1e3) * T::epsilon() * T::from_usize(rows.max(cols)).unwrap_or_else(T::one);
    let eye = DenseMatrix::identity(r);
    if s.u.t_matmul(&s.u)?.sub(&eye)?.max_abs() > slack || s.v_t.matmul_t(&s.v_t)?.sub(&eye)?.max_abs() > slack {
        return Ok(false);
    }
    let scale = s.singular_values[0].max(T::min_positive_value());
    Ok(s.recompose_with(&s.singular_values)?.sub(m)?.max_abs() <= slack * scale)
}

/// One-sided (Hestenes) Jacobi SVD on the taller orientation.
pub(crate) fn jacobi_svd<T: Real>(m: &DenseMatrix<T>) -> Result<Svd<T>> {
    let (rows, cols) = m.shape();
    let wide = rows < cols;
    let (len, r) = if wide { (cols, rows) } else { (rows, cols) };
    if r == 0 {
        return Ok(Svd {
            u: DenseMatrix::zeros(rows, 0),
            singular_values: Vec::new(),
            v_t: DenseMatrix::zeros(0, cols),
        });
    }
    // w[j]: j-th column of the tall orientation; v[j]: accumulated rotation.
    let mut w: Vec<Vec<T>> =
        (0..r).map(|j| (0..len).map(|i| if wide { m[(j, i)] } else { m[(i, j)] }).collect()).collect();
    let mut v: Vec<Vec<T>> =
        (0..r).map(|j| (0..r).map(|i| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    let eps = T::epsilon();
    let total: T = compensated_sum(w.iter().map(|c| dot(c, c)));
    let negligible = eps * eps * total;
    let mut converged = false;
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..r {
            for q in p + 1..r {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if alpha <= negligible || beta <= negligible || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = w.split_at_mut(q);
                for (a, b) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                }
                let (lo, hi) = v.split_at_mut(q);
                for (a, b) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdFailed);
    }

    let sigma: Vec<T> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap_or(std::cmp::Ordering::Equal));
    let smax = sigma[order[0]];
    let cutoff = eps * T::from_usize(len).unwrap_or_else(T::one) * smax;

    // Left vectors: normalized columns; columns of negligible norm are
    // completed to an orthonormal set.
    let mut left: Vec<Vec<T>> = Vec::with_capacity(r);
    for &j in &order {
        if sigma[j] > cutoff && sigma[j] > T::zero() {
            left.push(w[j].iter().map(|&x| x / sigma[j]).collect());
        } else {
            left.push(Vec::new());
        }
    }
    for j in 0..r {
        if !left[j].is_empty() {
            continue;
        }
        let mut best: Option<(T, Vec<T>)> = None;
        for e in 0..len {
            let mut cand: Vec<T> = (0..len).map(|i| if i == e { T::one() } else { T::zero() }).collect();
            for _ in 0..2 {
                for other in left.iter().filter(|o| !o.is_empty()) {
                    let d = dot(other, &cand);
                    cand.iter_mut().zip(other).for_each(|(x, &y)| *x -= d * y);
                }
            }
            let norm = dot(&cand, &cand).sqrt();
            if best.as_ref().is_none_or(|(n, _)| norm > *n) {
                best = Some((norm, cand));
            }
        }
        match best {
            Some((norm, cand)) if norm > T::epsilon() => left[j] = cand.into_iter().map(|x| x / norm).collect(),
            _ => return Err(Error::SvdFailed),
        }
    }
    let values: Vec<T> = order.iter().map(|&j| if sigma[j] > cutoff { sigma[j] } else { T::zero() }).collect();

    // Tall orientation: A = L·diag(σ)·Rᵀ with L = left, R = v (by column).
    let (u, v_t) = if wide {
        (DenseMatrix::from_fn(rows, r, |i, j| v[order[j]][i]), DenseMatrix::from_fn(r, cols, |i, j| left[i][j]))
    } else {
        (DenseMatrix::from_fn(rows, r, |i, j| left[j][i]), DenseMatrix::from_fn(r, cols, |i, j| v[order[i]][j]))
    };
    Ok(Svd { u, singular_values: values, v_t })
}

pub fn singular_values<T: Real>(m: &DenseMatrix<T>) -> Result<Vec<T>> {
    Ok(svd(m)?.singular_values)
}

/// Count of singular values exceeding `rcond · σ_max`.
pub fn numerical_rank<T: Real>(m: &DenseMatrix<T>, rcond: T) -> Result<usize> {
    Ok(svd(m)?.rank(rcond))
}

/// Trace (nuclear) norm: the sum of singular values.
pub fn nuclear_norm<T: Real>(m: &DenseMatrix<T>) -> Result<T> {
    Ok(compensated_sum(svd(m)?.singular_values))
}

/// Moore–Penrose pseudo-inverse, discarding singular values at or below
/// `rcond · σ_max`.
pub fn pinv<T: Real>(m: &DenseMatrix<T>, rcond: T) -> Result<DenseMatrix<T>> {
    let svd = svd(m)?;
    let smax = svd.singular_values.first().copied().unwrap_or_else(T::zero);
    let cutoff = rcond * smax;
    let inv: Vec<T> = svd
        .singular_values
        .iter()
        .map(|&s| if s > cutoff && s > T::zero() { T::one() / s } else { T::zero() })
        .collect();
    // pinv = V · diag(1/σ) · Uᵀ
    let (r, cols) = svd.v_t.shape();
    let v_scaled = DenseMatrix::from_fn(cols, r, |i, j| svd.v_t[(j, i)] * inv[j]);
    v_scaled.matmul_t(&svd.u)
}

/// Solves the symmetric positive semi-definite system `G x = rhs` for every
/// column of `rhs` through the pseudo-inverse of `G`.
pub fn solve_psd<T: Real>(gram: &DenseMatrix<T>, rhs: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if gram.rows() != gram.cols() || gram.rows() != rhs.rows() {
        return dim_err(format!(
            "system {}x{} with right-hand side {}x{}",
            gram.rows(),
            gram.cols(),
            rhs.rows(),
            rhs.cols()
        ));
    }
    pinv(gram, T::lit(PINV_RCOND))?.matmul(rhs)
}
