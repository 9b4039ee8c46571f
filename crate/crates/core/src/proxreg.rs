//! Outlier regularization: the clamp of a measurement into a tolerance band
//! around its prediction, in scalar and matrix form, together with its
//! variational (proximal) representation.
//!
//! For a measurement `y` and prediction `f`,
//!
//! ```text
//! reg(y, f) = y                      if |y - f| <= delta
//!           = f + delta * sign(y - f) otherwise
//! ```
//!
//! which is also the unique minimizer of `|y - z| + (z - f)^2 / (2 delta)`.

use crate::error::{dim_err, Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{compensated_sum, sign, Real};

/// Outlier threshold `delta > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tolerance<T>(T);

impl<T: Real> Tolerance<T> {
    pub fn new(delta: T) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::NonFinite("tolerance"));
        }
        if delta <= T::zero() {
            return Err(Error::Input(format!("tolerance must be positive, got {delta}")));
        }
        Ok(Self(delta))
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }
}

/// Boolean matrix flagging entries, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(rows: usize, cols: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != rows * cols {
            return dim_err(format!("{} flags for a {rows}x{cols} mask", data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![false; rows * cols] }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn fraction(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.data.len() as f64
        }
    }
}

/// Result of clamping a data matrix against a prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationOutcome<T> {
    pub regularized: DenseMatrix<T>,
    pub outlier_mask: Mask,
    pub num_outliers: usize,
}

/// `f + delta·dir`, nudged toward `f` by whole ulps when rounding would
/// leave it outside the closed band. Keeps the clamp idempotent.
#[inline]
fn band_edge<T: Real>(f: T, dir: T, delta: T) -> T {
    let mut c = f + delta * dir;
    while (c - f).abs() > delta {
        c = c.next_after(f);
    }
    c
}

/// Clamp without input validation. Ties `|y - f| == delta` stay unchanged.
#[inline]
pub(crate) fn clamp<T: Real>(y: T, f: T, delta: T) -> T {
    let r = y - f;
    if r.abs() <= delta {
        y
    } else {
        band_edge(f, sign(r), delta)
    }
}

#[inline]
pub(crate) fn shrink<T: Real>(t: T, delta: T) -> T {
    sign(t) * (t.abs() - delta).max(T::zero())
}

pub fn regularize_scalar<T: Real>(y: T, f: T, delta: Tolerance<T>) -> Result<T> {
    if !y.is_finite() || !f.is_finite() {
        return Err(Error::NonFinite("regularize_scalar input"));
    }
    Ok(clamp(y, f, delta.get()))
}

/// Proximal operator of `delta·|·|`: `sign(t)·max(|t| - delta, 0)`.
pub fn soft_threshold<T: Real>(t: T, delta: Tolerance<T>) -> Result<T> {
    if !t.is_finite() {
        return Err(Error::NonFinite("soft_threshold input"));
    }
    Ok(shrink(t, delta.get()))
}

/// Element-wise clamp of `x` into the band `f ± delta`.
pub fn regularize_matrix<T: Real>(
    x: &DenseMatrix<T>,
    f: &DenseMatrix<T>,
    delta: Tolerance<T>,
) -> Result<RegularizationOutcome<T>> {
    x.ensure_same_shape(f, "regularize_matrix")?;
    let d = delta.get();
    let (rows, cols) = x.shape();
    let mut z = Vec::with_capacity(x.len());
    let mut mask = Vec::with_capacity(x.len());
    for (&xi, &fi) in x.as_slice().iter().zip(f.as_slice()) {
        z.push(clamp(xi, fi, d));
        mask.push((xi - fi).abs() > d);
    }
    let outlier_mask = Mask { rows, cols, data: mask };
    let num_outliers = outlier_mask.count();
    Ok(RegularizationOutcome {
        regularized: DenseMatrix::from_vec_unchecked(rows, cols, z),
        outlier_mask,
        num_outliers,
    })
}

/// Minimizer of `‖y - z‖₁ + ‖z - f‖² / (2 delta)` through the shrinkage of
/// `u = z - y`. Bit-identical to [`regularize_matrix`] on the same data.
pub fn variational_solve<T: Real>(y: &[T], f: &[T], delta: Tolerance<T>) -> Result<Vec<T>> {
    if y.len() != f.len() {
        return dim_err(format!("y has {} entries, f has {}", y.len(), f.len()));
    }
    if y.iter().chain(f).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("variational_solve input"));
    }
    let d = delta.get();
    Ok(y.iter()
        .zip(f)
        .map(|(&yi, &fi)| {
            let u = shrink(fi - yi, d);
            if u == T::zero() {
                yi
            } else {
                // y + u with u = (f - y) - sign(f - y)·delta, simplified.
                band_edge(fi, -sign(u), d)
            }
        })
        .collect())
}

/// `Σ|y_i - z_i| + (1/2δ) Σ(z_i - f_i)²`.
pub fn objective_prox<T: Real>(y: &[T], z: &[T], f: &[T], delta: Tolerance<T>) -> Result<T> {
    if y.len() != z.len() || y.len() != f.len() {
        return dim_err(format!("objective_prox lengths {}, {}, {}", y.len(), z.len(), f.len()));
    }
    let l1 = compensated_sum(y.iter().zip(z).map(|(&a, &b)| (a - b).abs()));
    let sq = compensated_sum(z.iter().zip(f).map(|(&a, &b)| (a - b) * (a - b)));
    Ok(l1 + sq / (T::lit(2.0) * delta.get()))
}

/// Brute-force minimization of the proximal objective, independent of the
/// closed form. Used to certify [`variational_solve`].
pub mod oracle {
    /// One-coordinate objective `|y - z| + (z - f)² / (2δ)`.
    pub fn scalar_objective(y: f64, z: f64, f: f64, delta: f64) -> f64 {
        (y - z).abs() + (z - f) * (z - f) / (2.0 * delta)
    }

    /// Scans `z ∈ [min(y,f) - 1, max(y,f) + 1]` with spacing `step` and
    /// returns the best grid point and its objective.
    pub fn grid_minimize(y: f64, f: f64, delta: f64, step: f64) -> (f64, f64) {
        let lo = y.min(f) - 1.0;
        let hi = y.max(f) + 1.0;
        let n = ((hi - lo) / step).ceil() as usize;
        let mut best = (lo, scalar_objective(y, lo, f, delta));
        for i in 1..=n {
            let z = (lo + i as f64 * step).min(hi);
            let v = scalar_objective(y, z, f, delta);
            if v < best.1 {
                best = (z, v);
            }
        }
        best
    }
}
