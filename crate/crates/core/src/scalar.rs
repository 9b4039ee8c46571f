//! Scalar abstraction shared by every solver.
//!
//! The algorithms are written once against [`Real`]. The two dense kernels that
//! dominate run time, matrix multiplication and the singular value
//! decomposition, are hooks on the trait so that each concrete float type can
//! route them to an optimized backend (`matrixmultiply` and `nalgebra`).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

use crate::error::{Error, Result};
use crate::linalg::Svd;
use crate::matrix::DenseMatrix;

/// A strided read-only view used by [`Real::gemm`].
#[derive(Debug, Clone, Copy)]
pub struct Strided<'a, T> {
    pub data: &'a [T],
    pub row_stride: usize,
    pub col_stride: usize,
}

/// Real floating point scalar usable by every routine in the crate.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// `c ← alpha·a·b + beta·c` where `a` is `m×k`, `b` is `k×n` and `c` is a
    /// row-major `m×n` buffer.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: Strided<'_, Self>,
        b: Strided<'_, Self>,
        beta: Self,
        c: &mut [Self],
    );

    /// Thin SVD with singular values sorted in non-increasing order.
    fn svd(m: &DenseMatrix<Self>) -> Result<Svd<Self>>;

    /// Adjacent representable value in the direction of `toward`.
    fn next_after(self, toward: Self) -> Self;

    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite `f64` values, which no implementor allows.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

fn check_view<T>(v: &Strided<'_, T>, rows: usize, cols: usize) {
    if rows == 0 || cols == 0 {
        return;
    }
    let last = (rows - 1) * v.row_stride + (cols - 1) * v.col_stride;
    assert!(last < v.data.len(), "strided view out of bounds");
}

macro_rules! impl_real {
    ($t:ty, $gemm:path) => {
        impl Real for $t {
            fn next_after(self, toward: Self) -> Self {
                if self.is_nan() || toward.is_nan() {
                    return <$t>::NAN;
                }
                if self == toward {
                    return toward;
                }
                if self == 0.0 {
                    return <$t>::from_bits(1).copysign(toward);
                }
                let bits = self.to_bits();
                let away_from_zero = (toward > self) == (self > 0.0);
                <$t>::from_bits(if away_from_zero { bits + 1 } else { bits - 1 })
            }

            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                alpha: Self,
                a: Strided<'_, Self>,
                b: Strided<'_, Self>,
                beta: Self,
                c: &mut [Self],
            ) {
                assert_eq!(c.len(), m * n, "gemm output has wrong length");
                if m == 0 || n == 0 {
                    return;
                }
                if k == 0 {
                    c.iter_mut().for_each(|x| *x *= beta);
                    return;
                }
                check_view(&a, m, k);
                check_view(&b, k, n);
                // SAFETY: both views were bounds-checked above against their
                // logical shapes and `c` has exactly m·n elements.
                unsafe {
                    $gemm(
                        m,
                        k,
                        n,
                        alpha,
                        a.data.as_ptr(),
                        a.row_stride as isize,
                        a.col_stride as isize,
                        b.data.as_ptr(),
                        b.row_stride as isize,
                        b.col_stride as isize,
                        beta,
                        c.as_mut_ptr(),
                        n as isize,
                        1,
                    );
                }
            }

            fn svd(m: &DenseMatrix<Self>) -> Result<Svd<Self>> {
                let (rows, cols) = m.shape();
                let r = rows.min(cols);
                if r == 0 {
                    return Ok(Svd {
                        u: DenseMatrix::zeros(rows, 0),
                        singular_values: Vec::new(),
                        v_t: DenseMatrix::zeros(0, cols),
                    });
                }
                // Wide inputs are decomposed through their transpose; the
                // direct path loses accuracy on rank-deficient wide matrices.
                let wide = rows < cols;
                let mut na = nalgebra::DMatrix::<$t>::from_row_slice(rows, cols, m.as_slice());
                if wide {
                    na = na.transpose();
                }
                let max_iters = 200 * (rows + cols).max(10);
                let svd =
                    nalgebra::linalg::SVD::try_new(na, true, true, <$t>::EPSILON, max_iters).ok_or(Error::SvdFailed)?;
                let a = svd.u.ok_or(Error::SvdFailed)?;
                let b_t = svd.v_t.ok_or(Error::SvdFailed)?;
                let s = &svd.singular_values;
                let mut order: Vec<usize> = (0..r).collect();
                order.sort_by(|&x, &y| s[y].total_cmp(&s[x]));
                let (u, v_t) = if wide {
                    (
                        DenseMatrix::from_fn(rows, r, |i, j| b_t[(order[j], i)]),
                        DenseMatrix::from_fn(r, cols, |i, j| a[(j, order[i])]),
                    )
                } else {
                    (
                        DenseMatrix::from_fn(rows, r, |i, j| a[(i, order[j])]),
                        DenseMatrix::from_fn(r, cols, |i, j| b_t[(order[i], j)]),
                    )
                };
                Ok(Svd { u, singular_values: order.iter().map(|&j| s[j]).collect(), v_t })
            }
        }
    };
}

impl_real!(f64, matrixmultiply::dgemm);
impl_real!(f32, matrixmultiply::sgemm);

/// Neumaier-compensated sum. Objective values are compared across iterations
/// at relative precision 1e-10, so plain accumulation error matters on large
/// matrices.
pub fn compensated_sum<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mathematical sign with `sign(0) = 0`.
#[inline]
pub fn sign<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Median of a non-empty slice (mean of the two central values for even length).
pub fn median<T: Real>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        Some(v[mid])
    } else {
        Some((v[mid - 1] + v[mid]) / T::lit(2.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(sign(0.0f64), 0.0);
        assert_eq!(sign(-0.0f64), 0.0);
        assert_eq!(sign(-3.0f32), -1.0);
    }

    #[test]
    fn next_after_steps_one_ulp() {
        assert_eq!(1.0f64.next_after(2.0), 1.0 + f64::EPSILON);
        assert_eq!(1.0f64.next_after(0.0), 1.0 - f64::EPSILON / 2.0);
        assert_eq!((-1.0f32).next_after(0.0), -1.0 + f32::EPSILON / 2.0);
        assert_eq!(0.0f64.next_after(-1.0), -f64::from_bits(1));
    }

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median::<f64>(&[]), None);
    }
}
