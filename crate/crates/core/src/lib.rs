//! Outlier regularization and the robust low-rank solvers built on it.
//!
//! * [`proxreg`]: the clamp of measurements into a tolerance band around a
//!   prediction, its proximal form and a brute-force oracle.
//! * [`orlr`]: outlier-regularized linear regression and its L1 limit.
//! * [`orpca`]: outlier-regularized PCA and its L1-PCA limit.
//! * [`rpca`]: trace-norm robust PCA via inexact ALM, SVT and the L2 variant.
//!
//! Everything is generic over [`Real`] (`f32` and `f64`); the aliases below
//! fix the common `f64` instantiation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod matrix;
pub mod orlr;
pub mod orpca;
pub mod proxreg;
pub mod rpca;
pub mod scalar;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use proxreg::{Mask, RegularizationOutcome, Tolerance};
pub use scalar::Real;

pub type Matrix = DenseMatrix<f64>;
pub type Matrix32 = DenseMatrix<f32>;
pub type Delta = Tolerance<f64>;
pub type OrlrConfig = orlr::OrlrConfig<f64>;
pub type OrlrResult = orlr::OrlrResult<f64>;
pub type OrpcaConfig = orpca::OrpcaConfig<f64>;
pub type OrpcaResult = orpca::OrpcaResult<f64>;
pub type RpcaConfig = rpca::RpcaConfig<f64>;
pub type RpcaResult = rpca::RpcaResult<f64>;
