//! Trace-norm robust PCA baseline,
//!
//! ```text
//! min_Z ‖X - Z‖₁ + beta ‖Z‖_tr
//! ```
//!
//! solved by the inexact augmented Lagrange multiplier method on the split
//! `X = Z + S`. Dividing the objective by `beta` gives the familiar form
//! `‖Z‖_tr + λ‖S‖₁` with `λ = 1/beta`, which is what the iteration works on;
//! the minimizers are identical.
//!
//! Also hosts singular value thresholding and the closed-form
//! `½‖X - Z‖_F² + beta‖Z‖_tr` variant.

use crate::error::{input_err, Error, Result};
use crate::linalg::Svd;
use crate::matrix::DenseMatrix;
use crate::proxreg::shrink;
use crate::scalar::{compensated_sum, sign, Real};

#[derive(Debug, Clone)]
pub struct RpcaConfig<T> {
    /// Weight of the trace norm.
    pub beta: T,
    /// Initial penalty; `None` means `1.25 / σ_max(X)`.
    pub mu0: Option<T>,
    pub rho: T,
    /// The penalty stops growing at `mu0 · mu_max_factor`.
    pub mu_max_factor: T,
    pub max_iters: usize,
    /// Bound on the relative primal residual and the relative objective change.
    pub tol: T,
    pub record_trace: bool,
}

impl<T: Real> RpcaConfig<T> {
    pub fn new(beta: T) -> Self {
        Self {
            beta,
            mu0: None,
            rho: T::lit(1.5),
            mu_max_factor: T::lit(10.0),
            max_iters: 1000,
            tol: T::lit(1e-10),
            record_trace: true,
        }
    }

    /// `beta = √max(p, n)`, i.e. the usual `λ = 1/√max(p, n)` weight on the
    /// sparse term after dividing through by `beta`.
    pub fn default_beta(shape: (usize, usize)) -> T {
        T::from_usize(shape.0.max(shape.1).max(1)).unwrap_or_else(T::one).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > T::zero()) || !self.beta.is_finite() {
            return input_err(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.rho > T::one()) || !self.rho.is_finite() {
            return input_err(format!("rho must exceed 1, got {}", self.rho));
        }
        if let Some(mu) = self.mu0 {
            if !(mu > T::zero()) || !mu.is_finite() {
                return input_err(format!("mu0 must be positive, got {mu}"));
            }
        }
        if !(self.mu_max_factor >= T::one()) {
            return input_err("mu_max_factor must be at least 1");
        }
        if self.max_iters == 0 {
            return input_err("max_iters must be at least 1");
        }
        if !(self.tol > T::zero()) || !self.tol.is_finite() {
            return input_err(format!("tol must be positive, got {}", self.tol));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RpcaResult<T> {
    /// Low-rank part.
    pub z: DenseMatrix<T>,
    /// Sparse part; `X - Z - S` vanishes at convergence.
    pub s: DenseMatrix<T>,
    /// Lagrange multiplier of `X = Z + S` (scaled for `‖Z‖_tr + λ‖S‖₁`).
    pub multiplier: DenseMatrix<T>,
    pub objective_trace: Vec<T>,
    pub objective: T,
    pub rank_z: usize,
    pub primal_residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Objective, `Z`, `S`, multiplier, primal residual and rank of an iterate.
type BestIterate<T> = (T, DenseMatrix<T>, DenseMatrix<T>, DenseMatrix<T>, T, usize);

struct Thresholded<T> {
    matrix: DenseMatrix<T>,
    nuclear_norm: T,
    rank: usize,
}

fn svt_parts<T: Real>(m: &DenseMatrix<T>, tau: T) -> Result<Thresholded<T>> {
    let svd: Svd<T> = crate::linalg::svd(m)?;
    let shrunk: Vec<T> = svd.singular_values.iter().map(|&s| (s - tau).max(T::zero())).collect();
    let rank = shrunk.iter().filter(|&&s| s > T::zero()).count();
    Ok(Thresholded {
        matrix: svd.recompose_with(&shrunk)?,
        nuclear_norm: compensated_sum(shrunk.iter().copied()),
        rank,
    })
}

/// Singular value thresholding: `A · diag(max(σ - tau, 0)) · Bᵀ`, the
/// proximal operator of `tau‖·‖_tr`.
pub fn svt<T: Real>(m: &DenseMatrix<T>, tau: T) -> Result<DenseMatrix<T>> {
    if !(tau > T::zero()) || !tau.is_finite() {
        return input_err(format!("threshold must be positive, got {tau}"));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("svt input"));
    }
    Ok(svt_parts(m, tau)?.matrix)
}

/// Closed-form minimizer of `½‖X - Z‖_F² + beta‖Z‖_tr`.
pub fn l2_trace_pca<T: Real>(x: &DenseMatrix<T>, beta: T) -> Result<DenseMatrix<T>> {
    svt(x, beta)
}

/// `‖X - Z‖₁ + beta · Σσ_i(Z)`.
pub fn objective_rpca<T: Real>(x: &DenseMatrix<T>, z: &DenseMatrix<T>, beta: T) -> Result<T> {
    Ok(x.sub(z)?.l1_norm() + beta * crate::linalg::nuclear_norm(z)?)
}

fn spectral_norm<T: Real>(m: &DenseMatrix<T>) -> Result<T> {
    Ok(crate::linalg::svd(m)?.singular_values.first().copied().unwrap_or_else(T::zero))
}

pub fn fit_rpca<T: Real>(x: &DenseMatrix<T>, cfg: &RpcaConfig<T>) -> Result<RpcaResult<T>> {
    cfg.validate()?;
    if !x.is_finite() {
        return Err(Error::NonFinite("rpca data"));
    }
    let (p, n) = x.shape();
    let x_norm = x.frobenius_norm();
    if x_norm == T::zero() {
        return Ok(RpcaResult {
            z: DenseMatrix::zeros(p, n),
            s: DenseMatrix::zeros(p, n),
            multiplier: DenseMatrix::zeros(p, n),
            objective_trace: Vec::new(),
            objective: T::zero(),
            rank_z: 0,
            primal_residual: T::zero(),
            iterations: 0,
            converged: true,
        });
    }

    let lambda = T::one() / cfg.beta;
    let norm2 = spectral_norm(x)?;
    let mut mu = cfg.mu0.unwrap_or_else(|| T::lit(1.25) / norm2);
    let mu_max = mu * cfg.mu_max_factor;
    let dual_scale = norm2.max(x.max_abs() / lambda);
    let mut y = x.scale(T::one() / dual_scale);
    let mut s = DenseMatrix::zeros(p, n);
    let mut z = DenseMatrix::zeros(p, n);

    let mut trace = Vec::new();
    let mut prev_obj: Option<T> = None;
    let mut objective = T::zero();
    let mut rank_z = 0;
    let mut primal = T::infinity();
    let mut best: Option<BestIterate<T>> = None;
    let mut iterations = 0;
    let mut converged = false;

    for it in 1..=cfg.max_iters {
        iterations = it;
        let inv_mu = T::one() / mu;
        // Z-step: proximal map of ‖·‖_tr / mu
        let target = DenseMatrix::from_fn(p, n, |i, j| x[(i, j)] - s[(i, j)] + y[(i, j)] * inv_mu);
        let th = svt_parts(&target, inv_mu)?;
        z = th.matrix;
        rank_z = th.rank;
        // S-step: proximal map of λ‖·‖₁ / mu
        let st = lambda * inv_mu;
        s = DenseMatrix::from_fn(p, n, |i, j| shrink(x[(i, j)] - z[(i, j)] + y[(i, j)] * inv_mu, st));
        let resid = DenseMatrix::from_fn(p, n, |i, j| x[(i, j)] - z[(i, j)] - s[(i, j)]);
        y = y.zip_map(&resid, |a, r| a + mu * r)?;
        mu = (mu * cfg.rho).min(mu_max);

        primal = resid.frobenius_norm() / x_norm;
        objective = x.sub(&z)?.l1_norm() + cfg.beta * th.nuclear_norm;
        if cfg.record_trace {
            trace.push(objective);
        }
        if best.as_ref().is_none_or(|b| primal < b.0) {
            best = Some((primal, z.clone(), s.clone(), y.clone(), objective, rank_z));
        }
        let obj_small = prev_obj.is_some_and(|prev| (prev - objective).abs() <= cfg.tol * prev.abs());
        if primal <= cfg.tol && obj_small {
            converged = true;
            break;
        }
        prev_obj = Some(objective);
    }

    if !converged {
        if let Some((bp, bz, bs, by, bo, br)) = best {
            primal = bp;
            z = bz;
            s = bs;
            y = by;
            objective = bo;
            rank_z = br;
        }
    }
    Ok(RpcaResult {
        z,
        s,
        multiplier: y,
        objective_trace: trace,
        objective,
        rank_z,
        primal_residual: primal,
        iterations,
        converged,
    })
}

/// Residuals of the optimality conditions of `‖X - Z‖₁ + beta‖Z‖_tr` at a
/// computed solution, using `G = beta · multiplier` as the certificate:
/// `G ∈ ∂‖S‖₁` and `G/beta ∈ ∂‖Z‖_tr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport<T> {
    /// `max |G_ij - sign(S_ij)|` over entries with `|S_ij|` above the support cutoff.
    pub sign_violation: T,
    /// `max(0, max|G_ij| - 1)`.
    pub box_violation: T,
    /// `max |U_rᵀ (G/beta) V_r - I|` on the support of Z.
    pub subspace_violation: T,
    /// Max-abs of the mixed blocks `U_rᵀ W (I - V_rV_rᵀ)` and `(I - U_rU_rᵀ) W V_r`.
    pub cross_violation: T,
    /// `max(0, ‖(I - U_rU_rᵀ) W (I - V_rV_rᵀ)‖₂ - 1)`.
    pub spectral_violation: T,
}

impl<T: Real> KktReport<T> {
    pub fn max_violation(&self) -> T {
        [
            self.sign_violation,
            self.box_violation,
            self.subspace_violation,
            self.cross_violation,
            self.spectral_violation,
        ]
        .into_iter()
        .fold(T::zero(), |m, v| m.max(v))
    }
}

/// Audits a converged [`fit_rpca`] result. `S = X - Z` is used for the sign
/// pattern; entries below `1e-8 · max|X|` count as zero, and singular values
/// of Z below `1e-8 · σ_max(Z)` are outside its support.
pub fn kkt_residuals<T: Real>(x: &DenseMatrix<T>, res: &RpcaResult<T>, beta: T) -> Result<KktReport<T>> {
    let w = &res.multiplier;
    let s = x.sub(&res.z)?;
    let g = w.scale(beta);
    let cut = T::lit(1e-8) * x.max_abs();
    let mut sign_violation = T::zero();
    let mut box_violation = T::zero();
    for (&gi, &si) in g.as_slice().iter().zip(s.as_slice()) {
        if si.abs() > cut {
            sign_violation = sign_violation.max((gi - sign(si)).abs());
        }
        box_violation = box_violation.max(gi.abs() - T::one());
    }

    let svd = crate::linalg::svd(&res.z)?;
    let r = svd.rank(T::lit(1e-8));
    let (p, n) = x.shape();
    let ur = DenseMatrix::from_fn(p, r, |i, j| svd.u[(i, j)]);
    let vr = DenseMatrix::from_fn(n, r, |i, j| svd.v_t[(j, i)]);
    let core = ur.t_matmul(w)?.matmul(&vr)?;
    let subspace_violation = core.sub(&DenseMatrix::identity(r))?.max_abs();

    // W - P_U W - W P_V + P_U W P_V
    let pu_w = ur.matmul(&ur.t_matmul(w)?)?;
    let w_pv = w.matmul(&vr)?.matmul_t(&vr)?;
    let pu_w_pv = ur.matmul(&core)?.matmul_t(&vr)?;
    let left = ur.t_matmul(&w.sub(&w_pv)?)?;
    let right = w.sub(&pu_w)?.matmul(&vr)?;
    let cross_violation = left.max_abs().max(right.max_abs());
    let rest = w.sub(&pu_w)?.sub(&w_pv)?.add(&pu_w_pv)?;
    let spectral_violation = (spectral_norm(&rest)? - T::one()).max(T::zero());

    Ok(KktReport {
        sign_violation,
        box_violation: box_violation.max(T::zero()),
        subspace_violation,
        cross_violation,
        spectral_violation,
    })
}
