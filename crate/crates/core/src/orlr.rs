//! Outlier-regularized linear regression.
//!
//! Alternates an ordinary least-squares fit of the affine prediction
//! `f_j = aᵀx_j + b` to the current targets with the clamp of the observed
//! targets into the band `f ± delta`. Each half-step exactly minimizes
//!
//! ```text
//! ‖y - z‖₁ + ‖z - (aᵀX + b)‖² / (2 delta)
//! ```
//!
//! over its own block, so the objective never increases. Letting `delta → 0`
//! with warm starts yields L1 (least absolute deviation) regression.

use crate::error::{dim_err, input_err, Error, Result};
use crate::linalg::solve_psd;
use crate::matrix::DenseMatrix;
use crate::proxreg::{clamp, objective_prox, Tolerance};
use crate::scalar::{median, Real};

#[derive(Debug, Clone)]
pub struct OrlrConfig<T> {
    pub delta: Tolerance<T>,
    pub max_iters: usize,
    /// Relative objective change (and relative target change) stopping threshold.
    pub tol: T,
    pub record_trace: bool,
}

impl<T: Real> OrlrConfig<T> {
    pub fn new(delta: Tolerance<T>) -> Self {
        Self { delta, max_iters: 200, tol: T::lit(1e-10), record_trace: true }
    }

    pub fn validate(&self) -> Result<()> {
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
pub struct OrlrResult<T> {
    pub a: Vec<T>,
    pub b: T,
    /// Regularized targets.
    pub y_tilde: Vec<T>,
    pub outlier_mask: Vec<bool>,
    /// Objective after every full iteration (empty unless `record_trace`).
    pub objective_trace: Vec<T>,
    pub objective: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> OrlrResult<T> {
    pub fn num_outliers(&self) -> usize {
        self.outlier_mask.iter().filter(|&&b| b).count()
    }
}

fn check_design<T: Real>(x: &DenseMatrix<T>, t: &[T]) -> Result<()> {
    if x.cols() != t.len() {
        return dim_err(format!("design has {} samples but {} targets were given", x.cols(), t.len()));
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regression targets"));
    }
    Ok(())
}

/// Affine prediction `aᵀX + b` for a `p×n` design.
pub fn predict<T: Real>(x: &DenseMatrix<T>, a: &[T], b: T) -> Result<Vec<T>> {
    if a.len() != x.rows() {
        return dim_err(format!("slope has {} entries for {} features", a.len(), x.rows()));
    }
    let mut f = vec![b; x.cols()];
    for (i, &ai) in a.iter().enumerate() {
        for (fj, &xij) in f.iter_mut().zip(x.row(i)) {
            *fj += ai * xij;
        }
    }
    Ok(f)
}

/// Least-squares fit of `t ≈ aᵀX + b` through the normal equations of the
/// augmented design `[X; 1ᵀ]`, solved with a pseudo-inverse so rank-deficient
/// designs return the minimum-norm solution.
pub fn ols_fit<T: Real>(x: &DenseMatrix<T>, t: &[T]) -> Result<(Vec<T>, T)> {
    check_design(x, t)?;
    let (p, n) = x.shape();
    let mut aug = Vec::with_capacity((p + 1) * n);
    aug.extend_from_slice(x.as_slice());
    aug.extend(std::iter::repeat_n(T::one(), n));
    let aug = DenseMatrix::new(p + 1, n, aug)?;
    let gram = aug.matmul_t(&aug)?;
    let rhs = aug.matmul(&DenseMatrix::new(n, 1, t.to_vec())?)?;
    let mut theta = solve_psd(&gram, &rhs)?.into_vec();
    let b = theta.pop().unwrap_or_else(T::zero);
    Ok((theta, b))
}

/// `‖y - z‖₁ + ‖z - (aᵀX + b)‖² / (2 delta)`.
pub fn objective_orlr<T: Real>(y: &[T], z: &[T], a: &[T], b: T, x: &DenseMatrix<T>, delta: Tolerance<T>) -> Result<T> {
    check_design(x, y)?;
    let f = predict(x, a, b)?;
    objective_prox(y, z, &f, delta)
}

fn max_abs_change<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&u, &v)| m.max((u - v).abs()))
}

/// Runs the alternating scheme starting from `z = y`.
pub fn fit_orlr<T: Real>(x: &DenseMatrix<T>, y: &[T], cfg: &OrlrConfig<T>) -> Result<OrlrResult<T>> {
    fit_orlr_from(x, y, cfg, None)
}

/// Runs the alternating scheme, optionally warm-started at `(a, b)`; the
/// initial targets are then the clamp of `y` around that prediction.
pub fn fit_orlr_from<T: Real>(
    x: &DenseMatrix<T>,
    y: &[T],
    cfg: &OrlrConfig<T>,
    warm: Option<(&[T], T)>,
) -> Result<OrlrResult<T>> {
    cfg.validate()?;
    check_design(x, y)?;
    let delta = cfg.delta.get();
    let n = y.len();

    let mut z: Vec<T> = match warm {
        None => y.to_vec(),
        Some((a, b)) => {
            let f = predict(x, a, b)?;
            y.iter().zip(&f).map(|(&yi, &fi)| clamp(yi, fi, delta)).collect()
        }
    };

    let y_scale = y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let step_scale = y_scale.max(T::min_positive_value());
    let eps = T::epsilon();
    let floor =
        T::lit(100.0) * T::from_usize(n.max(1)).unwrap_or_else(T::one) * (eps * (T::one() + y_scale)).powi(2) / delta;

    let mut trace = Vec::new();
    let mut prev_obj: Option<T> = None;
    let mut a = vec![T::zero(); x.rows()];
    let mut b = T::zero();
    let mut f = Vec::new();
    let mut objective = T::zero();
    let mut iterations = 0;
    let mut converged = false;

    for it in 1..=cfg.max_iters {
        iterations = it;
        let (na, nb) = ols_fit(x, &z)?;
        a = na;
        b = nb;
        f = predict(x, &a, b)?;
        let before = prev_obj.unwrap_or(objective_prox(y, &z, &f, cfg.delta)?);

        let z_new: Vec<T> = y.iter().zip(&f).map(|(&yi, &fi)| clamp(yi, fi, delta)).collect();
        objective = objective_prox(y, &z_new, &f, cfg.delta)?;
        if cfg.record_trace {
            trace.push(objective);
        }
        let step = max_abs_change(&z_new, &z);
        z = z_new;

        let obj_small = (before - objective).abs() <= cfg.tol * before.abs();
        let step_small = step <= cfg.tol * step_scale;
        if objective <= floor || (obj_small && step_small) {
            converged = true;
            break;
        }
        prev_obj = Some(objective);
    }

    let outlier_mask = y.iter().zip(&f).map(|(&yi, &fi)| (yi - fi).abs() > delta).collect();
    Ok(OrlrResult { a, b, y_tilde: z, outlier_mask, objective_trace: trace, objective, iterations, converged })
}

/// Settings for the `delta → 0` continuation.
#[derive(Debug, Clone)]
pub struct ContinuationConfig<T> {
    /// Strictly decreasing positive deltas. `None` selects the default
    /// schedule derived from the data.
    pub schedule: Option<Vec<T>>,
    pub max_iters: usize,
    pub tol: T,
}

impl<T: Real> Default for ContinuationConfig<T> {
    fn default() -> Self {
        Self { schedule: None, max_iters: 500, tol: T::lit(1e-10) }
    }
}

pub(crate) fn validate_schedule<T: Real>(schedule: &[T]) -> Result<()> {
    if schedule.is_empty() {
        return input_err("delta schedule is empty");
    }
    if schedule.iter().any(|&d| !(d > T::zero()) || !d.is_finite()) {
        return input_err("delta schedule entries must be positive and finite");
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return input_err("delta schedule must be strictly decreasing");
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ContinuationStage<T> {
    pub delta: T,
    pub iterations: usize,
    pub converged: bool,
    /// `Σ|y - (aᵀX + b)|` at the end of the stage.
    pub l1_loss: T,
}

#[derive(Debug, Clone)]
pub struct L1Regression<T> {
    pub a: Vec<T>,
    pub b: T,
    pub stages: Vec<ContinuationStage<T>>,
}

/// `Σ|y_j - (aᵀx_j + b)|`.
pub fn l1_loss<T: Real>(x: &DenseMatrix<T>, y: &[T], a: &[T], b: T) -> Result<T> {
    let f = predict(x, a, b)?;
    Ok(crate::scalar::compensated_sum(y.iter().zip(&f).map(|(&u, &v)| (u - v).abs())))
}

/// Default schedule: `{1, 0.1, 0.01, 0.001}` times the median absolute
/// residual of the least-squares fit.
pub fn default_l1_schedule<T: Real>(x: &DenseMatrix<T>, y: &[T]) -> Result<Vec<T>> {
    let (a, b) = ols_fit(x, y)?;
    let f = predict(x, &a, b)?;
    let resid: Vec<T> = y.iter().zip(&f).map(|(&u, &v)| (u - v).abs()).collect();
    let mut base = median(&resid).unwrap_or_else(T::zero);
    if !(base > T::epsilon() * (T::one() + y.iter().fold(T::zero(), |m, v| m.max(v.abs())))) {
        base = T::one();
    }
    Ok([1.0, 0.1, 0.01, 0.001].iter().map(|&s| base * T::lit(s)).collect())
}

/// Approximate L1 regression by running [`fit_orlr_from`] along a decreasing
/// delta schedule, warm-starting each stage at the previous `(a, b)`.
pub fn l1_regression<T: Real>(x: &DenseMatrix<T>, y: &[T], cont: &ContinuationConfig<T>) -> Result<L1Regression<T>> {
    check_design(x, y)?;
    let schedule = match &cont.schedule {
        Some(s) => s.clone(),
        None => default_l1_schedule(x, y)?,
    };
    validate_schedule(&schedule)?;

    let mut warm: Option<(Vec<T>, T)> = None;
    let mut stages = Vec::with_capacity(schedule.len());
    for &d in &schedule {
        let cfg =
            OrlrConfig { delta: Tolerance::new(d)?, max_iters: cont.max_iters, tol: cont.tol, record_trace: false };
        let res = fit_orlr_from(x, y, &cfg, warm.as_ref().map(|(a, b)| (a.as_slice(), *b)))?;
        stages.push(ContinuationStage {
            delta: d,
            iterations: res.iterations,
            converged: res.converged,
            l1_loss: l1_loss(x, y, &res.a, res.b)?,
        });
        warm = Some((res.a, res.b));
    }
    let (a, b) = warm.expect("schedule is non-empty");
    Ok(L1Regression { a, b, stages })
}
