//! Outlier-regularized PCA.
//!
//! The data `X` (`p×n`, one sample per column) is approximated by a rank-`k`
//! prediction `F = UV`. Entries of `X` farther than `delta` from `F` are
//! clamped onto the band, giving the regularized data `Z`, and the factors
//! are refit to `Z` by alternating least squares. Both steps are exact block
//! minimizations of
//!
//! ```text
//! ‖X - Z‖₁ + ‖Z - UV‖_F² / (2 delta)
//! ```
//!
//! so the objective is non-increasing. `Z` keeps small components outside the
//! rank-`k` subspace, unlike a hard rank-`k` reconstruction.

use crate::error::{input_err, Error, Result};
use crate::linalg::{pinv, PINV_RCOND};
use crate::matrix::DenseMatrix;
use crate::orlr::validate_schedule;
use crate::proxreg::{clamp, Tolerance};
use crate::scalar::{compensated_sum, median, Real};

#[derive(Debug, Clone)]
pub struct OrpcaConfig<T> {
    pub rank_k: usize,
    pub delta: Tolerance<T>,
    pub max_iters: usize,
    pub tol: T,
    /// U-then-V least-squares sweeps per outer iteration.
    pub inner_als_sweeps: usize,
    pub record_trace: bool,
    /// Subtract per-row means before factoring and add them back to `Z`.
    pub center: bool,
    /// Carried through to reports; the PCA initialization is deterministic.
    pub seed: Option<u64>,
}

impl<T: Real> OrpcaConfig<T> {
    pub fn new(rank_k: usize, delta: Tolerance<T>) -> Self {
        Self {
            rank_k,
            delta,
            max_iters: 500,
            tol: T::lit(1e-10),
            inner_als_sweeps: 1,
            record_trace: true,
            center: false,
            seed: None,
        }
    }

    pub fn validate(&self, shape: (usize, usize)) -> Result<()> {
        let (p, n) = shape;
        if self.rank_k == 0 || self.rank_k > p.min(n) {
            return input_err(format!("rank {} outside 1..={} for a {p}x{n} matrix", self.rank_k, p.min(n)));
        }
        if self.max_iters == 0 || self.inner_als_sweeps == 0 {
            return input_err("max_iters and inner_als_sweeps must be at least 1");
        }
        if !(self.tol > T::zero()) || !self.tol.is_finite() {
            return input_err(format!("tol must be positive, got {}", self.tol));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OrpcaResult<T> {
    /// Regularized data, consistent with the final `UV`.
    pub z: DenseMatrix<T>,
    pub u: DenseMatrix<T>,
    pub v: DenseMatrix<T>,
    pub objective_trace: Vec<T>,
    pub objective: T,
    pub outlier_fraction: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Row means removed before factoring when centering was requested.
    pub row_means: Option<Vec<T>>,
}

impl<T: Real> OrpcaResult<T> {
    /// Low-rank prediction `UV`, with row means restored if centering was on.
    pub fn prediction(&self) -> Result<DenseMatrix<T>> {
        let f = self.u.matmul(&self.v)?;
        Ok(match &self.row_means {
            Some(m) => add_row_means(&f, m),
            None => f,
        })
    }
}

/// Truncated SVD initialization: `U₀ = A_k Σ_k`, `V₀ = B_kᵀ`. No centering.
pub fn pca_init<T: Real>(x: &DenseMatrix<T>, k: usize) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    let (p, n) = x.shape();
    if k == 0 || k > p.min(n) {
        return input_err(format!("rank {k} outside 1..={} for a {p}x{n} matrix", p.min(n)));
    }
    let svd = crate::linalg::svd(x)?;
    let u = DenseMatrix::from_fn(p, k, |i, j| svd.u[(i, j)] * svd.singular_values[j]);
    let v = DenseMatrix::from_fn(k, n, |i, j| svd.v_t[(i, j)]);
    Ok((u, v))
}

/// Alternating least-squares refits of the factors to `z`:
/// `U ← ZVᵀ(VVᵀ)⁺` then `V ← (UᵀU)⁺UᵀZ`, repeated `sweeps` times.
pub fn update_factors<T: Real>(
    z: &DenseMatrix<T>,
    u: &DenseMatrix<T>,
    v: &DenseMatrix<T>,
    sweeps: usize,
) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    let (p, n) = z.shape();
    let k = u.cols();
    if u.rows() != p || v.shape() != (k, n) {
        return Err(Error::Dimension(format!(
            "factors {}x{} and {}x{} do not match data {p}x{n}",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    let rcond = T::lit(PINV_RCOND);
    let mut u = u.clone();
    let mut v = v.clone();
    for _ in 0..sweeps {
        let vvt = v.matmul_t(&v)?;
        u = z.matmul_t(&v)?.matmul(&pinv(&vvt, rcond)?)?;
        let utu = u.t_matmul(&u)?;
        v = pinv(&utu, rcond)?.matmul(&u.t_matmul(z)?)?;
    }
    Ok((u, v))
}

/// `‖X - Z‖₁ + ‖Z - UV‖_F² / (2 delta)`.
pub fn objective_orpca<T: Real>(
    x: &DenseMatrix<T>,
    z: &DenseMatrix<T>,
    u: &DenseMatrix<T>,
    v: &DenseMatrix<T>,
    delta: Tolerance<T>,
) -> Result<T> {
    let f = u.matmul(v)?;
    objective_with_prediction(x, z, &f, delta)
}

pub(crate) fn objective_with_prediction<T: Real>(
    x: &DenseMatrix<T>,
    z: &DenseMatrix<T>,
    f: &DenseMatrix<T>,
    delta: Tolerance<T>,
) -> Result<T> {
    x.ensure_same_shape(z, "objective data")?;
    z.ensure_same_shape(f, "objective prediction")?;
    let l1 = compensated_sum(x.as_slice().iter().zip(z.as_slice()).map(|(&a, &b)| (a - b).abs()));
    let sq = compensated_sum(z.as_slice().iter().zip(f.as_slice()).map(|(&a, &b)| (a - b) * (a - b)));
    Ok(l1 + sq / (T::lit(2.0) * delta.get()))
}

fn row_means<T: Real>(x: &DenseMatrix<T>) -> Vec<T> {
    let n = T::from_usize(x.cols().max(1)).unwrap_or_else(T::one);
    (0..x.rows()).map(|i| compensated_sum(x.row(i).iter().copied()) / n).collect()
}

fn add_row_means<T: Real>(m: &DenseMatrix<T>, means: &[T]) -> DenseMatrix<T> {
    DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] + means[i])
}

fn clamp_matrix<T: Real>(x: &DenseMatrix<T>, f: &DenseMatrix<T>, delta: T) -> (DenseMatrix<T>, usize) {
    let mut outliers = 0;
    let data = x
        .as_slice()
        .iter()
        .zip(f.as_slice())
        .map(|(&xi, &fi)| {
            if (xi - fi).abs() > delta {
                outliers += 1;
            }
            clamp(xi, fi, delta)
        })
        .collect();
    (DenseMatrix::from_vec_unchecked(x.rows(), x.cols(), data), outliers)
}

/// ORPCA from the truncated-SVD initialization.
pub fn fit_orpca<T: Real>(x: &DenseMatrix<T>, cfg: &OrpcaConfig<T>) -> Result<OrpcaResult<T>> {
    fit_orpca_from(x, cfg, None)
}

/// ORPCA from explicit initial factors (used for warm starts and restarts).
/// With centering enabled the factors refer to the centered data.
pub fn fit_orpca_from<T: Real>(
    x: &DenseMatrix<T>,
    cfg: &OrpcaConfig<T>,
    init: Option<(&DenseMatrix<T>, &DenseMatrix<T>)>,
) -> Result<OrpcaResult<T>> {
    cfg.validate(x.shape())?;
    if !x.is_finite() {
        return Err(Error::NonFinite("orpca data"));
    }
    let means = cfg.center.then(|| row_means(x));
    let centered;
    let x = match &means {
        Some(m) => {
            centered = DenseMatrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] - m[i]);
            &centered
        }
        None => x,
    };
    let (p, n) = x.shape();
    let delta = cfg.delta.get();

    let (mut u, mut v) = match init {
        Some((u0, v0)) => {
            if u0.shape() != (p, cfg.rank_k) || v0.shape() != (cfg.rank_k, n) {
                return Err(Error::Dimension("initial factors do not match data and rank".into()));
            }
            (u0.clone(), v0.clone())
        }
        None => pca_init(x, cfg.rank_k)?,
    };

    let mut f = u.matmul(&v)?;
    let (mut z, mut outliers) = clamp_matrix(x, &f, delta);
    let mut prev = objective_with_prediction(x, &z, &f, cfg.delta)?;

    let x_scale = x.max_abs();
    let step_scale = x_scale.max(T::min_positive_value());
    let floor = T::lit(100.0)
        * T::from_usize((p * n).max(1)).unwrap_or_else(T::one)
        * (T::epsilon() * (T::one() + x_scale)).powi(2)
        / delta;

    let mut trace = Vec::new();
    let mut objective = prev;
    let mut iterations = 0;
    let mut converged = prev <= floor;

    if !converged {
        for it in 1..=cfg.max_iters {
            iterations = it;
            (u, v) = update_factors(&z, &u, &v, cfg.inner_als_sweeps)?;
            let f_new = u.matmul(&v)?;
            (z, outliers) = clamp_matrix(x, &f_new, delta);
            objective = objective_with_prediction(x, &z, &f_new, cfg.delta)?;
            if cfg.record_trace {
                trace.push(objective);
            }
            let step = f_new.sub(&f)?.max_abs();
            f = f_new;

            let obj_small = (prev - objective).abs() <= cfg.tol * prev.abs();
            let step_small = step <= cfg.tol * step_scale;
            if objective <= floor || (obj_small && step_small) {
                converged = true;
                break;
            }
            prev = objective;
        }
    }

    if let Some(m) = &means {
        z = add_row_means(&z, m);
    }
    Ok(OrpcaResult {
        z,
        u,
        v,
        objective_trace: trace,
        objective,
        outlier_fraction: if p * n == 0 { 0.0 } else { outliers as f64 / (p * n) as f64 },
        iterations,
        converged,
        row_means: means,
    })
}

/// Settings for the `delta → 0` continuation of ORPCA.
#[derive(Debug, Clone)]
pub struct L1PcaConfig<T> {
    /// Strictly decreasing deltas; `None` picks the default geometric schedule.
    pub schedule: Option<Vec<T>>,
    pub max_iters: usize,
    pub tol: T,
}

impl<T: Real> Default for L1PcaConfig<T> {
    fn default() -> Self {
        Self { schedule: None, max_iters: 500, tol: T::lit(1e-10) }
    }
}

#[derive(Debug, Clone)]
pub struct L1PcaStage<T> {
    pub delta: T,
    pub iterations: usize,
    pub converged: bool,
    /// `‖Z - UV‖_F / ‖Z‖_F`
    pub relative_gap: T,
    /// `‖X - UV‖₁`
    pub l1_loss: T,
}

#[derive(Debug, Clone)]
pub struct L1Pca<T> {
    pub u: DenseMatrix<T>,
    pub v: DenseMatrix<T>,
    pub z: DenseMatrix<T>,
    pub stages: Vec<L1PcaStage<T>>,
}

/// Geometric schedule, ratio 0.3 over 6 stages, starting at the median
/// absolute residual of the PCA initialization.
pub fn default_l1_pca_schedule<T: Real>(x: &DenseMatrix<T>, k: usize) -> Result<Vec<T>> {
    let (u, v) = pca_init(x, k)?;
    let resid = x.sub(&u.matmul(&v)?)?;
    let abs: Vec<T> = resid.as_slice().iter().map(|r| r.abs()).collect();
    let mut start = median(&abs).unwrap_or_else(T::zero);
    if !(start > T::epsilon() * (T::one() + x.max_abs())) {
        start = T::one();
    }
    Ok(geometric_schedule(start, T::lit(0.3), 6))
}

pub fn geometric_schedule<T: Real>(start: T, ratio: T, stages: usize) -> Vec<T> {
    let mut d = start;
    (0..stages)
        .map(|_| {
            let cur = d;
            d *= ratio;
            cur
        })
        .collect()
}

/// Approximate rank-`k` L1 factorization `min ‖X - UV‖₁` by continuation of
/// ORPCA in `delta`, starting from PCA unless `init` is given.
pub fn l1_pca<T: Real>(x: &DenseMatrix<T>, k: usize, cfg: &L1PcaConfig<T>) -> Result<L1Pca<T>> {
    l1_pca_from(x, k, cfg, None)
}

pub fn l1_pca_from<T: Real>(
    x: &DenseMatrix<T>,
    k: usize,
    cfg: &L1PcaConfig<T>,
    init: Option<(&DenseMatrix<T>, &DenseMatrix<T>)>,
) -> Result<L1Pca<T>> {
    let schedule = match &cfg.schedule {
        Some(s) => s.clone(),
        None => default_l1_pca_schedule(x, k)?,
    };
    validate_schedule(&schedule)?;

    let mut factors: Option<(DenseMatrix<T>, DenseMatrix<T>)> = init.map(|(u, v)| (u.clone(), v.clone()));
    let mut z = x.clone();
    let mut stages = Vec::with_capacity(schedule.len());
    for &d in &schedule {
        let ocfg = OrpcaConfig {
            max_iters: cfg.max_iters,
            tol: cfg.tol,
            record_trace: false,
            ..OrpcaConfig::new(k, Tolerance::new(d)?)
        };
        let res = fit_orpca_from(x, &ocfg, factors.as_ref().map(|(u, v)| (u, v)))?;
        let f = res.u.matmul(&res.v)?;
        let zn = res.z.frobenius_norm();
        let gap = res.z.sub(&f)?.frobenius_norm();
        stages.push(L1PcaStage {
            delta: d,
            iterations: res.iterations,
            converged: res.converged,
            relative_gap: if zn > T::zero() { gap / zn } else { gap },
            l1_loss: x.sub(&f)?.l1_norm(),
        });
        z = res.z;
        factors = Some((res.u, res.v));
    }
    let (u, v) = factors.expect("schedule is non-empty");
    Ok(L1Pca { u, v, z, stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<f64> {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn low_rank(p: usize, n: usize, k: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random(p, k, &mut rng);
        let b = random(k, n, &mut rng);
        a.matmul(&b).unwrap()
    }

    fn rel_err(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>) -> f64 {
        a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm()
    }

    #[test]
    fn pca_init_recovers_low_rank() {
        let x = low_rank(12, 9, 3, 1);
        let (u, v) = pca_init(&x, 3).unwrap();
        assert!(rel_err(&u.matmul(&v).unwrap(), &x) < 1e-10);
    }

    #[test]
    fn pca_init_identity_full_rank() {
        let x = DenseMatrix::<f64>::identity(3);
        let (u, v) = pca_init(&x, 3).unwrap();
        assert!(u.matmul(&v).unwrap().sub(&x).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn pca_init_rank_bounds() {
        let x = DenseMatrix::<f64>::identity(3);
        assert!(matches!(pca_init(&x, 0), Err(Error::Input(_))));
        assert!(matches!(pca_init(&x, 4), Err(Error::Input(_))));
    }

    #[test]
    fn pca_init_is_eckart_young() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random(20, 30, &mut rng);
        let (u, v) = pca_init(&x, 5).unwrap();
        let resid = x.sub(&u.matmul(&v).unwrap()).unwrap().frobenius_norm_sq();
        let s = crate::linalg::singular_values(&x).unwrap();
        let tail: f64 = s[5..].iter().map(|v| v * v).sum();
        assert!((resid - tail).abs() < 1e-8);
    }

    #[test]
    fn update_factors_fixed_point() {
        let x = low_rank(8, 6, 2, 3);
        let (u, v) = pca_init(&x, 2).unwrap();
        let (u2, v2) = update_factors(&x, &u, &v, 3).unwrap();
        assert!(x.sub(&u2.matmul(&v2).unwrap()).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn update_factors_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z = random(10, 14, &mut rng);
        let mut u = random(10, 3, &mut rng);
        let mut v = random(3, 14, &mut rng);
        let mut last = z.sub(&u.matmul(&v).unwrap()).unwrap().frobenius_norm_sq();
        for _ in 0..10 {
            (u, v) = update_factors(&z, &u, &v, 1).unwrap();
            let r = z.sub(&u.matmul(&v).unwrap()).unwrap().frobenius_norm_sq();
            assert!(r <= last + 1e-12);
            last = r;
        }
    }

    #[test]
    fn update_factors_full_rank_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = random(4, 6, &mut rng);
        let mut u = random(4, 4, &mut rng);
        let mut v = random(4, 6, &mut rng);
        (u, v) = update_factors(&z, &u, &v, 50).unwrap();
        assert!(z.sub(&u.matmul(&v).unwrap()).unwrap().frobenius_norm() < 1e-8);
    }

    #[test]
    fn update_factors_rank_deficient_factor() {
        let z = low_rank(5, 5, 1, 4);
        let u = DenseMatrix::from_fn(5, 2, |i, _| i as f64 + 1.0); // duplicated column
        let v = DenseMatrix::from_fn(2, 5, |_, j| j as f64);
        let (u2, v2) = update_factors(&z, &u, &v, 2).unwrap();
        assert!(u2.is_finite() && v2.is_finite());
    }

    #[test]
    fn objective_examples() {
        let one = |v: f64| DenseMatrix::new(1, 1, vec![v]).unwrap();
        let d = Tolerance::new(0.5).unwrap();
        assert_eq!(objective_orpca(&one(2.0), &one(1.0), &one(0.0), &one(1.0), d).unwrap(), 2.0);
        assert_eq!(objective_orpca(&one(2.0), &one(2.0), &one(2.0), &one(1.0), d).unwrap(), 0.0);
    }

    #[test]
    fn clean_low_rank_converges_immediately() {
        let x = low_rank(15, 20, 3, 7);
        let cfg = OrpcaConfig::new(3, Tolerance::new(0.01).unwrap());
        let res = fit_orpca(&x, &cfg).unwrap();
        assert!(res.converged);
        assert!(res.iterations <= 1);
        assert_eq!(res.z, x);
        assert!(rel_err(&res.prediction().unwrap(), &x) < 1e-8);
    }

    #[test]
    fn huge_delta_is_truncated_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random(10, 12, &mut rng);
        let cfg = OrpcaConfig::new(2, Tolerance::new(1e6).unwrap());
        let res = fit_orpca(&x, &cfg).unwrap();
        assert_eq!(res.iterations, 1);
        assert_eq!(res.z, x);
        let (u, v) = pca_init(&x, 2).unwrap();
        assert!(rel_err(&res.prediction().unwrap(), &u.matmul(&v).unwrap()) < 1e-10);
    }

    #[test]
    fn centering_restores_means() {
        let base = low_rank(6, 10, 1, 2);
        let x = DenseMatrix::from_fn(6, 10, |i, j| base[(i, j)] + i as f64);
        let mut cfg = OrpcaConfig::new(1, Tolerance::new(0.05).unwrap());
        cfg.center = true;
        let res = fit_orpca(&x, &cfg).unwrap();
        assert_eq!(res.row_means.as_ref().unwrap().len(), 6);
        assert!(res.z.sub(&x).unwrap().max_abs() < 0.5);
    }

    #[test]
    fn trace_is_monotone_with_corruption() {
        let mut x = low_rank(20, 25, 2, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..25 {
            let i = rng.random_range(0..20);
            let j = rng.random_range(0..25);
            x[(i, j)] += 5.0;
        }
        let mut cfg = OrpcaConfig::new(2, Tolerance::new(0.05).unwrap());
        cfg.max_iters = 200;
        let res = fit_orpca(&x, &cfg).unwrap();
        assert_eq!(res.objective_trace.len(), res.iterations);
        assert!(res.objective_trace.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        assert!(res.outlier_fraction > 0.0);
    }

    #[test]
    fn l1_pca_clean_input() {
        let x = low_rank(8, 8, 2, 21);
        let res = l1_pca(&x, 2, &L1PcaConfig::default()).unwrap();
        assert_eq!(res.stages.len(), 6);
        assert!(res.stages.last().unwrap().l1_loss < 1e-9);
    }

    #[test]
    fn l1_pca_rejects_empty_schedule() {
        let x = low_rank(4, 4, 1, 1);
        let cfg = L1PcaConfig { schedule: Some(vec![]), ..Default::default() };
        assert!(matches!(l1_pca(&x, 1, &cfg), Err(Error::Input(_))));
    }

    #[test]
    fn geometric_schedule_values() {
        let s = geometric_schedule(1.0, 0.5, 3);
        assert_eq!(s, vec![1.0, 0.5, 0.25]);
    }
}
