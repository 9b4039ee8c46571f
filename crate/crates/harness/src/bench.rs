//! Wall-clock comparison of ORPCA and RPCA at matched tolerance and rank.

use std::time::Instant;

use outreg::orpca::{fit_orpca, fit_orpca_from, pca_init};
use outreg::rpca::fit_rpca;
use outreg::{linalg, Matrix, OrpcaConfig, RpcaConfig, Tolerance};
use serde::{Deserialize, Serialize};

use crate::error::{spec_err, Result};
use crate::generate::{gen_lowrank_corrupted, normalize, LowRankCorruptionSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    /// Column counts; `p` and everything else come from the main data spec.
    pub ns: Vec<usize>,
    pub repetitions: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self { ns: vec![200, 400, 800], repetitions: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub data: LowRankCorruptionSpec,
    pub rank_k: usize,
    pub repetitions: usize,
    pub tol: f64,
    pub orpca_max_iters: usize,
    pub rpca_max_iters: usize,
    /// `None` uses `√max(p, n)`.
    pub beta: Option<f64>,
    /// Fixed ORPCA delta; `None` calibrates it to match RPCA's rank.
    pub delta: Option<f64>,
    pub delta_range: [f64; 2],
    pub bisection_steps: usize,
    /// Relative singular-value cutoff for the rank used in matching.
    pub rank_cutoff: f64,
    pub normalize: bool,
    pub scaling: Option<ScalingConfig>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            data: LowRankCorruptionSpec {
                p: 400,
                n: 400,
                k_true: 20,
                noise_sigma: 0.0,
                corruption_magnitude: None,
                ..Default::default()
            },
            rank_k: 20,
            repetitions: 3,
            tol: 1e-10,
            orpca_max_iters: 2000,
            rpca_max_iters: 1000,
            beta: None,
            delta: None,
            delta_range: [1e-4, 0.1],
            bisection_steps: 8,
            rank_cutoff: 1e-2,
            normalize: true,
            scaling: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        self.data.validate()?;
        if self.repetitions < 3 {
            return spec_err("repetitions must be at least 3");
        }
        if !(self.tol > 0.0) {
            return spec_err("tol must be positive");
        }
        let [lo, hi] = self.delta_range;
        if !(lo > 0.0 && lo < hi) {
            return spec_err("delta_range must be an increasing positive interval");
        }
        if !(self.rank_cutoff > 0.0 && self.rank_cutoff < 1.0) {
            return spec_err("rank_cutoff must lie in (0, 1)");
        }
        if let Some(s) = &self.scaling {
            if s.ns.len() < 2 || s.repetitions == 0 {
                return spec_err("scaling needs at least two sizes and one repetition");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTiming {
    /// Median over `times`.
    pub wall_time_seconds: f64,
    pub times: Vec<f64>,
    pub repetitions: usize,
    pub iterations: usize,
    pub final_objective: f64,
    /// Numerical rank of `Z` at cutoff `1e-10`.
    pub rank_z: usize,
    /// Rank of `Z` at the bench's matching cutoff.
    pub matched_rank: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub p: usize,
    pub ns: Vec<usize>,
    pub iterations: Vec<usize>,
    /// Median seconds per ORPCA iteration, initialization excluded.
    pub per_iteration_seconds: Vec<f64>,
    /// Least-squares slope of log time against log n.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub dims: [usize; 2],
    pub seed: u64,
    pub delta: f64,
    pub beta: f64,
    pub orpca: SolverTiming,
    pub rpca: SolverTiming,
    /// RPCA median time over ORPCA median time.
    pub speedup: f64,
    pub scaling: Option<ScalingReport>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn effective_rank(z: &Matrix, cutoff: f64) -> Result<usize> {
    Ok(linalg::numerical_rank(z, cutoff)?)
}

fn orpca_config(cfg: &BenchConfig, delta: f64) -> Result<OrpcaConfig> {
    let mut c = OrpcaConfig::new(cfg.rank_k, Tolerance::new(delta)?);
    c.tol = cfg.tol;
    c.max_iters = cfg.orpca_max_iters;
    c.record_trace = false;
    Ok(c)
}

/// Largest `delta` in `delta_range` whose ORPCA rank does not exceed
/// `target`, found by bisection on `log delta`. The rank of `Z` grows with
/// `delta`: `Z → UV` as `delta → 0` and `Z → X` as `delta → ∞`. Falls back
/// to the lower end when even that overshoots.
pub fn match_delta(x: &Matrix, cfg: &BenchConfig, target: usize) -> Result<f64> {
    let rank_at = |d: f64| -> Result<usize> {
        let res = fit_orpca(x, &orpca_config(cfg, d)?)?;
        effective_rank(&res.z, cfg.rank_cutoff)
    };
    let [mut lo, mut hi] = cfg.delta_range;
    if rank_at(hi)? <= target {
        return Ok(hi);
    }
    if rank_at(lo)? > target {
        return Ok(lo);
    }
    for _ in 0..cfg.bisection_steps {
        let mid = (lo * hi).sqrt();
        if rank_at(mid)? <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn time_orpca(x: &Matrix, cfg: &BenchConfig, delta: f64) -> Result<SolverTiming> {
    let c = orpca_config(cfg, delta)?;
    let mut times = Vec::with_capacity(cfg.repetitions);
    let mut last = None;
    for _ in 0..cfg.repetitions {
        let t = Instant::now();
        let res = fit_orpca(x, &c)?;
        times.push(t.elapsed().as_secs_f64());
        last = Some(res);
    }
    let res = last.expect("at least one repetition");
    Ok(SolverTiming {
        wall_time_seconds: median(&times),
        times,
        repetitions: cfg.repetitions,
        iterations: res.iterations,
        final_objective: res.objective,
        rank_z: linalg::numerical_rank(&res.z, linalg::RANK_RCOND)?,
        matched_rank: effective_rank(&res.z, cfg.rank_cutoff)?,
        converged: res.converged,
    })
}

fn time_rpca(x: &Matrix, cfg: &BenchConfig, beta: f64) -> Result<SolverTiming> {
    let mut c = RpcaConfig::new(beta);
    c.tol = cfg.tol;
    c.max_iters = cfg.rpca_max_iters;
    c.record_trace = false;
    let mut times = Vec::with_capacity(cfg.repetitions);
    let mut last = None;
    for _ in 0..cfg.repetitions {
        let t = Instant::now();
        let res = fit_rpca(x, &c)?;
        times.push(t.elapsed().as_secs_f64());
        last = Some(res);
    }
    let res = last.expect("at least one repetition");
    Ok(SolverTiming {
        wall_time_seconds: median(&times),
        times,
        repetitions: cfg.repetitions,
        iterations: res.iterations,
        final_objective: res.objective,
        rank_z: res.rank_z,
        matched_rank: effective_rank(&res.z, cfg.rank_cutoff)?,
        converged: res.converged,
    })
}

fn prepare(spec: &LowRankCorruptionSpec, normalize_input: bool) -> Result<Matrix> {
    let data = gen_lowrank_corrupted(spec)?.corrupted;
    Ok(if normalize_input { normalize(&data).0 } else { data })
}

fn run_scaling(cfg: &BenchConfig, scaling: &ScalingConfig, delta: f64) -> Result<ScalingReport> {
    let c = orpca_config(cfg, delta)?;
    let mut per_iter = Vec::with_capacity(scaling.ns.len());
    let mut iterations = Vec::with_capacity(scaling.ns.len());
    for &n in &scaling.ns {
        let spec = LowRankCorruptionSpec { n, ..cfg.data.clone() };
        let x = prepare(&spec, cfg.normalize)?;
        let (u0, v0) = pca_init(&x, cfg.rank_k)?;
        let mut samples = Vec::with_capacity(scaling.repetitions);
        let mut iters = 0;
        for _ in 0..scaling.repetitions {
            let t = Instant::now();
            let res = fit_orpca_from(&x, &c, Some((&u0, &v0)))?;
            let elapsed = t.elapsed().as_secs_f64();
            iters = res.iterations;
            samples.push(elapsed / res.iterations.max(1) as f64);
        }
        per_iter.push(median(&samples));
        iterations.push(iters);
    }
    let ns: Vec<f64> = scaling.ns.iter().map(|&n| n as f64).collect();
    Ok(ScalingReport {
        p: cfg.data.p,
        ns: scaling.ns.clone(),
        iterations,
        slope: log_log_slope(&ns, &per_iter),
        per_iteration_seconds: per_iter,
    })
}

/// Runs RPCA, calibrates the ORPCA delta to RPCA's rank (untimed), then times
/// both solvers sequentially. Non-convergence is recorded, not raised.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let x = prepare(&cfg.data, cfg.normalize)?;
    let beta = cfg.beta.unwrap_or_else(|| RpcaConfig::default_beta(x.shape()));
    let rpca = time_rpca(&x, cfg, beta)?;
    let delta = match cfg.delta {
        Some(d) => d,
        None => match_delta(&x, cfg, rpca.matched_rank)?,
    };
    let orpca = time_orpca(&x, cfg, delta)?;
    let scaling = match &cfg.scaling {
        Some(s) => Some(run_scaling(cfg, s, delta)?),
        None => None,
    };
    Ok(BenchReport {
        config: cfg.clone(),
        dims: [x.rows(), x.cols()],
        seed: cfg.data.seed,
        delta,
        beta,
        speedup: rpca.wall_time_seconds / orpca.wall_time_seconds,
        orpca,
        rpca,
        scaling,
    })
}
