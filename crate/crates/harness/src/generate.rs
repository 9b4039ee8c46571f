//! Seeded synthetic datasets.
//!
//! Every generator draws from `ChaCha8Rng::seed_from_u64(seed)` and nothing
//! else, so output is a pure function of the spec on every platform.

use outreg::{Mask, Matrix};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{spec_err, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineDatasetSpec {
    pub n_clean: usize,
    pub n_outliers: usize,
    pub slope: f64,
    pub intercept: f64,
    /// Standard deviation of the Gaussian noise on clean points.
    pub noise_sigma: f64,
    /// Signed vertical displacement of each of the last `n_outliers` points.
    pub outlier_offsets: Vec<f64>,
    pub x_range: [f64; 2],
    pub seed: u64,
}

impl Default for LineDatasetSpec {
    fn default() -> Self {
        Self {
            n_clean: 10,
            n_outliers: 3,
            slope: 0.8,
            intercept: 1.0,
            noise_sigma: 0.05,
            outlier_offsets: vec![2.5, -3.0, 4.0],
            x_range: [0.0, 5.0],
            seed: 0,
        }
    }
}

impl LineDatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_clean + self.n_outliers < 2 {
            return spec_err("need at least two points");
        }
        if self.outlier_offsets.len() != self.n_outliers {
            return spec_err(format!(
                "{} outlier offsets for {} outliers",
                self.outlier_offsets.len(),
                self.n_outliers
            ));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return spec_err("noise_sigma must be non-negative");
        }
        if self.outlier_offsets.iter().any(|o| !o.is_finite() || o.abs() <= 3.0 * self.noise_sigma) {
            return spec_err("outlier offsets must exceed 3 noise_sigma in magnitude");
        }
        let [lo, hi] = self.x_range;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return spec_err("x_range must be an increasing finite interval");
        }
        if !self.slope.is_finite() || !self.intercept.is_finite() {
            return spec_err("slope and intercept must be finite");
        }
        Ok(())
    }
}

/// Points on `y = slope·x + intercept` with Gaussian noise; the last
/// `n_outliers` points are displaced by `outlier_offsets`. Returns the
/// `1 × n` design and the targets.
pub fn gen_line_dataset(spec: &LineDatasetSpec) -> Result<(Matrix, Vec<f64>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_clean + spec.n_outliers;
    let [lo, hi] = spec.x_range;
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| crate::error::HarnessError::Spec(e.to_string()))?;
    let mut ys: Vec<f64> = xs.iter().map(|&x| spec.slope * x + spec.intercept + noise.sample(&mut rng)).collect();
    for (y, off) in ys[spec.n_clean..].iter_mut().zip(&spec.outlier_offsets) {
        *y += off;
    }
    Ok((Matrix::row_vector(xs)?, ys))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockOcclusion {
    pub height: usize,
    pub width: usize,
    pub count: usize,
}

impl Default for BlockOcclusion {
    fn default() -> Self {
        Self { height: 4, width: 5, count: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LowRankCorruptionSpec {
    pub p: usize,
    pub n: usize,
    pub k_true: usize,
    /// Planted singular values; `None` gives `√(pn/k)` spread linearly from 2 down to 1.
    pub singular_profile: Option<Vec<f64>>,
    /// Standard deviation of dense Gaussian noise added to the clean matrix.
    pub noise_sigma: f64,
    /// Fraction of entries hit by a gross error.
    pub corruption_frac: f64,
    /// Size of each gross error; `None` means 5 × max-abs of the clean matrix.
    pub corruption_magnitude: Option<f64>,
    pub block_occlusion: Option<BlockOcclusion>,
    pub seed: u64,
}

impl Default for LowRankCorruptionSpec {
    fn default() -> Self {
        Self {
            p: 100,
            n: 200,
            k_true: 10,
            singular_profile: None,
            noise_sigma: 0.0,
            corruption_frac: 0.05,
            corruption_magnitude: None,
            block_occlusion: None,
            seed: 0,
        }
    }
}

impl LowRankCorruptionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n == 0 {
            return spec_err(format!("dimensions {}x{} must be positive", self.p, self.n));
        }
        if self.k_true > self.p.min(self.n) {
            return spec_err(format!("k_true {} exceeds min(p, n) = {}", self.k_true, self.p.min(self.n)));
        }
        if let Some(s) = &self.singular_profile {
            if s.len() != self.k_true {
                return spec_err(format!("singular_profile has {} values for k_true {}", s.len(), self.k_true));
            }
            if s.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return spec_err("singular_profile must be non-negative and finite");
            }
        }
        if !(0.0..=1.0).contains(&self.corruption_frac) {
            return spec_err(format!("corruption_frac {} outside [0, 1]", self.corruption_frac));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return spec_err("noise_sigma must be non-negative");
        }
        if let Some(m) = self.corruption_magnitude {
            if !m.is_finite() {
                return spec_err("corruption_magnitude must be finite");
            }
        }
        if let Some(b) = self.block_occlusion {
            if b.height == 0 || b.width == 0 || b.height > self.p || b.width > self.n {
                return spec_err(format!("block {}x{} does not fit {}x{}", b.height, b.width, self.p, self.n));
            }
        }
        Ok(())
    }

    pub fn profile(&self) -> Vec<f64> {
        match &self.singular_profile {
            Some(s) => s.clone(),
            None => {
                let k = self.k_true;
                let base = ((self.p * self.n) as f64 / k.max(1) as f64).sqrt();
                (0..k).map(|i| base * (2.0 - if k > 1 { i as f64 / (k - 1) as f64 } else { 0.0 })).collect()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorruptedLowRank {
    pub clean: Matrix,
    pub corrupted: Matrix,
    pub mask: Mask,
}

/// Orthonormal columns by twice-applied modified Gram–Schmidt on Gaussian draws.
fn orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while q.len() < cols {
        let mut v: Vec<f64> = (0..rows).map(|_| Distribution::<f64>::sample(&StandardNormal, rng)).collect();
        for _ in 0..2 {
            for u in &q {
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            q.push(v);
        }
    }
    q
}

/// `U*·diag(profile)·V*ᵀ` plus optional dense noise, then `±magnitude` gross
/// errors on `round(frac·p·n)` distinct entries and on any planted blocks.
pub fn gen_lowrank_corrupted(spec: &LowRankCorruptionSpec) -> Result<CorruptedLowRank> {
    spec.validate()?;
    let (p, n, k) = (spec.p, spec.n, spec.k_true);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let u = orthonormal(p, k, &mut rng);
    let v = orthonormal(n, k, &mut rng);
    let profile = spec.profile();
    let mut clean = Matrix::from_fn(p, n, |i, j| (0..k).map(|r| u[r][i] * profile[r] * v[r][j]).sum());
    if spec.noise_sigma > 0.0 {
        let noise: Vec<f64> =
            (0..p * n).map(|_| spec.noise_sigma * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
        clean = Matrix::from_fn(p, n, |i, j| clean[(i, j)] + noise[i * n + j]);
    }

    let magnitude = spec.corruption_magnitude.unwrap_or(5.0 * clean.max_abs());
    let mut corrupted = clean.clone();
    let mut mask = Mask::empty(p, n);
    let count = (spec.corruption_frac * (p * n) as f64).round() as usize;
    for t in sample(&mut rng, p * n, count).iter() {
        let (i, j) = (t / n, t % n);
        let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        corrupted[(i, j)] += s * magnitude;
        mask.set(i, j, true);
    }
    if let Some(b) = spec.block_occlusion {
        for _ in 0..b.count {
            let i0 = rng.random_range(0..=p - b.height);
            let j0 = rng.random_range(0..=n - b.width);
            let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            for i in i0..i0 + b.height {
                for j in j0..j0 + b.width {
                    if !mask.get(i, j) {
                        corrupted[(i, j)] += s * magnitude;
                        mask.set(i, j, true);
                    }
                }
            }
        }
    }
    Ok(CorruptedLowRank { clean, corrupted, mask })
}

/// Divides by the max-abs entry so values land in `[-1, 1]` (`[0, 1]` for
/// non-negative data). Returns the scale; an all-zero matrix keeps scale 1.
pub fn normalize(m: &Matrix) -> (Matrix, f64) {
    let s = m.max_abs();
    if s > 0.0 {
        (m.scale(1.0 / s), s)
    } else {
        (m.clone(), 1.0)
    }
}
