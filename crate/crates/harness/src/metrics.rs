//! Spectra, residuals and ranks of reconstructions.

use outreg::linalg::{self, RANK_RCOND};
use outreg::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::{spec_err, Result};

/// All singular values, non-increasing.
pub fn spectrum(m: &Matrix) -> Result<Vec<f64>> {
    Ok(linalg::singular_values(m)?)
}

/// Entry-wise `reference[i] - other[i]` over the common length.
pub fn downshift(reference: &[f64], other: &[f64]) -> Vec<f64> {
    reference.iter().zip(other).map(|(a, b)| a - b).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub reference: String,
    pub labels: Vec<String>,
    pub spectra: Vec<Vec<f64>>,
    /// `σ_i(reference) - σ_i(label)` for each label.
    pub downshift: Vec<Vec<f64>>,
}

impl SpectrumReport {
    /// Spectra of `reference` and of each labelled matrix, with downshifts
    /// against the reference. The reference is listed first.
    pub fn build(reference: (&str, &Matrix), others: &[(&str, &Matrix)]) -> Result<Self> {
        let base = spectrum(reference.1)?;
        let mut labels = vec![reference.0.to_owned()];
        let mut spectra = vec![base.clone()];
        let mut shifts = vec![vec![0.0; base.len()]];
        for (label, m) in others {
            let s = spectrum(m)?;
            shifts.push(downshift(&base, &s));
            labels.push((*label).to_owned());
            spectra.push(s);
        }
        let report = Self { reference: reference.0.to_owned(), labels, spectra, downshift: shifts };
        report.validate()?;
        Ok(report)
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.spectra.len() || self.labels.len() != self.downshift.len() {
            return spec_err("spectrum report has mismatched label and vector counts");
        }
        for (label, s) in self.labels.iter().zip(&self.spectra) {
            if s.iter().any(|v| !(*v >= 0.0)) {
                return spec_err(format!("spectrum {label} has a negative or non-finite value"));
            }
            if s.windows(2).any(|w| w[1] > w[0]) {
                return spec_err(format!("spectrum {label} is not non-increasing"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMetrics {
    pub label: String,
    /// `‖Z - X_clean‖_F / ‖X_clean‖_F`
    pub residual: f64,
    /// `‖Z_j - X_clean_j‖₂` for every column `j`.
    pub column_residuals: Vec<f64>,
    /// `σ_i(X_clean) - σ_i(Z)`.
    pub downshift: Vec<f64>,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub dims: [usize; 2],
    /// Residual of the corrupted input itself.
    pub corrupted_residual: f64,
    pub solvers: Vec<SolverMetrics>,
}

pub fn relative_residual(z: &Matrix, clean: &Matrix) -> Result<f64> {
    let norm = clean.frobenius_norm();
    let diff = z.sub(clean)?.frobenius_norm();
    Ok(if norm > 0.0 { diff / norm } else { diff })
}

pub fn reconstruction_report(
    clean: &Matrix,
    corrupted: &Matrix,
    results: &[(&str, &Matrix)],
) -> Result<ReconstructionReport> {
    clean.ensure_same_shape(corrupted, "corrupted data")?;
    let base = spectrum(clean)?;
    let mut solvers = Vec::with_capacity(results.len());
    for (label, z) in results {
        clean.ensure_same_shape(z, "reconstruction")?;
        let diff = z.sub(clean)?;
        let column_residuals =
            (0..diff.cols()).map(|j| diff.column(j).iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
        let svd = linalg::svd(z)?;
        solvers.push(SolverMetrics {
            label: (*label).to_owned(),
            residual: relative_residual(z, clean)?,
            column_residuals,
            downshift: downshift(&base, &svd.singular_values),
            rank: svd.rank(RANK_RCOND),
        });
    }
    Ok(ReconstructionReport {
        dims: [clean.rows(), clean.cols()],
        corrupted_residual: relative_residual(corrupted, clean)?,
        solvers,
    })
}
