//! Command-line front end. Exit codes: 0 success, 2 input or parse error,
//! 3 non-convergence (outputs are still written from the best iterate).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use outreg::orlr::fit_orlr;
use outreg::orpca::{fit_orpca, l1_pca, L1PcaConfig};
use outreg::proxreg::regularize_matrix;
use outreg::rpca::fit_rpca;
use outreg::{linalg, Matrix, OrlrConfig, OrpcaConfig, RpcaConfig, Tolerance};
use serde::Serialize;

use crate::bench::{run_bench, BenchConfig};
use crate::error::{HarnessError, Result};
use crate::generate::{gen_line_dataset, gen_lowrank_corrupted, normalize, LineDatasetSpec, LowRankCorruptionSpec};
use crate::io::{read_json, read_matrix, read_vector, to_json, write_json, write_mask, write_matrix};
use crate::metrics::{reconstruction_report, SpectrumReport};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "outreg", version, about = "Outlier-regularized regression and PCA, and a trace-norm RPCA baseline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Scaling {
    /// Solve on the input as given instead of dividing by its max-abs entry.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct Outputs {
    /// Main output matrix (CSV); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report path.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clamp X into the delta band around F.
    Regularize {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        delta: f64,
        /// 0/1 outlier mask (CSV).
        #[arg(long)]
        mask: Option<PathBuf>,
        #[command(flatten)]
        scaling: Scaling,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Outlier-regularized linear regression; X holds one sample per column.
    Orlr {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        scaling: Scaling,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Outlier-regularized PCA; writes the regularized data Z.
    Orpca {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 0.003)]
        delta: f64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Remove row means before factoring.
        #[arg(long)]
        center: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        u: Option<PathBuf>,
        #[arg(long)]
        v: Option<PathBuf>,
        #[arg(long)]
        mask: Option<PathBuf>,
        #[command(flatten)]
        scaling: Scaling,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Rank-k L1 factorization by delta continuation; writes UV.
    L1pca {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        rank: usize,
        /// Comma-separated, strictly decreasing deltas.
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<f64>>,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        scaling: Scaling,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Trace-norm robust PCA; writes the low-rank part Z.
    Rpca {
        #[arg(long)]
        x: PathBuf,
        /// Weight on the trace norm; defaults to sqrt(max(p, n)).
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Sparse part X - Z (CSV).
        #[arg(long)]
        sparse: Option<PathBuf>,
        #[command(flatten)]
        scaling: Scaling,
        #[command(flatten)]
        outputs: Outputs,
    },
    /// Synthetic datasets.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Singular values of matrices and their downshift against a reference.
    Spectrum {
        /// Reference matrix.
        #[arg(long)]
        x: PathBuf,
        /// Further matrices as LABEL=PATH.
        #[arg(long = "input", value_parser = parse_labelled)]
        inputs: Vec<(String, PathBuf)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time ORPCA against RPCA at matched tolerance and rank.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residuals of reconstructions against clean data.
    Report {
        #[arg(long)]
        clean: PathBuf,
        #[arg(long)]
        corrupted: PathBuf,
        /// Reconstructions as LABEL=PATH.
        #[arg(long = "input", value_parser = parse_labelled)]
        inputs: Vec<(String, PathBuf)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Writes x.csv, y.csv and spec.json.
    Line {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Writes clean.csv, corrupted.csv, mask.csv and spec.json.
    Lowrank {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_labelled(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((label, path)) if !label.is_empty() && !path.is_empty() => Ok((label.to_owned(), PathBuf::from(path))),
        _ => Err(format!("expected LABEL=PATH, got {s:?}")),
    }
}

#[derive(Serialize)]
struct Report<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    config: C,
    seed: Option<u64>,
    scale: f64,
    result: R,
}

fn emit_matrix(path: Option<&Path>, m: &Matrix) -> Result<()> {
    match path {
        Some(p) => write_matrix(p, m),
        None => {
            print!("{}", crate::io::format_matrix(m));
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    match path {
        Some(p) => write_json(p, value),
        None => {
            print!("{}", to_json(value));
            Ok(())
        }
    }
}

fn maybe_normalize(x: &Matrix, scaling: &Scaling) -> (Matrix, f64) {
    if scaling.no_normalize {
        (x.clone(), 1.0)
    } else {
        normalize(x)
    }
}

/// Runs one command; `Ok(false)` means a solver stopped before converging.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Regularize { x: xp, f: fp, delta, mask, scaling, outputs } => {
            let x = read_matrix(&xp)?;
            let f = read_matrix(&fp)?;
            let scale = if scaling.no_normalize { 1.0 } else { x.max_abs().max(f.max_abs()) };
            let scale = if scale > 0.0 { scale } else { 1.0 };
            let out = regularize_matrix(&x.scale(1.0 / scale), &f.scale(1.0 / scale), Tolerance::new(delta)?)?;
            emit_matrix(outputs.out.as_deref(), &out.regularized.scale(scale))?;
            if let Some(p) = &mask {
                write_mask(p, &out.outlier_mask)?;
            }
            if let Some(p) = &outputs.report {
                #[derive(Serialize)]
                struct Config<'a> {
                    x: &'a Path,
                    f: &'a Path,
                    delta: f64,
                    normalize: bool,
                }
                #[derive(Serialize)]
                struct Out {
                    num_outliers: usize,
                    outlier_fraction: f64,
                }
                let report = Report {
                    command: "regularize",
                    config: Config { x: &xp, f: &fp, delta, normalize: !scaling.no_normalize },
                    seed: None,
                    scale,
                    result: Out { num_outliers: out.num_outliers, outlier_fraction: out.outlier_mask.fraction() },
                };
                write_json(p, &report)?;
            }
            Ok(true)
        }
        Command::Orlr { x: xp, y: yp, delta, max_iters, tol, scaling, outputs } => {
            let x = read_matrix(&xp)?;
            let y = read_vector(&yp)?;
            let (y_scaled, scale) = if scaling.no_normalize {
                (y.clone(), 1.0)
            } else {
                let (m, s) = normalize(&Matrix::row_vector(y.clone())?);
                (m.into_vec(), s)
            };
            let mut cfg = OrlrConfig::new(Tolerance::new(delta)?);
            cfg.max_iters = max_iters;
            cfg.tol = tol;
            let res = fit_orlr(&x, &y_scaled, &cfg)?;
            let y_tilde: Vec<f64> = res.y_tilde.iter().map(|v| v * scale).collect();
            emit_matrix(outputs.out.as_deref(), &Matrix::column_vector(y_tilde)?)?;
            if let Some(p) = &outputs.report {
                #[derive(Serialize)]
                struct Config<'a> {
                    x: &'a Path,
                    y: &'a Path,
                    delta: f64,
                    max_iters: usize,
                    tol: f64,
                    normalize: bool,
                }
                #[derive(Serialize)]
                struct Out {
                    a: Vec<f64>,
                    b: f64,
                    outliers: Vec<usize>,
                    objective: f64,
                    objective_trace: Vec<f64>,
                    iterations: usize,
                    converged: bool,
                }
                let outliers = res.outlier_mask.iter().enumerate().filter(|(_, &o)| o).map(|(i, _)| i).collect();
                let report = Report {
                    command: "orlr",
                    config: Config { x: &xp, y: &yp, delta, max_iters, tol, normalize: !scaling.no_normalize },
                    seed: None,
                    scale,
                    result: Out {
                        a: res.a.iter().map(|v| v * scale).collect(),
                        b: res.b * scale,
                        outliers,
                        objective: res.objective,
                        objective_trace: res.objective_trace.clone(),
                        iterations: res.iterations,
                        converged: res.converged,
                    },
                };
                write_json(p, &report)?;
            }
            Ok(res.converged)
        }
        Command::Orpca { x: xp, rank, delta, max_iters, tol, center, seed, u, v, mask, scaling, outputs } => {
            let x = read_matrix(&xp)?;
            let (xs, scale) = maybe_normalize(&x, &scaling);
            let mut cfg = OrpcaConfig::new(rank, Tolerance::new(delta)?);
            cfg.max_iters = max_iters;
            cfg.tol = tol;
            cfg.center = center;
            cfg.seed = seed;
            let res = fit_orpca(&xs, &cfg)?;
            emit_matrix(outputs.out.as_deref(), &res.z.scale(scale))?;
            if let Some(p) = &u {
                write_matrix(p, &res.u.scale(scale))?;
            }
            if let Some(p) = &v {
                write_matrix(p, &res.v)?;
            }
            if let Some(p) = &mask {
                let m = outreg::Mask::new(
                    xs.rows(),
                    xs.cols(),
                    xs.as_slice().iter().zip(res.z.as_slice()).map(|(a, b)| a != b).collect(),
                )?;
                write_mask(p, &m)?;
            }
            if let Some(p) = &outputs.report {
                #[derive(Serialize)]
                struct Config<'a> {
                    x: &'a Path,
                    rank: usize,
                    delta: f64,
                    max_iters: usize,
                    tol: f64,
                    center: bool,
                    normalize: bool,
                }
                #[derive(Serialize)]
                struct Out {
                    dims: [usize; 2],
                    objective: f64,
                    objective_trace: Vec<f64>,
                    outlier_fraction: f64,
                    iterations: usize,
                    converged: bool,
                    rank_z: usize,
                    singular_values: Vec<f64>,
                }
                let svd = linalg::svd(&res.z)?;
                let report = Report {
                    command: "orpca",
                    config: Config { x: &xp, rank, delta, max_iters, tol, center, normalize: !scaling.no_normalize },
                    seed,
                    scale,
                    result: Out {
                        dims: [x.rows(), x.cols()],
                        objective: res.objective,
                        objective_trace: res.objective_trace.clone(),
                        outlier_fraction: res.outlier_fraction,
                        iterations: res.iterations,
                        converged: res.converged,
                        rank_z: svd.rank(linalg::RANK_RCOND),
                        singular_values: svd.singular_values.iter().map(|s| s * scale).collect(),
                    },
                };
                write_json(p, &report)?;
            }
            Ok(res.converged)
        }
        Command::L1pca { x: xp, rank, schedule, max_iters, tol, scaling, outputs } => {
            let x = read_matrix(&xp)?;
            let (xs, scale) = maybe_normalize(&x, &scaling);
            let cfg = L1PcaConfig { schedule: schedule.clone(), max_iters, tol };
            let res = l1_pca(&xs, rank, &cfg)?;
            emit_matrix(outputs.out.as_deref(), &res.u.matmul(&res.v)?.scale(scale))?;
            let converged = res.stages.iter().all(|s| s.converged);
            if let Some(p) = &outputs.report {
                #[derive(Serialize)]
                struct Config<'a> {
                    x: &'a Path,
                    rank: usize,
                    schedule: Option<Vec<f64>>,
                    max_iters: usize,
                    tol: f64,
                    normalize: bool,
                }
                #[derive(Serialize)]
                struct Stage {
                    delta: f64,
                    iterations: usize,
                    converged: bool,
                    relative_gap: f64,
                    l1_loss: f64,
                }
                let stages: Vec<Stage> = res
                    .stages
                    .iter()
                    .map(|s| Stage {
                        delta: s.delta,
                        iterations: s.iterations,
                        converged: s.converged,
                        relative_gap: s.relative_gap,
                        l1_loss: s.l1_loss * scale,
                    })
                    .collect();
                let report = Report {
                    command: "l1pca",
                    config: Config { x: &xp, rank, schedule, max_iters, tol, normalize: !scaling.no_normalize },
                    seed: None,
                    scale,
                    result: stages,
                };
                write_json(p, &report)?;
            }
            Ok(converged)
        }
        Command::Rpca { x: xp, beta, max_iters, tol, sparse, scaling, outputs } => {
            let x = read_matrix(&xp)?;
            let (xs, scale) = maybe_normalize(&x, &scaling);
            let beta = beta.unwrap_or_else(|| RpcaConfig::default_beta(xs.shape()));
            let mut cfg = RpcaConfig::new(beta);
            cfg.max_iters = max_iters;
            cfg.tol = tol;
            let res = fit_rpca(&xs, &cfg)?;
            emit_matrix(outputs.out.as_deref(), &res.z.scale(scale))?;
            if let Some(p) = &sparse {
                write_matrix(p, &res.s.scale(scale))?;
            }
            if let Some(p) = &outputs.report {
                #[derive(Serialize)]
                struct Config<'a> {
                    x: &'a Path,
                    beta: f64,
                    rho: f64,
                    mu_max_factor: f64,
                    max_iters: usize,
                    tol: f64,
                    normalize: bool,
                }
                #[derive(Serialize)]
                struct Out {
                    dims: [usize; 2],
                    objective: f64,
                    objective_trace: Vec<f64>,
                    primal_residual: f64,
                    iterations: usize,
                    converged: bool,
                    rank_z: usize,
                    singular_values: Vec<f64>,
                }
                let report = Report {
                    command: "rpca",
                    config: Config {
                        x: &xp,
                        beta,
                        rho: cfg.rho,
                        mu_max_factor: cfg.mu_max_factor,
                        max_iters,
                        tol,
                        normalize: !scaling.no_normalize,
                    },
                    seed: None,
                    scale,
                    result: Out {
                        dims: [x.rows(), x.cols()],
                        objective: res.objective,
                        objective_trace: res.objective_trace.clone(),
                        primal_residual: res.primal_residual,
                        iterations: res.iterations,
                        converged: res.converged,
                        rank_z: res.rank_z,
                        singular_values: linalg::singular_values(&res.z)?.iter().map(|s| s * scale).collect(),
                    },
                };
                write_json(p, &report)?;
            }
            Ok(res.converged)
        }
        Command::Gen { kind } => {
            match kind {
                GenKind::Line { spec, out_dir } => {
                    let spec: LineDatasetSpec = match &spec {
                        Some(p) => read_json(p)?,
                        None => LineDatasetSpec::default(),
                    };
                    let (x, y) = gen_line_dataset(&spec)?;
                    create_dir(&out_dir)?;
                    write_matrix(&out_dir.join("x.csv"), &x)?;
                    write_matrix(&out_dir.join("y.csv"), &Matrix::column_vector(y)?)?;
                    write_json(&out_dir.join("spec.json"), &spec)?;
                }
                GenKind::Lowrank { spec, out_dir } => {
                    let spec: LowRankCorruptionSpec = match &spec {
                        Some(p) => read_json(p)?,
                        None => LowRankCorruptionSpec::default(),
                    };
                    let data = gen_lowrank_corrupted(&spec)?;
                    create_dir(&out_dir)?;
                    write_matrix(&out_dir.join("clean.csv"), &data.clean)?;
                    write_matrix(&out_dir.join("corrupted.csv"), &data.corrupted)?;
                    write_mask(&out_dir.join("mask.csv"), &data.mask)?;
                    write_json(&out_dir.join("spec.json"), &spec)?;
                }
            }
            Ok(true)
        }
        Command::Spectrum { x, inputs, out } => {
            let reference = read_matrix(&x)?;
            let others = inputs.iter().map(|(l, p)| Ok((l.as_str(), read_matrix(p)?))).collect::<Result<Vec<_>>>()?;
            let refs: Vec<(&str, &Matrix)> = others.iter().map(|(l, m)| (*l, m)).collect();
            let label = x.display().to_string();
            let report = SpectrumReport::build((&label, &reference), &refs)?;
            emit_json(out.as_deref(), &report)?;
            Ok(true)
        }
        Command::Bench { config, out } => {
            let cfg: BenchConfig = match &config {
                Some(p) => read_json(p)?,
                None => BenchConfig::default(),
            };
            let report = run_bench(&cfg)?;
            emit_json(out.as_deref(), &report)?;
            Ok(report.orpca.converged && report.rpca.converged)
        }
        Command::Report { clean, corrupted, inputs, out } => {
            let c = read_matrix(&clean)?;
            let x = read_matrix(&corrupted)?;
            let others = inputs.iter().map(|(l, p)| Ok((l.as_str(), read_matrix(p)?))).collect::<Result<Vec<_>>>()?;
            let refs: Vec<(&str, &Matrix)> = others.iter().map(|(l, m)| (*l, m)).collect();
            let report = reconstruction_report(&c, &x, &refs)?;
            emit_json(out.as_deref(), &report)?;
            Ok(true)
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.to_owned(), source })
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: solver did not converge; best iterate written");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
