//! Runs one configured experiment and writes its artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};
use spm_core::diagnostics::exact::KernelPairSolution;
use spm_core::diagnostics::radial::radial_reference;
use spm_core::diagnostics::{
    aligned_range, project_1d, project_2d, rel_l2_error_2d, GriddedFunction1D, GriddedFunction2D,
};
use spm_core::ensemble::ParticleEnsemble;
use spm_core::error::SpmError;
use spm_core::evolution::{run, RunOptions, StepRecord};
use spm_core::experiments::{
    beta_mixture_marginal, nonlocal_allen_cahn_problem, run_benchmark_1d, run_kernel_pair, run_linear_hd,
    run_vug_static, LinearHdConfig, ProjectionScore,
};
use spm_core::grid::GridSpec;
use spm_core::problem::Strategy;
use thiserror::Error;

use crate::config::{Experiment, RunConfig};
use crate::schema::{FileKind, SchemaError, Table, Value};

/// Half-width of the projection window for the heavy-tailed experiments.
pub const HEAVY_TAIL_WINDOW: f64 = 6.0;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Solver(#[from] SpmError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl RunError {
    /// Step at which the solver aborted, if any.
    pub fn step(&self) -> Option<usize> {
        match self {
            RunError::Solver(e) => e.step(),
            _ => None,
        }
    }
}

/// Tables produced by one run, before they touch the disk.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub steps: Option<Table>,
    pub projection_1d: Option<Table>,
    pub projection_2d: Option<Table>,
    pub summary: Table,
    pub timing: Table,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub output: RunOutput,
    pub dir: PathBuf,
    /// (file name, sha256 hex) in write order, manifest excluded.
    pub files: Vec<(String, String)>,
}

fn nan() -> Value {
    Value::Real(f64::NAN)
}

struct Summary {
    error_u: f64,
    error_p: f64,
    error_m: f64,
    sign_coherence: f64,
    o1: f64,
    o1_exact: f64,
    o1_rel_error: f64,
    o2: f64,
    marginal_error: f64,
    mass: f64,
    occupancy: f64,
    stored_cells_peak: u64,
}

impl Default for Summary {
    fn default() -> Self {
        Summary {
            error_u: f64::NAN,
            error_p: f64::NAN,
            error_m: f64::NAN,
            sign_coherence: f64::NAN,
            o1: f64::NAN,
            o1_exact: f64::NAN,
            o1_rel_error: f64::NAN,
            o2: f64::NAN,
            marginal_error: f64::NAN,
            mass: f64::NAN,
            occupancy: f64::NAN,
            stored_cells_peak: 0,
        }
    }
}

fn summary_table(cfg: &RunConfig, s: &Summary) -> Table {
    let strategy = match cfg.experiment {
        Experiment::VugStatic | Experiment::NonlocalLinearHd => "-",
        _ => match cfg.strategy {
            Strategy::A => "A",
            Strategy::B => "B",
        },
    };
    let mut t = Table::new(FileKind::Summary);
    t.push(vec![
        Value::Text(cfg.experiment.name().into()),
        Value::Text(strategy.into()),
        Value::Int(cfg.n as u64),
        Value::Int(cfg.dim as u64),
        Value::Real(cfg.h),
        Value::Real(cfg.tau),
        Value::Real(cfg.t_final),
        Value::Int(cfg.seed),
        Value::Int(cfg.workers as u64),
        Value::Real(s.error_u),
        Value::Real(s.error_p),
        Value::Real(s.error_m),
        Value::Real(s.sign_coherence),
        Value::Real(s.o1),
        Value::Real(s.o1_exact),
        Value::Real(s.o1_rel_error),
        Value::Real(s.o2),
        Value::Real(s.marginal_error),
        Value::Real(s.mass),
        Value::Real(s.occupancy),
        Value::Int(s.stored_cells_peak),
    ]);
    t
}

fn steps_table(records: &[StepRecord], scores: Option<&[ProjectionScore]>) -> Table {
    let mut t = Table::new(FileKind::Steps);
    for (k, r) in records.iter().enumerate() {
        let score = scores.and_then(|s| s.get(k));
        t.push(vec![
            Value::Int(r.step as u64),
            Value::Real(r.t),
            Value::Real(r.z),
            Value::Real(r.mean_weight),
            Value::Int(r.stored_cells as u64),
            Value::Int(r.update_cells as u64),
            Value::Real(r.mean_jumps),
            r.imbalance.map_or_else(nan, Value::Real),
            score.map_or_else(nan, |s| Value::Real(s.error_p)),
            score.map_or_else(nan, |s| Value::Real(s.error_m)),
            score.map_or_else(nan, |s| Value::Real(s.sign_coherence)),
        ]);
    }
    t
}

fn timing_table(records: &[StepRecord], extra: &[(&str, f64)]) -> Table {
    let mut t = Table::new(FileKind::Timing);
    for r in records {
        t.push(vec![Value::Text(format!("step {}", r.step)), Value::Real(r.wall_seconds)]);
    }
    for (label, s) in extra {
        t.push(vec![Value::Text((*label).into()), Value::Real(*s)]);
    }
    t
}

fn table_1d(num: &GriddedFunction1D, reference: Option<&GriddedFunction1D>) -> Table {
    let mut t = Table::new(FileKind::Projection1d);
    for i in 0..num.len() {
        t.push(vec![
            Value::Real(num.center(i)),
            Value::Real(num.values[i]),
            reference.map_or_else(nan, |r| Value::Real(r.values[i])),
        ]);
    }
    t
}

fn table_2d(num: &GriddedFunction2D, reference: Option<&GriddedFunction2D>) -> Table {
    let mut t = Table::new(FileKind::Projection2d);
    for i in 0..num.nx {
        for j in 0..num.ny {
            let [x, y] = num.center(i, j);
            t.push(vec![
                Value::Real(x),
                Value::Real(y),
                Value::Real(num.get(i, j)),
                reference.map_or_else(nan, |r| Value::Real(r.get(i, j))),
            ]);
        }
    }
    t
}

fn peak(records: &[StepRecord]) -> u64 {
    records.iter().map(|r| r.stored_cells as u64).max().unwrap_or(0)
}

fn window_1d(e: &ParticleEnsemble, center: f64, h: f64) -> GriddedFunction1D {
    let (o, n) = aligned_range(center - HEAVY_TAIL_WINDOW, center + HEAVY_TAIL_WINDOW, 0.0, h);
    project_1d(e, o, h, n)
}

fn window_2d(e: &ParticleEnsemble, center: [f64; 2], h: f64) -> GriddedFunction2D {
    let (ox, nx) = aligned_range(center[0] - HEAVY_TAIL_WINDOW, center[0] + HEAVY_TAIL_WINDOW, 0.0, h);
    let (oy, ny) = aligned_range(center[1] - HEAVY_TAIL_WINDOW, center[1] + HEAVY_TAIL_WINDOW, 0.0, h);
    project_2d(e, [ox, oy], h, nx, ny)
}

/// Runs the experiment on the calling thread's rayon pool.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    cfg.validate().map_err(|e| SpmError::InvalidSpec(e.to_string()))?;
    let clock = Instant::now();
    let opts = RunOptions::default();
    let mut s = Summary::default();
    let (steps, p1, p2, records) = match cfg.experiment {
        Experiment::Benchmark1d => {
            let o = run_benchmark_1d(cfg.strategy, cfg.n, cfg.h, cfg.tau, cfg.t_final, cfg.seed, &opts, None)?;
            s.error_u = o.error;
            s.stored_cells_peak = peak(&o.records);
            s.mass = o.numeric.values.iter().sum::<f64>() * cfg.h;
            (Some(steps_table(&o.records, None)), Some(table_1d(&o.numeric, Some(&o.reference))), None, o.records)
        }
        Experiment::VugStatic => {
            let o = run_vug_static(cfg.dim, cfg.n, cfg.h, cfg.seed)?;
            s.error_p = o.error;
            s.mass = o.mass;
            s.occupancy = o.occupancy.ratio;
            s.stored_cells_peak = o.occupancy.stored_cells as u64;
            let n = (1.0 / cfg.h).round() as usize;
            let num = project_1d(&o.ensemble, 0.0, cfg.h, n);
            let reference = GriddedFunction1D::from_centers(0.0, cfg.h, n, beta_mixture_marginal);
            (None, Some(table_1d(&num, Some(&reference))), None, Vec::new())
        }
        Experiment::AllenCahn6d | Experiment::Hjb7d => {
            let sol = if cfg.experiment == Experiment::Hjb7d {
                KernelPairSolution::hjb(cfg.dim, cfg.c)
            } else {
                KernelPairSolution::allen_cahn(cfg.dim, cfg.c)
            };
            let (records, scores) = run_kernel_pair(&sol, cfg.n, cfg.h, cfg.tau, cfg.t_final, cfg.seed, &opts)?;
            let last = scores.last().expect("at least the initial state is scored");
            s.error_p = last.error_p;
            s.error_m = last.error_m;
            s.sign_coherence = last.sign_coherence;
            s.stored_cells_peak = peak(&records);
            (
                Some(steps_table(&records, Some(&scores))),
                Some(table_1d(&last.p_numeric, Some(&last.p_reference))),
                Some(table_2d(&last.m_numeric, Some(&last.m_reference))),
                records,
            )
        }
        Experiment::AllenCahnNonlocal6d => {
            let spec = nonlocal_allen_cahn_problem(cfg.dim, cfg.alpha, cfg.epsilon, cfg.tau, cfg.t_final)?;
            let grid = GridSpec::uniform(cfg.dim, 0.0, cfg.h)?;
            let (state, records) = run(&spec, cfg.n, &grid, cfg.seed, &opts, |_, _| Ok(()))?;
            s.stored_cells_peak = peak(&records);
            let p = window_1d(&state.ensemble, 0.0, cfg.h);
            let m = window_2d(&state.ensemble, [0.0, 0.0], cfg.h);
            (Some(steps_table(&records, None)), Some(table_1d(&p, None)), Some(table_2d(&m, None)), records)
        }
        Experiment::NonlocalLinearHd => {
            let lin = LinearHdConfig {
                dim: cfg.dim,
                c: cfg.c,
                alpha: cfg.alpha,
                epsilon: cfg.epsilon,
                b: cfg.b,
                x0: cfg.x0,
                tau: cfg.tau,
                t_final: cfg.t_final,
            };
            let o = run_linear_hd(&lin, cfg.n, cfg.seed, cfg.dim >= 2)?;
            let exact = lin.exact_o1();
            let mut t = Table::new(FileKind::LinearSteps);
            for st in &o.series {
                t.push(vec![
                    Value::Int(st.step as u64),
                    Value::Real(st.t),
                    Value::Real(st.o1),
                    Value::Real(st.o2),
                    Value::Real(cfg.x0 - cfg.b * st.t),
                    Value::Real(st.mean_jumps),
                ]);
            }
            let last = o.series.last().expect("series holds step 0");
            s.o1 = last.o1;
            s.o2 = last.o2;
            s.o1_exact = exact;
            s.o1_rel_error = if exact == 0.0 {
                last.o1.abs()
            } else {
                ((last.o1 - exact) / exact).abs()
            };
            let p2 = match o.marginal {
                Some(points) => {
                    let (m, reference) = linear_marginal(&points, cfg)?;
                    s.marginal_error = rel_l2_error_2d(&m, &reference)?;
                    Some(table_2d(&m, Some(&reference)))
                }
                None => None,
            };
            (Some(t), None, p2, Vec::new())
        }
    };
    let timing = timing_table(&records, &[("total", clock.elapsed().as_secs_f64())]);
    Ok(RunOutput {
        steps,
        projection_1d: p1,
        projection_2d: p2,
        summary: summary_table(cfg, &s),
        timing,
    })
}

/// 2-D marginal on a window about its empirical center, with the radial reference.
pub fn linear_marginal(points: &[[f64; 2]], cfg: &RunConfig) -> Result<(GriddedFunction2D, GriddedFunction2D), SpmError> {
    let n = points.len() as f64;
    let center = [
        points.iter().map(|p| p[0]).sum::<f64>() / n,
        points.iter().map(|p| p[1]).sum::<f64>() / n,
    ];
    let flat: Vec<f64> = points.iter().flat_map(|p| *p).collect();
    let e = ParticleEnsemble::new(2, flat, vec![1.0; points.len()], cfg.t_final)?;
    let m = window_2d(&e, center, cfg.h);
    let mut values = Vec::with_capacity(m.values.len());
    for i in 0..m.nx {
        for j in 0..m.ny {
            let [x, y] = m.center(i, j);
            let r = ((x - center[0]).powi(2) + (y - center[1]).powi(2)).sqrt();
            values.push(radial_reference(r, cfg.t_final, cfg.c, cfg.alpha, 2)?);
        }
    }
    let reference = GriddedFunction2D { values, ..m.clone() };
    Ok((m, reference))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Manifest text: hash comments followed by the canonical config, so the
/// manifest itself is a valid config file.
pub fn manifest_text(cfg: &RunConfig, files: &[(String, String)]) -> String {
    let canonical = cfg.canonical();
    let mut out = String::new();
    out.push_str(&format!("# spm_version = {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("# seed = {}\n", cfg.seed));
    out.push_str(&format!("# workers = {}\n", cfg.workers));
    out.push_str(&format!("# config_sha256 = {}\n", sha256_hex(canonical.as_bytes())));
    for (name, hash) in files {
        out.push_str(&format!("# sha256 {name} = {hash}\n"));
    }
    out.push_str(&canonical);
    out
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs `cfg` on a pool of `cfg.workers` threads and writes every artifact
/// under `cfg.output_dir`. Wall times go to timing.csv only.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunReport, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let output = pool.install(|| execute(cfg))?;
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut files = Vec::new();
    let tables = [&output.steps, &output.projection_1d, &output.projection_2d];
    for t in tables.into_iter().flatten().chain([&output.summary]) {
        let bytes = t.write(&dir)?;
        files.push((t.kind.file_name().to_string(), sha256_hex(&bytes)));
    }
    output.timing.write(&dir)?;
    let path = dir.join("manifest.txt");
    std::fs::write(&path, manifest_text(cfg, &files)).map_err(io_err(&path))?;
    Ok(RunReport { output, dir, files })
}
