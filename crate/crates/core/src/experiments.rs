//! Ready-made problems and runners for the standard numerical studies.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::diagnostics::exact::{Equation, KernelPairSolution};
use crate::diagnostics::reference_1d::Reference1D;
use crate::diagnostics::{
    coarsen_1d, project_1d, project_1d_auto, project_2d_auto, rel_l2_error_1d, rel_l2_error_2d,
    rel_l2_error_piecewise_1d, sign_coherence, GriddedFunction1D, GriddedFunction2D,
};
use crate::ensemble::{ParticleEnsemble, CHUNK};
use crate::error::{Result, SpmError};
use crate::evolution::{run, RunOptions, StepRecord, StepState};
use crate::grid::GridSpec;
use crate::operators::{FractionalParams, Motion, DEFAULT_JUMP_CAP};
use crate::problem::{
    steps_for, EnvelopeScan, GaussianMixture, InitialCondition, InitialSampler, NonlinearKind, NonlinearTerm,
    ProblemSpec, Profile, Strategy, DEFAULT_ACCEPTANCE_FLOOR, INITIAL_TAG,
};
use crate::rng::{RngStream, StreamRng};
use crate::special::gamma;
use crate::vug::{OccupancyStats, VugMap};

/// Time step of the deterministic 1-D reference.
pub const REFERENCE_DT: f64 = 0.005;

// ---------------------------------------------------------------- 1-D benchmark

/// u₀(x) = e^{−x²}(1 + x⁴).
pub fn benchmark_initial() -> InitialCondition {
    let value: Profile = Arc::new(|x: &[f64]| (-x[0] * x[0]).exp() * (1.0 + x[0].powi(4)));
    InitialCondition {
        value,
        sampler: InitialSampler::Rejection {
            proposal: GaussianMixture::new(vec![1.0], vec![vec![0.0]], vec![1.2]).expect("static proposal"),
            scan: EnvelopeScan {
                axes: vec![0],
                lo: -10.0,
                hi: 10.0,
                points: 20001,
                base: vec![0.0],
            },
            mass: 1.75 * std::f64::consts::PI.sqrt(),
            acceptance_floor: DEFAULT_ACCEPTANCE_FLOOR,
        },
    }
}

/// uₜ = uₓ + uₓₓ + u − u³ on ℝ.
pub fn benchmark_problem(strategy: Strategy, tau: f64, t_final: f64) -> ProblemSpec {
    ProblemSpec {
        dim: 1,
        advection: Some(vec![1.0]),
        diffusion: Some(1.0),
        fractional: None,
        nonlinearity: NonlinearTerm::new(NonlinearKind::AllenCahn),
        initial: benchmark_initial(),
        strategy,
        tau,
        t_final,
        jump_cap: DEFAULT_JUMP_CAP,
        forcing_threshold: 0.0,
    }
}

/// Cells `[origin, origin + n h)` anchored at 0 that hold the benchmark solution up to time T.
pub fn benchmark_window(h: f64, t_final: f64) -> (f64, usize) {
    let half = ((15.0 + 4.0 * t_final) / h).ceil();
    (-half * h, 2 * half as usize)
}

/// Spacing the benchmark reference is sampled at inside each cell of width h.
pub const REFERENCE_SPACING: f64 = 0.01;

/// Subcells per cell of width `h` for the reference.
pub fn reference_subcells(h: f64) -> usize {
    ((h / REFERENCE_SPACING) - 1e-9).ceil().max(1.0) as usize
}

/// Reference on the cells of [`benchmark_window`], sampled at
/// [`reference_subcells`] midpoints per cell.
pub fn benchmark_reference(h: f64, t_final: f64) -> Result<GriddedFunction1D> {
    let (origin, n) = benchmark_window(h, t_final);
    let k = reference_subcells(h);
    let steps = (t_final / REFERENCE_DT).ceil().max(1.0);
    Reference1D::new(1.0, 1.0, t_final / steps).solve(
        |x| (-x * x).exp() * (1.0 + x.powi(4)),
        t_final,
        origin,
        h / k as f64,
        n * k,
    )
}

#[derive(Clone, Debug)]
pub struct BenchmarkOutcome {
    /// Continuous relative L² of the piecewise-constant reconstruction.
    pub error: f64,
    pub numeric: GriddedFunction1D,
    /// Cell averages of the reference on the lattice of `numeric`.
    pub reference: GriddedFunction1D,
    pub records: Vec<StepRecord>,
}

/// Runs the benchmark and scores the final reconstruction against `reference`
/// (computed by [`benchmark_reference`] when `None`).
pub fn run_benchmark_1d(
    strategy: Strategy,
    n: usize,
    h: f64,
    tau: f64,
    t_final: f64,
    seed: u64,
    opts: &RunOptions,
    reference: Option<&GriddedFunction1D>,
) -> Result<BenchmarkOutcome> {
    let spec = benchmark_problem(strategy, tau, t_final);
    let grid = GridSpec::uniform(1, 0.0, h)?;
    let (state, records) = run(&spec, n, &grid, seed, opts, |_, _| Ok(()))?;
    let fine = match reference {
        Some(r) => r.clone(),
        None => benchmark_reference(h, t_final)?,
    };
    let k = reference_subcells(h);
    let numeric = project_1d(&state.ensemble, fine.origin, h, fine.len() / k);
    Ok(BenchmarkOutcome {
        error: rel_l2_error_piecewise_1d(&numeric, &fine)?,
        numeric,
        reference: coarsen_1d(&fine, k),
        records,
    })
}

// ---------------------------------------------------------------- static reconstruction

const BETA_PARAMS: [(f64, f64, f64); 3] = [(15.0, 5.0, 1.0), (10.0, 10.0, -1.0), (5.0, 15.0, 1.0)];

fn beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    gamma(a + b) / (gamma(a) * gamma(b)) * x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0)
}

/// p(x) = Πⱼ f₁₅,₅(xⱼ) − Πⱼ f₁₀,₁₀(xⱼ) + Πⱼ f₅,₁₅(xⱼ).
pub fn beta_mixture(x: &[f64]) -> f64 {
    BETA_PARAMS
        .iter()
        .map(|&(a, b, s)| s * x.iter().map(|&v| beta_pdf(a, b, v)).product::<f64>())
        .sum()
}

/// Marginal of p on one axis (every factor integrates to one).
pub fn beta_mixture_marginal(x: f64) -> f64 {
    BETA_PARAMS.iter().map(|&(a, b, s)| s * beta_pdf(a, b, x)).sum()
}

/// Σ over every cell of [0,1]ᵈ of p(center)², by separability of the products.
pub fn beta_mixture_center_sq_sum(d: usize, h: f64) -> f64 {
    let cells = (1.0 / h).round() as usize;
    let mut total = 0.0;
    for &(a1, b1, s1) in &BETA_PARAMS {
        for &(a2, b2, s2) in &BETA_PARAMS {
            let axis: f64 = (0..cells)
                .map(|i| {
                    let x = (i as f64 + 0.5) * h;
                    beta_pdf(a1, b1, x) * beta_pdf(a2, b2, x)
                })
                .sum();
            total += s1 * s2 * axis.powi(d as i32);
        }
    }
    total
}

#[derive(Clone, Debug)]
pub struct StaticOutcome {
    pub error: f64,
    pub mass: f64,
    pub occupancy: OccupancyStats,
    pub ensemble: ParticleEnsemble,
}

/// Particles distributed as |p|/∫|p| with weights sign(p)·∫|p|. The mass is
/// the importance estimate E_q[|p|/q] over every proposal draw.
pub fn sample_beta_mixture(d: usize, n: usize, seed: u64) -> Result<ParticleEnsemble> {
    let dists: Vec<Beta<f64>> = BETA_PARAMS
        .iter()
        .map(|&(a, b, _)| Beta::new(a, b).expect("valid beta parameters"))
        .collect();
    let mut positions = vec![0.0; n * d];
    let mut signs = vec![0.0; n];
    let partial: Vec<(f64, u64)> = positions
        .par_chunks_mut(d * CHUNK)
        .zip(signs.par_chunks_mut(CHUNK))
        .enumerate()
        .map(|(c, (pos, sg))| {
            let mut ratio_sum = 0.0;
            let mut draws = 0u64;
            for (k, (x, s)) in pos.chunks_exact_mut(d).zip(sg.iter_mut()).enumerate() {
                let mut rng = RngStream::new(seed, (c * CHUNK + k) as u64).substream(INITIAL_TAG).rng();
                loop {
                    let comp = rng.random_range(0..3);
                    for v in x.iter_mut() {
                        *v = dists[comp].sample(&mut rng);
                    }
                    let q: f64 = BETA_PARAMS
                        .iter()
                        .map(|&(a, b, _)| x.iter().map(|&v| beta_pdf(a, b, v)).product::<f64>())
                        .sum::<f64>()
                        / 3.0;
                    let p = beta_mixture(x);
                    let ratio = p.abs() / q;
                    ratio_sum += ratio;
                    draws += 1;
                    if rng.random::<f64>() * 3.0 < ratio {
                        *s = p.signum();
                        break;
                    }
                }
            }
            (ratio_sum, draws)
        })
        .collect();
    let (ratio_sum, draws) = partial.iter().fold((0.0, 0u64), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let mass = ratio_sum / draws as f64;
    ParticleEnsemble::new(d, positions, signs.into_iter().map(|s| s * mass).collect(), 0.0)
}

/// Relative L² distance between a reconstruction and p at cell centers over [0,1]ᵈ.
pub fn static_error(map: &VugMap) -> Result<f64> {
    let g = map.grid();
    let d = g.dim();
    let all = beta_mixture_center_sq_sum(d, g.h());
    if !(all > 0.0) {
        return Err(SpmError::ZeroReferenceNorm);
    }
    let mut center = vec![0.0; d];
    let mut cross = 0.0;
    for (k, c) in map.sorted_cells() {
        g.center(&k, &mut center);
        let p = beta_mixture(&center);
        cross += c * c - 2.0 * c * p;
    }
    Ok(((all + cross).max(0.0) / all).sqrt())
}

pub fn run_vug_static(d: usize, n: usize, h: f64, seed: u64) -> Result<StaticOutcome> {
    if d == 0 || d > crate::grid::MAX_GRID_DIM {
        return Err(SpmError::InvalidSpec(format!("dimension {d} is out of range")));
    }
    let cells = 1.0 / h;
    if (cells - cells.round()).abs() > 1e-9 {
        return Err(SpmError::InvalidSpec(format!("h = {h} must divide the unit interval")));
    }
    let e = sample_beta_mixture(d, n, seed)?;
    let mass = e.weights().first().map_or(0.0, |w| w.abs());
    let map = VugMap::build_solution_map(&e, &GridSpec::uniform(d, 0.0, h)?)?;
    Ok(StaticOutcome {
        error: static_error(&map)?,
        mass,
        occupancy: map.occupancy(&vec![0.0; d], &vec![1.0; d]),
        ensemble: e,
    })
}

// ---------------------------------------------------------------- exact-solution studies

/// Strategy-B problem whose solution is `sol`, driven by its forcing term.
pub fn kernel_pair_problem(sol: &KernelPairSolution, tau: f64, t_final: f64) -> Result<ProblemSpec> {
    let kind = match sol.equation {
        Equation::AllenCahn => NonlinearKind::AllenCahn,
        Equation::Hjb => NonlinearKind::HjbGradSq,
    };
    Ok(ProblemSpec {
        dim: sol.dim,
        advection: None,
        diffusion: Some(sol.c),
        fractional: None,
        nonlinearity: NonlinearTerm::with_forcing(kind, sol.forcing_field()),
        initial: sol.initial_condition()?,
        strategy: Strategy::B,
        tau,
        t_final,
        jump_cap: DEFAULT_JUMP_CAP,
        forcing_threshold: 0.0,
    })
}

#[derive(Clone, Debug)]
pub struct ProjectionScore {
    pub t: f64,
    pub error_p: f64,
    pub error_m: f64,
    /// Fraction of positive particles in cells of positive reconstruction.
    pub sign_coherence: f64,
    pub p_numeric: GriddedFunction1D,
    pub p_reference: GriddedFunction1D,
    pub m_numeric: GriddedFunction2D,
    pub m_reference: GriddedFunction2D,
}

/// Scores P and M of the current ensemble against the closed form.
pub fn score_projections(state: &StepState, sol: &KernelPairSolution) -> Result<ProjectionScore> {
    let e = &state.ensemble;
    let g = state.m1.grid();
    let h = g.h();
    let t = e.time();
    let p_numeric = project_1d_auto(e, g.anchor()[0], h);
    let p_reference = GriddedFunction1D::from_centers(p_numeric.origin, h, p_numeric.len(), |x| sol.projection_1d(x, t));
    let m_numeric = project_2d_auto(e, [g.anchor()[0], g.anchor()[1]], h);
    let m_reference = GriddedFunction2D::from_centers(m_numeric.origin, h, m_numeric.nx, m_numeric.ny, |x, y| {
        sol.projection_2d(x, y, t)
    });
    Ok(ProjectionScore {
        t,
        error_p: rel_l2_error_1d(&p_numeric, &p_reference)?,
        error_m: rel_l2_error_2d(&m_numeric, &m_reference)?,
        sign_coherence: sign_coherence(e, &state.m1),
        p_numeric,
        p_reference,
        m_numeric,
        m_reference,
    })
}

/// Runs a closed-form study, scoring every step.
pub fn run_kernel_pair(
    sol: &KernelPairSolution,
    n: usize,
    h: f64,
    tau: f64,
    t_final: f64,
    seed: u64,
    opts: &RunOptions,
) -> Result<(Vec<StepRecord>, Vec<ProjectionScore>)> {
    let spec = kernel_pair_problem(sol, tau, t_final)?;
    let grid = GridSpec::uniform(sol.dim, 0.0, h)?;
    let mut scores = Vec::new();
    let (_, records) = run(&spec, n, &grid, seed, opts, |s, _| {
        scores.push(score_projections(s, sol)?);
        Ok(())
    })?;
    Ok((records, scores))
}

// ---------------------------------------------------------------- nonlocal Allen–Cahn

/// uₜ = −(−Δ)^{α/2}u + u − u³ in ℝᵈ from the standard normal density.
pub fn nonlocal_allen_cahn_problem(d: usize, alpha: f64, epsilon: f64, tau: f64, t_final: f64) -> Result<ProblemSpec> {
    let norm = (2.0 * std::f64::consts::PI).powf(-0.5 * d as f64);
    let value: Profile = Arc::new(move |x: &[f64]| norm * (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp());
    Ok(ProblemSpec {
        dim: d,
        advection: None,
        diffusion: None,
        fractional: Some(FractionalParams::new(alpha, epsilon)?),
        nonlinearity: NonlinearTerm::new(NonlinearKind::AllenCahn),
        initial: InitialCondition {
            value,
            sampler: InitialSampler::Exact {
                draw: Arc::new(|rng: &mut StreamRng, out: &mut [f64]| {
                    for v in out.iter_mut() {
                        *v = rng.sample(StandardNormal);
                    }
                }),
                mass: 1.0,
            },
        },
        strategy: Strategy::B,
        tau,
        t_final,
        jump_cap: DEFAULT_JUMP_CAP,
        forcing_threshold: 0.0,
    })
}

// ---------------------------------------------------------------- high-dimensional linear walk

#[derive(Clone, Debug)]
pub struct LinearHdConfig {
    pub dim: usize,
    pub c: f64,
    pub alpha: f64,
    pub epsilon: f64,
    /// Every component of the drift vector.
    pub b: f64,
    /// Every component of the starting point.
    pub x0: f64,
    pub tau: f64,
    pub t_final: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearHdStep {
    pub step: usize,
    pub t: f64,
    pub o1: f64,
    pub o2: f64,
    pub mean_jumps: f64,
}

#[derive(Clone, Debug)]
pub struct LinearHdOutcome {
    pub series: Vec<LinearHdStep>,
    /// Final (x₁, x₂) of every particle when requested.
    pub marginal: Option<Vec<[f64; 2]>>,
}

impl LinearHdConfig {
    /// E x₁(T) of the simulated process, which moves by −bτ per step.
    pub fn exact_o1(&self) -> f64 {
        self.x0 - self.b * self.t_final
    }
}

/// Particles evolved one at a time from δ(x − x₀) with unit weights; only
/// O(d) memory per worker.
pub fn run_linear_hd(cfg: &LinearHdConfig, n: usize, seed: u64, keep_marginal: bool) -> Result<LinearHdOutcome> {
    let steps = steps_for(cfg.t_final, cfg.tau)?;
    if cfg.dim == 0 || n == 0 {
        return Err(SpmError::InvalidSpec("dimension and N must be positive".into()));
    }
    if keep_marginal && cfg.dim < 2 {
        return Err(SpmError::InvalidSpec("the 2-D marginal needs d ≥ 2".into()));
    }
    let motion = Motion {
        advection: Some(vec![cfg.b; cfg.dim]),
        diffusion: cfg.c,
        fractional: Some(FractionalParams::new(cfg.alpha, cfg.epsilon)?),
        jump_cap: DEFAULT_JUMP_CAP,
    };
    let chunks = n.div_ceil(CHUNK);
    // per chunk: Σx₁, Σx₁², Σjumps per step, and the marginal block
    type Partial = (Vec<[f64; 3]>, Vec<[f64; 2]>);
    let partial: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Partial> {
            let mut acc = vec![[0.0; 3]; steps + 1];
            let mut marginal = Vec::new();
            let mut x = vec![0.0; cfg.dim];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                x.iter_mut().for_each(|v| *v = cfg.x0);
                let stream = RngStream::new(seed, i as u64);
                acc[0][0] += x[0];
                acc[0][1] += x[0] * x[0];
                for m in 0..steps {
                    let mut rng = stream.substream(m as u64).rng();
                    let jumps = motion.apply_fused(&mut x, cfg.tau, &mut rng).map_err(|e| e.at_step(m + 1))?;
                    let a = &mut acc[m + 1];
                    a[0] += x[0];
                    a[1] += x[0] * x[0];
                    a[2] += jumps as f64;
                }
                if keep_marginal {
                    marginal.push([x[0], x[1]]);
                }
            }
            Ok((acc, marginal))
        })
        .collect::<Result<_>>()?;
    let mut totals = vec![[0.0; 3]; steps + 1];
    let mut marginal = keep_marginal.then(|| Vec::with_capacity(n));
    for (acc, block) in partial {
        for (t, a) in totals.iter_mut().zip(acc) {
            for k in 0..3 {
                t[k] += a[k];
            }
        }
        if let Some(m) = marginal.as_mut() {
            m.extend(block);
        }
    }
    let series = totals
        .iter()
        .enumerate()
        .map(|(m, a)| LinearHdStep {
            step: m,
            t: m as f64 * cfg.tau,
            o1: a[0] / n as f64,
            o2: a[1] / n as f64,
            mean_jumps: a[2] / n as f64,
        })
        .collect();
    Ok(LinearHdOutcome { series, marginal })
}
