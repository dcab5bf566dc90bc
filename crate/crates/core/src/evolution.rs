//! Lawson–Euler particle stepping with the weight-multiplier (A) and the
//! relocate-and-reweight (B) strategies.

use std::time::Instant;

use rayon::prelude::*;

use crate::ensemble::{ParticleEnsemble, CHUNK};
use crate::error::{Result, SpmError};
use crate::grid::GridSpec;
use crate::partition::{aligned_box, build_histogram, split_domain};
use crate::problem::{initial_sample, ProblemSpec, Strategy};
use crate::rng::RngStream;
use crate::vug::{build_fhat_map, build_update_map, CellSampler, VugMap};

/// Ensemble and maps at time t_m.
#[derive(Clone, Debug)]
pub struct StepState {
    pub ensemble: ParticleEnsemble,
    /// Reconstruction of u.
    pub m1: VugMap,
    /// u + τf (strategy B) or f/u (strategy A), built from `m1`.
    pub m2: VugMap,
    /// Σ|c|hᵈ of `m2` for strategy B, 0 for strategy A.
    pub z: f64,
    pub step: usize,
    /// The Z every weight magnitude was set to in the step that produced this state.
    pub relocation_z: Option<f64>,
    /// Total fractional jumps completed in the step that produced this state.
    pub jumps: u64,
}

impl StepState {
    pub fn time(&self) -> f64 {
        self.ensemble.time()
    }
}

/// Generic per-step observables.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub z: f64,
    pub mean_weight: f64,
    pub stored_cells: usize,
    pub update_cells: usize,
    pub mean_jumps: f64,
    /// Largest over mean block population, when partitioning ran this step.
    pub imbalance: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    /// Recompute the domain decomposition every this many steps; 0 disables it.
    pub partition_every: usize,
    pub partition_blocks: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            partition_every: 1,
            partition_blocks: 8,
        }
    }
}

fn second_map(spec: &ProblemSpec, m1: &VugMap, t: f64) -> Result<(VugMap, f64)> {
    match spec.strategy {
        Strategy::A => Ok((build_fhat_map(m1, &spec.nonlinearity)?, 0.0)),
        Strategy::B => {
            let m2 = build_update_map(m1, &spec.nonlinearity, t, spec.tau, spec.forcing_threshold);
            let z = m2.total_variation_z();
            if !(z > 0.0 && z.is_finite()) {
                return Err(SpmError::DegenerateZ { z });
            }
            Ok((m2, z))
        }
    }
}

/// Initial draw followed by the maps at t_0.
pub fn bootstrap(spec: &ProblemSpec, n: usize, grid: &GridSpec, seed: u64) -> Result<StepState> {
    spec.validate()?;
    if grid.dim() != spec.dim {
        return Err(SpmError::InvalidSpec(format!(
            "lattice dimension {} differs from problem dimension {}",
            grid.dim(),
            spec.dim
        )));
    }
    let ensemble = initial_sample(spec.dim, &spec.initial, n, seed).map_err(|e| e.at_step(0))?;
    state_from_ensemble(spec, grid, ensemble, 0, None, 0).map_err(|e| e.at_step(0))
}

fn state_from_ensemble(
    spec: &ProblemSpec,
    grid: &GridSpec,
    ensemble: ParticleEnsemble,
    step: usize,
    relocation_z: Option<f64>,
    jumps: u64,
) -> Result<StepState> {
    let m1 = VugMap::build_solution_map(&ensemble, grid)?;
    let (m2, z) = second_map(spec, &m1, ensemble.time())?;
    Ok(StepState {
        ensemble,
        m1,
        m2,
        z,
        step,
        relocation_z,
        jumps,
    })
}

/// wᵢ ← wᵢ(1 + τ f̂(xᵢ)), then motion, then fresh maps.
pub fn step_strategy_a(state: StepState, spec: &ProblemSpec, seed: u64) -> Result<StepState> {
    let StepState {
        mut ensemble,
        m1,
        m2: fhat,
        step: m,
        ..
    } = state;
    let grid = m1.grid().clone();
    drop(m1);
    let d = spec.dim;
    let tau = spec.tau;
    let motion = spec.motion();
    let fhat = &fhat;
    let trivial = spec.nonlinearity.is_zero();
    let t_next = (m + 1) as f64 * tau;
    let (pos, w) = ensemble.columns_mut();
    let jumps: u64 = pos
        .par_chunks_mut(d * CHUNK)
        .zip(w.par_chunks_mut(CHUNK))
        .enumerate()
        .map(|(c, (pos, w))| -> Result<u64> {
            let mut jumps = 0;
            for (k, (x, wi)) in pos.chunks_exact_mut(d).zip(w.iter_mut()).enumerate() {
                if !trivial {
                    *wi *= 1.0 + tau * fhat.eval_u(x);
                }
                if motion.is_stochastic() || motion.advection.is_some() {
                    let i = (c * CHUNK + k) as u64;
                    let mut rng = RngStream::new(seed, i).substream(m as u64).rng();
                    jumps += motion.apply(x, tau, &mut rng)?;
                }
            }
            Ok(jumps)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    ensemble.set_time(t_next);
    state_from_ensemble(spec, &grid, ensemble, m + 1, None, jumps)
}

/// xᵢ ~ |m2|/Z, wᵢ = sign·Z, then motion, then fresh maps.
pub fn step_strategy_b(state: StepState, spec: &ProblemSpec, seed: u64) -> Result<StepState> {
    let m = state.step;
    let grid = state.m1.grid().clone();
    let d = spec.dim;
    let tau = spec.tau;
    let motion = spec.motion();
    let sampler = CellSampler::new(&state.m2)?;
    let z = state.z;
    let t_next = (m + 1) as f64 * tau;
    let n = state.ensemble.len();
    drop(state);
    let mut pos = vec![0.0; n * d];
    let mut w = vec![0.0; n];
    let jumps: u64 = pos
        .par_chunks_mut(d * CHUNK)
        .zip(w.par_chunks_mut(CHUNK))
        .enumerate()
        .map(|(c, (pos, w))| -> Result<u64> {
            let mut jumps = 0;
            for (k, (x, wi)) in pos.chunks_exact_mut(d).zip(w.iter_mut()).enumerate() {
                let i = (c * CHUNK + k) as u64;
                let mut rng = RngStream::new(seed, i).substream(m as u64).rng();
                let v = sampler.sample(&mut rng, x);
                *wi = z.copysign(v);
                jumps += motion.apply(x, tau, &mut rng)?;
            }
            Ok(jumps)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let ensemble = ParticleEnsemble::new(d, pos, w, t_next)?;
    state_from_ensemble(spec, &grid, ensemble, m + 1, Some(z), jumps)
}

pub fn step(state: StepState, spec: &ProblemSpec, seed: u64) -> Result<StepState> {
    let m = state.step;
    match spec.strategy {
        Strategy::A => step_strategy_a(state, spec, seed),
        Strategy::B => step_strategy_b(state, spec, seed),
    }
    .map_err(|e| e.at_step(m + 1))
}

fn imbalance(state: &StepState, opts: &RunOptions) -> Result<Option<f64>> {
    let e = &state.ensemble;
    if opts.partition_every == 0 || e.dim() < 2 || state.step % opts.partition_every != 0 {
        return Ok(None);
    }
    let (lo, hi) = e.bounding_box();
    let g = state.m1.grid();
    let (a, b) = aligned_box([lo[0], lo[1]], [hi[0], hi[1]], [g.anchor()[0], g.anchor()[1]], g.h());
    let hist = build_histogram(e, a, b, g.h())?;
    match split_domain(&hist, opts.partition_blocks) {
        Ok(p) => Ok(Some(p.imbalance())),
        Err(SpmError::PartitionTooCoarse { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn record(state: &StepState, opts: &RunOptions, wall: f64) -> Result<StepRecord> {
    Ok(StepRecord {
        step: state.step,
        t: state.time(),
        z: state.z,
        mean_weight: state.ensemble.mean_weight(),
        stored_cells: state.m1.len(),
        update_cells: state.m2.len(),
        mean_jumps: state.jumps as f64 / state.ensemble.len() as f64,
        imbalance: imbalance(state, opts).map_err(|e| e.at_step(state.step))?,
        wall_seconds: wall,
    })
}

/// Bootstraps and takes T/τ steps. `observer` sees every state, step 0 included.
pub fn run<F>(
    spec: &ProblemSpec,
    n: usize,
    grid: &GridSpec,
    seed: u64,
    opts: &RunOptions,
    mut observer: F,
) -> Result<(StepState, Vec<StepRecord>)>
where
    F: FnMut(&StepState, &StepRecord) -> Result<()>,
{
    let steps = spec.steps()?;
    let clock = Instant::now();
    let mut state = bootstrap(spec, n, grid, seed)?;
    let mut records = Vec::with_capacity(steps + 1);
    let rec = record(&state, opts, clock.elapsed().as_secs_f64())?;
    observer(&state, &rec)?;
    records.push(rec);
    for _ in 0..steps {
        let clock = Instant::now();
        state = step(state, spec, seed)?;
        let rec = record(&state, opts, clock.elapsed().as_secs_f64())?;
        observer(&state, &rec)?;
        records.push(rec);
    }
    Ok((state, records))
}
