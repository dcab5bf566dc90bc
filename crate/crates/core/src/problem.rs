//! Problem descriptors: operator, nonlinearity, initial data, time stepping.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::ensemble::{ParticleEnsemble, CHUNK};
use crate::error::{Result, SpmError};
use crate::operators::{FractionalParams, Motion, DEFAULT_JUMP_CAP};
use crate::rng::{RngStream, StreamRng};

/// Space-time field r(x, t).
pub type Field = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
/// Function of space only.
pub type Profile = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Exact sampler writing one draw into the output slice.
pub type ExactDraw = Arc<dyn Fn(&mut StreamRng, &mut [f64]) + Send + Sync>;

/// Substream tag reserved for the initial draw; step m uses tag m.
pub const INITIAL_TAG: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonlinearKind {
    None,
    AllenCahn,
    HjbGradSq,
}

impl NonlinearKind {
    /// Whether f vanishes wherever u does.
    pub fn vanishes_with_solution(self) -> bool {
        !matches!(self, NonlinearKind::HjbGradSq)
    }

    pub fn name(self) -> &'static str {
        match self {
            NonlinearKind::None => "none",
            NonlinearKind::AllenCahn => "allen_cahn",
            NonlinearKind::HjbGradSq => "hjb_grad_sq",
        }
    }
}

#[derive(Clone)]
pub struct NonlinearTerm {
    pub kind: NonlinearKind,
    pub forcing: Option<Field>,
}

impl fmt::Debug for NonlinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearTerm")
            .field("kind", &self.kind)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl NonlinearTerm {
    pub fn new(kind: NonlinearKind) -> Self {
        Self { kind, forcing: None }
    }

    pub fn with_forcing(kind: NonlinearKind, forcing: Field) -> Self {
        Self {
            kind,
            forcing: Some(forcing),
        }
    }

    pub fn needs_gradient(&self) -> bool {
        self.kind == NonlinearKind::HjbGradSq
    }

    pub fn is_zero(&self) -> bool {
        self.kind == NonlinearKind::None && self.forcing.is_none()
    }

    /// f(t, x, u, ∇u), forcing included.
    pub fn f_value(&self, t: f64, x: &[f64], u: f64, grad: &[f64]) -> f64 {
        let base = match self.kind {
            NonlinearKind::None => 0.0,
            NonlinearKind::AllenCahn => u - u * u * u,
            NonlinearKind::HjbGradSq => grad.iter().map(|g| g * g).sum(),
        };
        match &self.forcing {
            Some(r) => base + r(x, t),
            None => base,
        }
    }

    /// f/u on the support of u and 0 off it.
    pub fn f_hat_value(&self, u: f64) -> Result<f64> {
        if self.forcing.is_some() || !self.kind.vanishes_with_solution() {
            return Err(SpmError::AssumptionViolated(self.kind.name()));
        }
        Ok(match self.kind {
            NonlinearKind::AllenCahn if u != 0.0 => 1.0 - u * u,
            _ => 0.0,
        })
    }
}

/// Isotropic Gaussian mixture used as a rejection proposal.
#[derive(Clone, Debug)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    sigmas: Vec<f64>,
    cumulative: Vec<f64>,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, sigmas: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || means.len() != k || sigmas.len() != k {
            return Err(SpmError::InvalidSpec("mixture components are inconsistent".into()));
        }
        let d = means[0].len();
        if means.iter().any(|m| m.len() != d) || sigmas.iter().any(|s| !(*s > 0.0)) || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(SpmError::InvalidSpec("mixture components are inconsistent".into()));
        }
        let total: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self {
            weights,
            means,
            sigmas,
            cumulative,
        })
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        let d = x.len() as f64;
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.sigmas)
            .map(|((w, m), s)| {
                let r2: f64 = x.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum();
                w * (-0.5 * r2 / (s * s)).exp() / (2.0 * std::f64::consts::PI * s * s).powf(0.5 * d)
            })
            .sum()
    }

    pub fn sample(&self, rng: &mut StreamRng, out: &mut [f64]) {
        let u: f64 = rng.random();
        let k = self.cumulative.iter().position(|&c| u < c).unwrap_or(self.weights.len() - 1);
        for (o, m) in out.iter_mut().zip(&self.means[k]) {
            let z: f64 = rng.sample(StandardNormal);
            *o = m + self.sigmas[k] * z;
        }
    }
}

/// Where to look for the supremum of |u₀|/q: a tensor grid over `axes`
/// spanning `[lo, hi]`, other coordinates held at `base`.
#[derive(Clone, Debug)]
pub struct EnvelopeScan {
    pub axes: Vec<usize>,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub base: Vec<f64>,
}

pub const ENVELOPE_SAFETY: f64 = 1.2;
pub const DEFAULT_ACCEPTANCE_FLOOR: f64 = 1e-3;

#[derive(Clone)]
pub enum InitialSampler {
    /// Draws exactly from |u₀|/∫|u₀|.
    Exact { draw: ExactDraw, mass: f64 },
    /// Rejection from a Gaussian-mixture proposal.
    Rejection {
        proposal: GaussianMixture,
        scan: EnvelopeScan,
        mass: f64,
        acceptance_floor: f64,
    },
}

impl fmt::Debug for InitialSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialSampler::Exact { mass, .. } => f.debug_struct("Exact").field("mass", mass).finish(),
            InitialSampler::Rejection { proposal, scan, mass, acceptance_floor } => f
                .debug_struct("Rejection")
                .field("proposal", proposal)
                .field("scan", scan)
                .field("mass", mass)
                .field("acceptance_floor", acceptance_floor)
                .finish(),
        }
    }
}

#[derive(Clone)]
pub struct InitialCondition {
    pub value: Profile,
    pub sampler: InitialSampler,
}

impl fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialCondition").field("sampler", &self.sampler).finish()
    }
}

impl InitialCondition {
    /// ∫|u₀|, the common weight magnitude of an exact draw.
    pub fn mass(&self) -> f64 {
        match &self.sampler {
            InitialSampler::Exact { mass, .. } | InitialSampler::Rejection { mass, .. } => *mass,
        }
    }
}

/// Numerically located envelope constant M ≥ sup |u₀|/q, safety factor included.
pub fn rejection_envelope(value: &Profile, proposal: &GaussianMixture, scan: &EnvelopeScan) -> Result<f64> {
    let k = scan.axes.len();
    if k == 0 || scan.points < 2 || scan.base.len() != proposal.dim() {
        return Err(SpmError::InvalidSpec("envelope scan is malformed".into()));
    }
    let total = scan.points.checked_pow(k as u32).filter(|&t| t <= 50_000_000).ok_or_else(|| {
        SpmError::InvalidSpec("envelope scan grid is too large".into())
    })?;
    let step = (scan.hi - scan.lo) / (scan.points - 1) as f64;
    let best = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut x = scan.base.clone();
            for &axis in &scan.axes {
                x[axis] = scan.lo + (flat % scan.points) as f64 * step;
                flat /= scan.points;
            }
            let q = proposal.pdf(&x);
            if q > 0.0 {
                value(&x).abs() / q
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max);
    if !(best > 0.0 && best.is_finite()) {
        return Err(SpmError::InvalidSpec("envelope scan found no mass".into()));
    }
    Ok(best * ENVELOPE_SAFETY)
}

/// N particles distributed as |u₀|/∫|u₀| with weights u₀/p = sign(u₀)·∫|u₀|.
///
/// Particle i draws from stream (seed, i) only, so the ensemble does not
/// depend on the thread pool.
pub fn initial_sample(dim: usize, ic: &InitialCondition, n: usize, seed: u64) -> Result<ParticleEnsemble> {
    if n == 0 {
        return Err(SpmError::InvalidSpec("N must be at least 1".into()));
    }
    let mut positions = vec![0.0; n * dim];
    let mut weights = vec![0.0; n];
    let mass = ic.mass();
    match &ic.sampler {
        InitialSampler::Exact { draw, .. } => {
            positions
                .par_chunks_mut(dim * CHUNK)
                .zip(weights.par_chunks_mut(CHUNK))
                .enumerate()
                .try_for_each(|(c, (pos, w))| -> Result<()> {
                    for (k, (x, wi)) in pos.chunks_exact_mut(dim).zip(w.iter_mut()).enumerate() {
                        let i = c * CHUNK + k;
                        let mut rng = RngStream::new(seed, i as u64).substream(INITIAL_TAG).rng();
                        draw(&mut rng, x);
                        let u = (ic.value)(x);
                        if !u.is_finite() {
                            return Err(SpmError::NonFiniteEvaluation { index: i });
                        }
                        *wi = mass.copysign(u);
                    }
                    Ok(())
                })?;
        }
        InitialSampler::Rejection {
            proposal,
            scan,
            acceptance_floor,
            ..
        } => {
            if proposal.dim() != dim {
                return Err(SpmError::InvalidSpec("proposal dimension differs from the problem".into()));
            }
            let envelope = rejection_envelope(&ic.value, proposal, scan)?;
            let max_tries = (20.0 / acceptance_floor).ceil() as u64;
            let tries: Vec<u64> = positions
                .par_chunks_mut(dim * CHUNK)
                .zip(weights.par_chunks_mut(CHUNK))
                .enumerate()
                .map(|(c, (pos, w))| -> Result<u64> {
                    let mut total = 0u64;
                    for (k, (x, wi)) in pos.chunks_exact_mut(dim).zip(w.iter_mut()).enumerate() {
                        let i = c * CHUNK + k;
                        let mut rng = RngStream::new(seed, i as u64).substream(INITIAL_TAG).rng();
                        let mut attempts = 0u64;
                        loop {
                            attempts += 1;
                            if attempts > max_tries {
                                return Err(SpmError::AcceptanceTooLow {
                                    rate: 1.0 / attempts as f64,
                                    floor: *acceptance_floor,
                                });
                            }
                            proposal.sample(&mut rng, x);
                            let u = (ic.value)(x);
                            if !u.is_finite() {
                                return Err(SpmError::NonFiniteEvaluation { index: i });
                            }
                            let ratio = u.abs() / proposal.pdf(x);
                            if ratio > envelope {
                                return Err(SpmError::EnvelopeViolated { ratio, envelope });
                            }
                            let a: f64 = rng.random();
                            if a * envelope < ratio {
                                *wi = mass.copysign(u);
                                break;
                            }
                        }
                        total += attempts;
                    }
                    Ok(total)
                })
                .collect::<Result<_>>()?;
            let rate = n as f64 / tries.iter().sum::<u64>() as f64;
            if rate < *acceptance_floor {
                return Err(SpmError::AcceptanceTooLow {
                    rate,
                    floor: *acceptance_floor,
                });
            }
        }
    }
    ParticleEnsemble::new(dim, positions, weights, 0.0)
}

/// Complete description of one evolution problem.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub dim: usize,
    pub advection: Option<Vec<f64>>,
    pub diffusion: Option<f64>,
    pub fractional: Option<FractionalParams>,
    pub nonlinearity: NonlinearTerm,
    pub initial: InitialCondition,
    pub strategy: Strategy,
    pub tau: f64,
    pub t_final: f64,
    pub jump_cap: u64,
    /// Cells next to the support are added to the update map when |r|τ exceeds this; 0 disables.
    pub forcing_threshold: f64,
}

impl ProblemSpec {
    /// Number of steps T/τ, or an error if it is not a positive integer.
    pub fn steps(&self) -> Result<usize> {
        steps_for(self.t_final, self.tau)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(SpmError::InvalidSpec("dimension must be positive".into()));
        }
        self.steps()?;
        if let Some(b) = &self.advection {
            if b.len() != self.dim || b.iter().any(|v| !v.is_finite()) {
                return Err(SpmError::InvalidSpec(format!("advection must be a finite {}-vector", self.dim)));
            }
        }
        if let Some(c) = self.diffusion {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(SpmError::InvalidSpec(format!("diffusion must be non-negative, got {c}")));
            }
        }
        if self.strategy == Strategy::A {
            if !self.nonlinearity.kind.vanishes_with_solution() {
                return Err(SpmError::AssumptionViolated(self.nonlinearity.kind.name()));
            }
            if self.nonlinearity.forcing.is_some() {
                return Err(SpmError::AssumptionViolated("forcing"));
            }
        }
        if !(self.forcing_threshold >= 0.0) {
            return Err(SpmError::InvalidSpec("forcing threshold must be non-negative".into()));
        }
        Ok(())
    }

    pub fn motion(&self) -> Motion {
        Motion {
            advection: self.advection.clone(),
            diffusion: self.diffusion.unwrap_or(0.0),
            fractional: self.fractional,
            jump_cap: self.jump_cap,
        }
    }
}

pub fn steps_for(t_final: f64, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau.is_finite()) || !(t_final > 0.0 && t_final.is_finite()) {
        return Err(SpmError::InvalidSpec(format!("tau and T must be positive, got tau={tau}, T={t_final}")));
    }
    let ratio = t_final / tau;
    let m = ratio.round();
    if m < 1.0 || (ratio - m).abs() > 1e-9 * m {
        return Err(SpmError::InvalidSpec(format!("T/tau = {ratio} is not a positive integer")));
    }
    Ok(m as usize)
}

pub fn default_jump_cap() -> u64 {
    DEFAULT_JUMP_CAP
}
