//! Signed weighted point clouds and the weak pairing they define.

use rayon::prelude::*;

use crate::error::{Result, SpmError};

/// Particles per parallel work unit. Fixed so that every reduction has the
/// same association order whatever the size of the thread pool.
pub const CHUNK: usize = 1 << 14;

/// Sum of `f(i)` over `0..n` with a worker-count independent association order.
pub fn det_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let partial: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).map(&f).sum())
        .collect();
    partial.into_iter().sum()
}

/// Borrowed view of one particle.
#[derive(Clone, Copy, Debug)]
pub struct Particle<'a> {
    pub location: &'a [f64],
    pub weight: f64,
}

/// N particles in d dimensions, stored as flat position and weight columns.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleEnsemble {
    dim: usize,
    positions: Vec<f64>,
    weights: Vec<f64>,
    time: f64,
}

impl ParticleEnsemble {
    pub fn new(dim: usize, positions: Vec<f64>, weights: Vec<f64>, time: f64) -> Result<Self> {
        if dim == 0 {
            return Err(SpmError::InvalidSpec("dimension must be positive".into()));
        }
        if weights.is_empty() {
            return Err(SpmError::InvalidSpec("an ensemble needs at least one particle".into()));
        }
        if positions.len() != dim * weights.len() {
            return Err(SpmError::InvalidSpec(format!(
                "{} coordinates do not describe {} particles in {dim} dimensions",
                positions.len(),
                weights.len()
            )));
        }
        if let Some(i) = positions.iter().position(|x| !x.is_finite()) {
            return Err(SpmError::NonFiniteEvaluation { index: i / dim });
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(SpmError::NonFiniteEvaluation { index: i });
        }
        Ok(Self {
            dim,
            positions,
            weights,
            time,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn columns_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.positions, &mut self.weights)
    }

    #[inline]
    pub fn location(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn particle(&self, i: usize) -> Particle<'_> {
        Particle {
            location: self.location(i),
            weight: self.weights[i],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Particle<'_>> + '_ {
        self.positions
            .chunks_exact(self.dim)
            .zip(&self.weights)
            .map(|(location, &weight)| Particle { location, weight })
    }

    /// (1/N) Σ wᵢ φ(xᵢ).
    pub fn weak_pairing<F>(&self, phi: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let n = self.len();
        let bad = (0..n)
            .into_par_iter()
            .find_first(|&i| !phi(self.location(i)).is_finite());
        if let Some(index) = bad {
            return Err(SpmError::NonFiniteEvaluation { index });
        }
        Ok(det_sum(n, |i| self.weights[i] * phi(self.location(i))) / n as f64)
    }

    /// (1/N) Σ wᵢ.
    pub fn mean_weight(&self) -> f64 {
        det_sum(self.len(), |i| self.weights[i]) / self.len() as f64
    }

    /// Per-axis bounds over all particles.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for x in self.positions.chunks_exact(self.dim) {
            for j in 0..self.dim {
                lo[j] = lo[j].min(x[j]);
                hi[j] = hi[j].max(x[j]);
            }
        }
        (lo, hi)
    }
}
