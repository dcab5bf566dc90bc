//! Projections, error metrics, reference solutions and observables.

pub mod exact;
pub mod radial;
pub mod reference_1d;

use crate::ensemble::{det_sum, ParticleEnsemble};
use crate::error::{Result, SpmError};
use crate::vug::VugMap;

/// Cell values on `[origin + i h, origin + (i+1) h)`, i = 0..n.
#[derive(Clone, Debug, PartialEq)]
pub struct GriddedFunction1D {
    pub origin: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

/// Cell values on a 2-D lattice, row-major in the first coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct GriddedFunction2D {
    pub origin: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl GriddedFunction1D {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn center(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.h
    }

    /// Same lattice, values from `f` at the cell centers.
    pub fn from_centers<F: Fn(f64) -> f64>(origin: f64, h: f64, n: usize, f: F) -> Self {
        Self {
            origin,
            h,
            values: (0..n).map(|i| f(origin + (i as f64 + 0.5) * h)).collect(),
        }
    }

    pub fn same_lattice(&self, other: &Self) -> bool {
        self.len() == other.len() && close(self.origin, other.origin, self.h) && close(self.h, other.h, self.h)
    }
}

impl GriddedFunction2D {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + (i as f64 + 0.5) * self.h,
            self.origin[1] + (j as f64 + 0.5) * self.h,
        ]
    }

    pub fn from_centers<F: Fn(f64, f64) -> f64>(origin: [f64; 2], h: f64, nx: usize, ny: usize, f: F) -> Self {
        let mut values = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                values.push(f(origin[0] + (i as f64 + 0.5) * h, origin[1] + (j as f64 + 0.5) * h));
            }
        }
        Self { origin, h, nx, ny, values }
    }

    pub fn same_lattice(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && close(self.origin[0], other.origin[0], self.h)
            && close(self.origin[1], other.origin[1], self.h)
            && close(self.h, other.h, self.h)
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * scale.abs().max(1.0)
}

/// Index range `[lo, hi)` of anchor-aligned cells covering `[min, max]`.
pub fn aligned_range(min: f64, max: f64, anchor: f64, h: f64) -> (f64, usize) {
    let i0 = ((min - anchor) / h).floor();
    let i1 = ((max - anchor) / h).floor() + 1.0;
    (anchor + i0 * h, (i1 - i0).max(1.0) as usize)
}

/// Σ wᵢ over 1-D bins of the first coordinate, divided by N h. Particles
/// outside the lattice are ignored.
pub fn project_1d(ensemble: &ParticleEnsemble, origin: f64, h: f64, n: usize) -> GriddedFunction1D {
    let mut values = vec![0.0; n];
    for p in ensemble.iter() {
        let k = ((p.location[0] - origin) / h).floor();
        if k >= 0.0 && (k as usize) < n {
            values[k as usize] += p.weight;
        }
    }
    let scale = 1.0 / (ensemble.len() as f64 * h);
    values.iter_mut().for_each(|v| *v *= scale);
    GriddedFunction1D { origin, h, values }
}

/// 1-D projection over the anchor-aligned span of the particles.
pub fn project_1d_auto(ensemble: &ParticleEnsemble, anchor: f64, h: f64) -> GriddedFunction1D {
    let (lo, hi) = ensemble.bounding_box();
    let (origin, n) = aligned_range(lo[0], hi[0], anchor, h);
    project_1d(ensemble, origin, h, n)
}

/// Σ wᵢ over 2-D bins of the first two coordinates, divided by N h².
pub fn project_2d(ensemble: &ParticleEnsemble, origin: [f64; 2], h: f64, nx: usize, ny: usize) -> GriddedFunction2D {
    let mut values = vec![0.0; nx * ny];
    for p in ensemble.iter() {
        let i = ((p.location[0] - origin[0]) / h).floor();
        let j = ((p.location[1] - origin[1]) / h).floor();
        if i >= 0.0 && j >= 0.0 && (i as usize) < nx && (j as usize) < ny {
            values[i as usize * ny + j as usize] += p.weight;
        }
    }
    let scale = 1.0 / (ensemble.len() as f64 * h * h);
    values.iter_mut().for_each(|v| *v *= scale);
    GriddedFunction2D { origin, h, nx, ny, values }
}

pub fn project_2d_auto(ensemble: &ParticleEnsemble, anchor: [f64; 2], h: f64) -> GriddedFunction2D {
    let (lo, hi) = ensemble.bounding_box();
    let (ox, nx) = aligned_range(lo[0], hi[0], anchor[0], h);
    let (oy, ny) = aligned_range(lo[1], hi[1], anchor[1], h);
    project_2d(ensemble, [ox, oy], h, nx, ny)
}

/// A 1-D reconstruction as a dense lattice function over its stored span.
pub fn map_to_gridded_1d(map: &VugMap) -> GriddedFunction1D {
    let g = map.grid();
    let h = g.h();
    match map.coord_bounds() {
        Some((lo, hi)) => {
            let n = (hi[0] - lo[0] + 1) as usize;
            let mut values = vec![0.0; n];
            for (k, v) in map.iter() {
                values[(k.as_slice()[0] - lo[0]) as usize] = *v;
            }
            GriddedFunction1D {
                origin: g.anchor()[0] + lo[0] as f64 * h,
                h,
                values,
            }
        }
        None => GriddedFunction1D {
            origin: g.anchor()[0],
            h,
            values: vec![0.0],
        },
    }
}

fn rel_l2(num: &[f64], reference: &[f64]) -> Result<f64> {
    let diff: f64 = num.iter().zip(reference).map(|(a, b)| (a - b) * (a - b)).sum();
    let norm: f64 = reference.iter().map(|b| b * b).sum();
    if !(norm > 0.0) {
        return Err(SpmError::ZeroReferenceNorm);
    }
    Ok((diff / norm).sqrt())
}

/// ‖num − ref‖₂ / ‖ref‖₂ over a shared 1-D lattice.
pub fn rel_l2_error_1d(num: &GriddedFunction1D, reference: &GriddedFunction1D) -> Result<f64> {
    if !num.same_lattice(reference) {
        return Err(SpmError::LatticeMismatch);
    }
    rel_l2(&num.values, &reference.values)
}

/// Continuous ‖num − ref‖₂ / ‖ref‖₂ with `num` piecewise constant on its cells
/// and `fine` sampled at `k` equal subcells per cell (midpoint rule).
pub fn rel_l2_error_piecewise_1d(num: &GriddedFunction1D, fine: &GriddedFunction1D) -> Result<f64> {
    let k = subcells(num, fine)?;
    let spread: Vec<f64> = num.values.iter().flat_map(|&v| std::iter::repeat(v).take(k)).collect();
    rel_l2(&spread, &fine.values)
}

/// Cell averages of `fine` over groups of subcells matching the `h` lattice.
pub fn coarsen_1d(fine: &GriddedFunction1D, k: usize) -> GriddedFunction1D {
    let values = fine.values.chunks(k).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    GriddedFunction1D {
        origin: fine.origin,
        h: fine.h * k as f64,
        values,
    }
}

fn subcells(num: &GriddedFunction1D, fine: &GriddedFunction1D) -> Result<usize> {
    let ratio = num.h / fine.h;
    let k = ratio.round();
    let ok = k >= 1.0
        && (ratio - k).abs() <= 1e-9 * k
        && (num.origin - fine.origin).abs() <= 1e-9 * fine.h
        && fine.len() == k as usize * num.len();
    if ok {
        Ok(k as usize)
    } else {
        Err(SpmError::LatticeMismatch)
    }
}

pub fn rel_l2_error_2d(num: &GriddedFunction2D, reference: &GriddedFunction2D) -> Result<f64> {
    if !num.same_lattice(reference) {
        return Err(SpmError::LatticeMismatch);
    }
    rel_l2(&num.values, &reference.values)
}

/// Re-expresses `f` on the lattice of `target`, zero outside its own span.
pub fn resample_1d(f: &GriddedFunction1D, origin: f64, n: usize) -> GriddedFunction1D {
    let values = (0..n)
        .map(|i| {
            let x = origin + (i as f64 + 0.5) * f.h;
            let k = ((x - f.origin) / f.h).floor();
            if k >= 0.0 && (k as usize) < f.len() {
                f.values[k as usize]
            } else {
                0.0
            }
        })
        .collect();
    GriddedFunction1D { origin, h: f.h, values }
}

/// Smallest lattice (same h) holding both spans.
pub fn union_span(a: &GriddedFunction1D, b: &GriddedFunction1D) -> (f64, usize) {
    let lo = a.origin.min(b.origin);
    let hi = (a.origin + a.len() as f64 * a.h).max(b.origin + b.len() as f64 * b.h);
    (lo, ((hi - lo) / a.h).round() as usize)
}

/// O₁ = ⟨x₁, u⟩ and O₂ = ⟨x₁², u⟩.
pub fn observables_linear(ensemble: &ParticleEnsemble) -> (f64, f64) {
    let n = ensemble.len();
    let w = ensemble.weights();
    let o1 = det_sum(n, |i| w[i] * ensemble.location(i)[0]) / n as f64;
    let o2 = det_sum(n, |i| {
        let x = ensemble.location(i)[0];
        w[i] * x * x
    }) / n as f64;
    (o1, o2)
}

/// Fraction of positive-weight particles sitting in cells where `map` is positive.
pub fn sign_coherence(ensemble: &ParticleEnsemble, map: &VugMap) -> f64 {
    let mut pos = 0usize;
    let mut agree = 0usize;
    for p in ensemble.iter() {
        if p.weight > 0.0 {
            pos += 1;
            if map.eval_u(p.location) > 0.0 {
                agree += 1;
            }
        }
    }
    if pos == 0 {
        1.0
    } else {
        agree as f64 / pos as f64
    }
}
