//! Sparse piecewise-constant reconstruction on a virtual uniform grid.
//!
//! Only occupied cells are stored, keyed by their integer lattice
//! coordinate. Accumulation is hash based; anything whose result could
//! depend on iteration order (merging, Z, the sampling table, serialization)
//! walks the cells in a fixed order.

use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::ensemble::ParticleEnsemble;
use crate::error::{Result, SpmError};
use crate::grid::{GridCoord, GridSpec};
use crate::problem::NonlinearTerm;
use crate::rng::StreamRng;

/// Particles per accumulation shard; independent of the thread count.
pub const SHARD: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapRole {
    /// Cell averages of u.
    Solution,
    /// Cell values of u + τ f.
    SolutionPlusNonlinearity,
    /// Cell values of f/u.
    FHat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyStats {
    pub stored_cells: usize,
    pub full_cells: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct VugMap {
    grid: GridSpec,
    role: MapRole,
    cells: FxHashMap<GridCoord, f64>,
}

impl VugMap {
    pub fn empty(grid: GridSpec, role: MapRole) -> Self {
        Self {
            grid,
            role,
            cells: FxHashMap::default(),
        }
    }

    pub fn from_cells<I: IntoIterator<Item = (GridCoord, f64)>>(grid: GridSpec, role: MapRole, cells: I) -> Self {
        let mut m = Self::empty(grid, role);
        m.cells.extend(cells);
        m
    }

    /// Cell averages (1/(N hᵈ)) Σ_{xᵢ∈Q_k} wᵢ.
    pub fn build_solution_map(ensemble: &ParticleEnsemble, grid: &GridSpec) -> Result<VugMap> {
        let d = grid.dim();
        if ensemble.dim() != d {
            return Err(SpmError::InvalidSpec(format!(
                "ensemble dimension {} differs from lattice dimension {d}",
                ensemble.dim()
            )));
        }
        let shards: Vec<FxHashMap<GridCoord, f64>> = ensemble
            .positions()
            .par_chunks(d * SHARD)
            .zip(ensemble.weights().par_chunks(SHARD))
            .map(|(pos, w)| -> Result<FxHashMap<GridCoord, f64>> {
                let mut m = FxHashMap::default();
                for (x, &wi) in pos.chunks_exact(d).zip(w) {
                    *m.entry(grid.coord(x)?).or_insert(0.0) += wi;
                }
                Ok(m)
            })
            .collect::<Result<_>>()?;
        // Left fold in shard order: every cell sum is formed in particle-index order.
        let mut iter = shards.into_iter();
        let mut cells = iter.next().unwrap_or_default();
        for shard in iter {
            for (k, v) in shard {
                *cells.entry(k).or_insert(0.0) += v;
            }
        }
        let scale = 1.0 / (ensemble.len() as f64 * grid.cell_measure());
        for v in cells.values_mut() {
            *v *= scale;
        }
        Ok(VugMap {
            grid: grid.clone(),
            role: MapRole::Solution,
            cells,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn role(&self) -> MapRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn insert(&mut self, c: GridCoord, v: f64) {
        self.cells.insert(c, v);
    }

    pub fn contains(&self, c: &GridCoord) -> bool {
        self.cells.contains_key(c)
    }

    /// Stored value, 0 for absent cells.
    #[inline]
    pub fn get(&self, c: &GridCoord) -> f64 {
        self.cells.get(c).copied().unwrap_or(0.0)
    }

    /// Value of the cell containing `x`.
    #[inline]
    pub fn eval_u(&self, x: &[f64]) -> f64 {
        match self.grid.coord(x) {
            Ok(c) => self.get(&c),
            Err(_) => 0.0,
        }
    }

    /// Central difference along `axis` between the two neighbours of cell `c`.
    #[inline]
    pub fn grad_component_at(&self, c: &GridCoord, axis: usize) -> f64 {
        let plus = c.shifted(axis, 1).map_or(0.0, |k| self.get(&k));
        let minus = c.shifted(axis, -1).map_or(0.0, |k| self.get(&k));
        (plus - minus) / (2.0 * self.grid.h())
    }

    pub fn eval_grad_component(&self, x: &[f64], axis: usize) -> f64 {
        match self.grid.coord(x) {
            Ok(c) => self.grad_component_at(&c, axis),
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GridCoord, &f64)> {
        self.cells.iter()
    }

    /// Cells in ascending coordinate order.
    pub fn sorted_cells(&self) -> Vec<(GridCoord, f64)> {
        let mut v: Vec<_> = self.cells.iter().map(|(k, v)| (*k, *v)).collect();
        v.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Z = Σ |c_k| hᵈ, summed in coordinate order.
    pub fn total_variation_z(&self) -> f64 {
        let hd = self.grid.cell_measure();
        self.sorted_cells().iter().map(|(_, v)| v.abs() * hd).sum()
    }

    /// Σ c_k hᵈ, summed in coordinate order.
    pub fn integral(&self) -> f64 {
        let hd = self.grid.cell_measure();
        self.sorted_cells().iter().map(|(_, v)| v * hd).sum()
    }

    /// Per-axis inclusive coordinate bounds of the stored cells.
    pub fn coord_bounds(&self) -> Option<(Vec<i32>, Vec<i32>)> {
        let d = self.grid.dim();
        let mut it = self.cells.keys();
        let first = it.next()?;
        let mut lo = first.as_slice().to_vec();
        let mut hi = lo.clone();
        for k in it {
            for j in 0..d {
                lo[j] = lo[j].min(k.as_slice()[j]);
                hi[j] = hi[j].max(k.as_slice()[j]);
            }
        }
        Some((lo, hi))
    }

    /// Stored versus full cell counts over the box `[lo, hi]`.
    pub fn occupancy(&self, lo: &[f64], hi: &[f64]) -> OccupancyStats {
        let h = self.grid.h();
        let full: f64 = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| ((b - a) / h - 1e-9).ceil().max(1.0))
            .product();
        OccupancyStats {
            stored_cells: self.len(),
            full_cells: full,
            ratio: self.len() as f64 / full,
        }
    }

    /// Occupancy over the smallest lattice-aligned box holding every stored cell.
    pub fn occupancy_of_bounds(&self) -> OccupancyStats {
        let full = match self.coord_bounds() {
            Some((lo, hi)) => lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as f64).product(),
            None => 1.0,
        };
        OccupancyStats {
            stored_cells: self.len(),
            full_cells: full,
            ratio: self.len() as f64 / full,
        }
    }

    /// One line per cell, `d` integers then the value, in coordinate order.
    pub fn write_columnar<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in self.sorted_cells() {
            for c in k.as_slice() {
                write!(w, "{c} ")?;
            }
            writeln!(w, "{}", crate::fmt::fmt_f64(v))?;
        }
        Ok(())
    }

    pub fn read_columnar<R: BufRead>(r: R, grid: GridSpec, role: MapRole) -> Result<VugMap> {
        let d = grid.dim();
        let mut m = VugMap::empty(grid, role);
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != d + 1 {
                return Err(SpmError::MapFormat {
                    line: n + 1,
                    reason: format!("expected {} fields, found {}", d + 1, fields.len()),
                });
            }
            let mut c = Vec::with_capacity(d);
            for f in &fields[..d] {
                c.push(f.parse::<i32>().map_err(|e| SpmError::MapFormat {
                    line: n + 1,
                    reason: e.to_string(),
                })?);
            }
            let v = fields[d].parse::<f64>().map_err(|e| SpmError::MapFormat {
                line: n + 1,
                reason: e.to_string(),
            })?;
            m.insert(GridCoord::new(&c), v);
        }
        Ok(m)
    }
}

/// The map of u + τ f(t, x_c, u, ∇u) over the stored cells of `m1`.
///
/// With a forcing term and `threshold > 0`, axis neighbours of the support
/// where |r|τ exceeds the threshold are added as well.
pub fn build_update_map(m1: &VugMap, term: &NonlinearTerm, t: f64, tau: f64, threshold: f64) -> VugMap {
    let grid = m1.grid();
    let d = grid.dim();
    let eval = |k: &GridCoord, u: f64| -> f64 {
        let mut x = [0.0; crate::grid::MAX_GRID_DIM];
        grid.center(k, &mut x[..d]);
        let mut g = [0.0; crate::grid::MAX_GRID_DIM];
        if term.needs_gradient() {
            for (j, gj) in g[..d].iter_mut().enumerate() {
                *gj = m1.grad_component_at(k, j);
            }
        }
        u + tau * term.f_value(t, &x[..d], u, &g[..d])
    };
    let keys: Vec<(GridCoord, f64)> = m1.iter().map(|(k, v)| (*k, *v)).collect();
    let mut values: Vec<(GridCoord, f64)> = if term.is_zero() {
        keys
    } else {
        keys.par_iter().map(|(k, u)| (*k, eval(k, *u))).collect()
    };
    if threshold > 0.0 {
        if let Some(r) = &term.forcing {
            let mut seen = FxHashSet::default();
            for (k, _) in m1.iter() {
                for j in 0..d {
                    for delta in [-1, 1] {
                        if let Some(nb) = k.shifted(j, delta) {
                            if !m1.contains(&nb) {
                                seen.insert(nb);
                            }
                        }
                    }
                }
            }
            let mut extra: Vec<GridCoord> = seen.into_iter().collect();
            extra.sort_unstable();
            let added: Vec<(GridCoord, f64)> = extra
                .par_iter()
                .filter_map(|k| {
                    let x = grid.center_vec(k);
                    if (r(&x, t) * tau).abs() > threshold {
                        Some((*k, eval(k, 0.0)))
                    } else {
                        None
                    }
                })
                .collect();
            values.extend(added);
        }
    }
    VugMap::from_cells(grid.clone(), MapRole::SolutionPlusNonlinearity, values)
}

/// The map of f/u over the stored cells of `m1`; requires f to vanish with u.
pub fn build_fhat_map(m1: &VugMap, term: &NonlinearTerm) -> Result<VugMap> {
    term.f_hat_value(0.0)?;
    let values = m1
        .iter()
        .map(|(k, &u)| term.f_hat_value(u).map(|f| (*k, f)))
        .collect::<Result<Vec<_>>>()?;
    Ok(VugMap::from_cells(m1.grid().clone(), MapRole::FHat, values))
}

/// Draws points from the piecewise-constant density |c_k|/Z.
#[derive(Clone, Debug)]
pub struct CellSampler {
    grid: GridSpec,
    cells: Vec<GridCoord>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
    z: f64,
}

impl CellSampler {
    pub fn new(map: &VugMap) -> Result<Self> {
        let hd = map.grid().cell_measure();
        let sorted = map.sorted_cells();
        let mut cells = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut cumulative = Vec::with_capacity(sorted.len());
        let mut acc = 0.0;
        for (k, v) in sorted {
            if v == 0.0 {
                continue;
            }
            acc += v.abs() * hd;
            cells.push(k);
            values.push(v);
            cumulative.push(acc);
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(SpmError::DegenerateZ { z: acc });
        }
        Ok(Self {
            grid: map.grid().clone(),
            cells,
            values,
            cumulative,
            z: acc,
        })
    }

    /// Σ |c_k| hᵈ over the table.
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the cell whose cumulative interval contains `u·Z`.
    #[inline]
    pub fn select(&self, u: f64) -> usize {
        let target = u * self.z;
        let i = self.cumulative.partition_point(|&c| c <= target);
        i.min(self.cells.len() - 1)
    }

    /// Draws a point into `out`; returns the value of the cell it came from.
    #[inline]
    pub fn sample(&self, rng: &mut StreamRng, out: &mut [f64]) -> f64 {
        let i = self.select(rng.random());
        let cell = &self.cells[i];
        self.grid.lower_corner(cell, out);
        let h = self.grid.h();
        for o in out.iter_mut() {
            *o += rng.random::<f64>() * h;
        }
        // rounding may push a draw onto the neighbouring face
        if self.grid.coord(out).ok().as_ref() != Some(cell) {
            self.grid.center(cell, out);
        }
        self.values[i]
    }

    pub fn cell(&self, i: usize) -> (GridCoord, f64) {
        (self.cells[i], self.values[i])
    }
}
