//! Uniform lattice geometry: anchors, cell coordinates, centers.

use std::hash::{Hash, Hasher};

use crate::error::{Result, SpmError};

/// Largest dimension a lattice coordinate can carry.
pub const MAX_GRID_DIM: usize = 8;

/// Integer lattice coordinate of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GridCoord {
    coords: [i32; MAX_GRID_DIM],
    len: u8,
}

impl Hash for GridCoord {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for pair in self.as_slice().chunks(2) {
            let hi = pair.get(1).copied().unwrap_or(0) as u32 as u64;
            state.write_u64(((pair[0] as u32 as u64) << 32) | hi);
        }
    }
}

impl GridCoord {
    pub fn new(coords: &[i32]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_GRID_DIM,
            "lattice dimension must be in 1..={MAX_GRID_DIM}"
        );
        let mut c = [0; MAX_GRID_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Self {
            coords: c,
            len: coords.len() as u8,
        }
    }

    pub fn dim(&self) -> usize {
        self.len as usize
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.coords[..self.len as usize]
    }

    /// Neighbor shifted by `delta` cells along `axis`.
    pub fn shifted(&self, axis: usize, delta: i32) -> Option<GridCoord> {
        let mut out = *self;
        out.coords[axis] = self.coords[axis].checked_add(delta)?;
        Some(out)
    }
}

/// Lattice with cell `j` occupying `[anchor + j h, anchor + (j+1) h)` on every axis.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    anchor: Vec<f64>,
    h: f64,
}

impl GridSpec {
    pub fn new(anchor: Vec<f64>, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(SpmError::InvalidSpec(format!("cell side h must be positive, got {h}")));
        }
        if anchor.is_empty() || anchor.len() > MAX_GRID_DIM {
            return Err(SpmError::InvalidSpec(format!(
                "lattice dimension must be in 1..={MAX_GRID_DIM}, got {}",
                anchor.len()
            )));
        }
        if anchor.iter().any(|a| !a.is_finite()) {
            return Err(SpmError::InvalidSpec("lattice anchor must be finite".into()));
        }
        Ok(Self { anchor, h })
    }

    /// Same anchor value on every axis.
    pub fn uniform(dim: usize, anchor: f64, h: f64) -> Result<Self> {
        Self::new(vec![anchor; dim], h)
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn cell_measure(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    #[inline]
    pub fn axis_index(&self, axis: usize, x: f64) -> Result<i32> {
        let q = (x - self.anchor[axis]) / self.h;
        // Truncate and correct: avoids a libm floor call on baseline x86-64.
        if q >= i32::MIN as f64 && q < i32::MAX as f64 {
            let t = q as i64;
            Ok((t - ((t as f64) > q) as i64) as i32)
        } else {
            Err(SpmError::CoordinateOverflow { value: q.floor() })
        }
    }

    /// Cell containing `x` (right-open faces).
    #[inline]
    pub fn coord(&self, x: &[f64]) -> Result<GridCoord> {
        debug_assert_eq!(x.len(), self.dim());
        let mut c = [0i32; MAX_GRID_DIM];
        for (j, &xj) in x.iter().enumerate() {
            c[j] = self.axis_index(j, xj)?;
        }
        Ok(GridCoord {
            coords: c,
            len: x.len() as u8,
        })
    }

    pub fn lower_corner(&self, c: &GridCoord, out: &mut [f64]) {
        for (j, (o, &k)) in out.iter_mut().zip(c.as_slice()).enumerate() {
            *o = self.anchor[j] + k as f64 * self.h;
        }
    }

    pub fn center(&self, c: &GridCoord, out: &mut [f64]) {
        for (j, (o, &k)) in out.iter_mut().zip(c.as_slice()).enumerate() {
            *o = self.anchor[j] + (k as f64 + 0.5) * self.h;
        }
    }

    pub fn center_vec(&self, c: &GridCoord) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.center(c, &mut v);
        v
    }
}
