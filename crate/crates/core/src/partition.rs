//! Axis-aligned load-balancing bisection on the first two coordinates.

use std::collections::VecDeque;

use crate::ensemble::ParticleEnsemble;
use crate::error::{Result, SpmError};

/// Particle counts over the first two coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram2D {
    pub origin: [f64; 2],
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `counts[i * ny + j]`.
    pub counts: Vec<u64>,
}

impl Histogram2D {
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.ny + j]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Inclusive prefix table with a zero border, shape (nx+1)×(ny+1).
    fn prefix(&self) -> Vec<u64> {
        let w = self.ny + 1;
        let mut p = vec![0u64; (self.nx + 1) * w];
        for i in 0..self.nx {
            for j in 0..self.ny {
                p[(i + 1) * w + j + 1] = self.get(i, j) + p[i * w + j + 1] + p[(i + 1) * w + j] - p[i * w + j];
            }
        }
        p
    }
}

/// Smallest lattice-aligned box on the first two axes containing `[lo, hi]`.
pub fn aligned_box(lo: [f64; 2], hi: [f64; 2], anchor: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    let mut a = [0.0; 2];
    let mut b = [0.0; 2];
    for k in 0..2 {
        let i0 = ((lo[k] - anchor[k]) / h).floor();
        let mut i1 = ((hi[k] - anchor[k]) / h).floor() + 1.0;
        if i1 <= i0 {
            i1 = i0 + 1.0;
        }
        a[k] = anchor[k] + i0 * h;
        b[k] = anchor[k] + i1 * h;
    }
    (a, b)
}

pub fn build_histogram(ensemble: &ParticleEnsemble, lo: [f64; 2], hi: [f64; 2], h: f64) -> Result<Histogram2D> {
    if ensemble.dim() < 2 {
        return Err(SpmError::InvalidSpec("partitioning needs at least two coordinates".into()));
    }
    if !(h > 0.0) || !(hi[0] > lo[0]) || !(hi[1] > lo[1]) {
        return Err(SpmError::InvalidSpec("partition box is empty".into()));
    }
    let nx = ((hi[0] - lo[0]) / h).round().max(1.0) as usize;
    let ny = ((hi[1] - lo[1]) / h).round().max(1.0) as usize;
    let mut counts = vec![0u64; nx * ny];
    for (index, p) in ensemble.iter().enumerate() {
        let (x, y) = (p.location[0], p.location[1]);
        if !(x >= lo[0] && x <= hi[0] && y >= lo[1] && y <= hi[1]) {
            return Err(SpmError::ParticleOutsideBox { index });
        }
        let i = (((x - lo[0]) / h).floor() as usize).min(nx - 1);
        let j = (((y - lo[1]) / h).floor() as usize).min(ny - 1);
        counts[i * ny + j] += 1;
    }
    Ok(Histogram2D {
        origin: lo,
        h,
        nx,
        ny,
        counts,
    })
}

/// One block: histogram cell ranges `[i0, i1) × [j0, j1)` and their coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub cells: [(usize, usize); 2],
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxPartition {
    pub blocks: Vec<Block>,
}

impl BoxPartition {
    pub fn counts(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.count).collect()
    }

    /// Largest block count over the mean block count.
    pub fn imbalance(&self) -> f64 {
        let c = self.counts();
        let total: u64 = c.iter().sum();
        if total == 0 {
            return 1.0;
        }
        *c.iter().max().unwrap() as f64 * c.len() as f64 / total as f64
    }
}

fn block_count(p: &[u64], ny: usize, cells: [(usize, usize); 2]) -> u64 {
    let w = ny + 1;
    let [(i0, i1), (j0, j1)] = cells;
    p[i1 * w + j1] + p[i0 * w + j0] - p[i0 * w + j1] - p[i1 * w + j0]
}

fn make_block(hist: &Histogram2D, p: &[u64], cells: [(usize, usize); 2]) -> Block {
    let h = hist.h;
    Block {
        cells,
        lo: [hist.origin[0] + cells[0].0 as f64 * h, hist.origin[1] + cells[1].0 as f64 * h],
        hi: [hist.origin[0] + cells[0].1 as f64 * h, hist.origin[1] + cells[1].1 as f64 * h],
        count: block_count(p, hist.ny, cells),
    }
}

/// FIFO bisection into `nproc` blocks. Each split minimizes |L − R| over all
/// lattice planes on the two axes; ties go to the lower axis, then the lower plane.
pub fn split_domain(hist: &Histogram2D, nproc: usize) -> Result<BoxPartition> {
    if nproc == 0 || !nproc.is_power_of_two() {
        return Err(SpmError::InvalidSpec(format!("block count must be a power of two, got {nproc}")));
    }
    let p = hist.prefix();
    let mut queue = VecDeque::from([make_block(hist, &p, [(0, hist.nx), (0, hist.ny)])]);
    while queue.len() < nproc {
        let b = queue.pop_front().unwrap();
        let mut best: Option<(u64, [(usize, usize); 2], [(usize, usize); 2])> = None;
        for axis in 0..2 {
            let (a0, a1) = b.cells[axis];
            for cut in a0 + 1..a1 {
                let mut left = b.cells;
                let mut right = b.cells;
                left[axis] = (a0, cut);
                right[axis] = (cut, a1);
                let diff = block_count(&p, hist.ny, left).abs_diff(block_count(&p, hist.ny, right));
                if best.as_ref().is_none_or(|bst| diff < bst.0) {
                    best = Some((diff, left, right));
                }
            }
        }
        let (_, left, right) = best.ok_or(SpmError::PartitionTooCoarse {
            cells_x: b.cells[0].1 - b.cells[0].0,
            cells_y: b.cells[1].1 - b.cells[1].0,
        })?;
        queue.push_back(make_block(hist, &p, left));
        queue.push_back(make_block(hist, &p, right));
    }
    Ok(BoxPartition {
        blocks: queue.into_iter().collect(),
    })
}
