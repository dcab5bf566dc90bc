//! Deterministic 1-D solver for uₜ = b uₓ + c uₓₓ + u − u³ on a periodic box.
//!
//! Strang splitting of the exact linear flow (spectral) and the exact
//! logistic-cubic flow u ↦ u eᵗ / √(1 + u²(e²ᵗ − 1)).

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::GriddedFunction1D;
use crate::error::{Result, SpmError};

#[derive(Clone, Debug)]
pub struct Reference1D {
    pub b: f64,
    pub c: f64,
    pub dt: f64,
    /// Largest |u| tolerated on the outermost nodes at any step.
    pub boundary_tol: f64,
    /// Relative round-off of one FFT round trip. u = 0 is unstable under
    /// u − u³, so the accumulated noise (≈ roundoff·√steps·eᵗ) sets a floor
    /// under `boundary_tol`.
    pub roundoff: f64,
    /// Extra cells on each side of the requested lattice for the first attempt.
    pub initial_pad: usize,
    pub max_retries: usize,
}

impl Reference1D {
    pub fn new(b: f64, c: f64, dt: f64) -> Self {
        Self {
            b,
            c,
            dt,
            boundary_tol: 1e-12,
            roundoff: 1e-14,
            initial_pad: 0,
            max_retries: 6,
        }
    }

    /// Solution at `t_final` sampled at the centers of `n` cells from `origin`.
    pub fn solve<F: Fn(f64) -> f64>(&self, u0: F, t_final: f64, origin: f64, h: f64, n: usize) -> Result<GriddedFunction1D> {
        if !(self.dt > 0.0) || !(h > 0.0) || n == 0 || !(t_final >= 0.0) || !(self.c >= 0.0) {
            return Err(SpmError::InvalidSpec("reference solver parameters out of range".into()));
        }
        let mut pad = self.initial_pad.max(n / 2).max((10.0 / h).ceil() as usize);
        for _ in 0..=self.max_retries {
            if let Some(values) = self.attempt(&u0, t_final, origin, h, n, pad) {
                return Ok(GriddedFunction1D { origin, h, values });
            }
            pad = 2 * pad + n;
        }
        Err(SpmError::BoxTooSmall { retries: self.max_retries })
    }

    fn attempt<F: Fn(f64) -> f64>(&self, u0: &F, t_final: f64, origin: f64, h: f64, n: usize, pad: usize) -> Option<Vec<f64>> {
        let mut m = n + 2 * pad;
        if m % 2 == 1 {
            m += 1;
        }
        let start = origin - pad as f64 * h;
        let mut u: Vec<Complex64> = (0..m).map(|k| Complex64::new(u0(start + (k as f64 + 0.5) * h), 0.0)).collect();
        let edge = |u: &[Complex64]| u[0].re.abs().max(u[m - 1].re.abs());
        let peak = u.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        let limit = |s: usize, t: f64| self.boundary_tol.max(self.roundoff * peak * (s as f64).sqrt() * t.exp());
        if edge(&u) > self.boundary_tol {
            return None;
        }

        let steps = (t_final / self.dt).round().max(if t_final > 0.0 { 1.0 } else { 0.0 }) as usize;
        if steps == 0 {
            return Some(u[pad..pad + n].iter().map(|z| z.re).collect());
        }
        let dt = t_final / steps as f64;

        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let len = m as f64 * h;
        let symbol = |scale: f64| -> Vec<Complex64> {
            (0..m)
                .map(|j| {
                    let f = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
                    let k = 2.0 * PI * f / len;
                    // the Nyquist mode has no well-defined sign for the first derivative
                    let drift = if 2 * j == m { 0.0 } else { self.b * k };
                    Complex64::new(-self.c * k * k * scale, drift * scale).exp() / m as f64
                })
                .collect()
        };
        let half = symbol(0.5 * dt);
        let full = symbol(dt);
        let linear = |u: &mut [Complex64], mult: &[Complex64]| {
            fwd.process(u);
            u.iter_mut().zip(mult).for_each(|(z, w)| *z *= w);
            inv.process(u);
            u.iter_mut().for_each(|z| z.im = 0.0);
        };
        let e1 = dt.exp();
        let e2 = (2.0 * dt).exp() - 1.0;
        let reaction = |u: &mut [Complex64]| {
            for z in u.iter_mut() {
                let v = z.re;
                z.re = v * e1 / (1.0 + v * v * e2).sqrt();
            }
        };

        linear(&mut u, &half);
        for s in 0..steps {
            reaction(&mut u);
            linear(&mut u, if s + 1 == steps { &half } else { &full });
            if edge(&u) > limit(s + 1, (s + 1) as f64 * dt) {
                return None;
            }
        }
        Some(u[pad..pad + n].iter().map(|z| z.re).collect())
    }
}
