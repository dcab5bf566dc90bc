//! Closed-form solutions built from two heat kernels times a low-degree prefactor.
//!
//! u(x, t) = q(x₁, x₂) G(x, t) with G = (πa)^{−d/2} Σₖ βₖ exp(−|x − pₖ|²/a),
//! a = 1 + 4ct. Each Gaussian solves Gₜ = cΔG, so
//! uₜ − cΔu = −c(2∇q·∇G + G Δq).

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::Result;
use crate::problem::{EnvelopeScan, Field, GaussianMixture, InitialCondition, InitialSampler, Profile, DEFAULT_ACCEPTANCE_FLOOR};
use crate::special::integrate;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prefactor {
    /// x₁ + x₂
    Linear,
    /// x₁² + x₂²
    Quadratic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equation {
    /// uₜ = cΔu + u − u³ + r
    AllenCahn,
    /// uₜ = cΔu + ‖∇u‖² + r
    Hjb,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelPairSolution {
    pub dim: usize,
    pub c: f64,
    pub prefactor: Prefactor,
    pub equation: Equation,
    /// (β, first two coordinates of p); remaining coordinates of p are zero.
    pub terms: Vec<(f64, [f64; 2])>,
}

impl KernelPairSolution {
    pub fn allen_cahn(dim: usize, c: f64) -> Self {
        Self {
            dim,
            c,
            prefactor: Prefactor::Linear,
            equation: Equation::AllenCahn,
            terms: vec![(1.0, [2.0, 2.0]), (2.0, [-1.0, -1.0])],
        }
    }

    pub fn hjb(dim: usize, c: f64) -> Self {
        Self {
            dim,
            c,
            prefactor: Prefactor::Quadratic,
            equation: Equation::Hjb,
            terms: vec![(2.5, [0.0, 0.6]), (-1.0, [-1.0, 1.0])],
        }
    }

    fn a(&self, t: f64) -> f64 {
        1.0 + 4.0 * self.c * t
    }

    fn q(&self, x: &[f64]) -> f64 {
        match self.prefactor {
            Prefactor::Linear => x[0] + x[1],
            Prefactor::Quadratic => x[0] * x[0] + x[1] * x[1],
        }
    }

    fn grad_q(&self, x: &[f64]) -> [f64; 2] {
        match self.prefactor {
            Prefactor::Linear => [1.0, 1.0],
            Prefactor::Quadratic => [2.0 * x[0], 2.0 * x[1]],
        }
    }

    fn lap_q(&self) -> f64 {
        match self.prefactor {
            Prefactor::Linear => 0.0,
            Prefactor::Quadratic => 4.0,
        }
    }

    /// β exp(−|x−p|²/a) per term, without the (πa)^{−d/2} factor.
    fn kernels<'a>(&'a self, x: &'a [f64], a: f64) -> impl Iterator<Item = (f64, [f64; 2])> + 'a {
        let rest: f64 = x[2..].iter().map(|v| v * v).sum();
        self.terms.iter().map(move |(beta, p)| {
            let r2 = (x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2) + rest;
            (beta * (-r2 / a).exp(), *p)
        })
    }

    fn norm(&self, a: f64) -> f64 {
        (PI * a).powf(-0.5 * self.dim as f64)
    }

    /// G and its gradient (G, ∇G), gradient written into `grad`.
    fn g_and_grad(&self, x: &[f64], t: f64, grad: &mut [f64]) -> f64 {
        let a = self.a(t);
        let k = self.norm(a);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut g = 0.0;
        for (e, p) in self.kernels(x, a) {
            g += e;
            for (j, gj) in grad.iter_mut().enumerate() {
                let pj = if j < 2 { p[j] } else { 0.0 };
                *gj += e * (-2.0 * (x[j] - pj) / a);
            }
        }
        grad.iter_mut().for_each(|v| *v *= k);
        g * k
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        let a = self.a(t);
        self.q(x) * self.norm(a) * self.kernels(x, a).map(|(e, _)| e).sum::<f64>()
    }

    pub fn gradient(&self, x: &[f64], t: f64, out: &mut [f64]) {
        let g = self.g_and_grad(x, t, out);
        let q = self.q(x);
        let gq = self.grad_q(x);
        for (j, o) in out.iter_mut().enumerate() {
            *o *= q;
            if j < 2 {
                *o += g * gq[j];
            }
        }
    }

    /// r such that u solves the equation exactly.
    pub fn forcing(&self, x: &[f64], t: f64) -> f64 {
        let mut dg = vec![0.0; x.len()];
        let g = self.g_and_grad(x, t, &mut dg);
        let gq = self.grad_q(x);
        let linear = -self.c * (2.0 * (gq[0] * dg[0] + gq[1] * dg[1]) + g * self.lap_q());
        let u = self.q(x) * g;
        match self.equation {
            Equation::AllenCahn => linear - (u - u * u * u),
            Equation::Hjb => {
                let mut du = vec![0.0; x.len()];
                self.gradient(x, t, &mut du);
                linear - du.iter().map(|v| v * v).sum::<f64>()
            }
        }
    }

    /// ∫ u dx₂…dx_d as a function of x₁.
    pub fn projection_1d(&self, x1: f64, t: f64) -> f64 {
        let a = self.a(t);
        let k = (PI * a).powf(-0.5);
        self.terms
            .iter()
            .map(|(beta, p)| {
                let e = beta * k * (-(x1 - p[0]).powi(2) / a).exp();
                // E[q] over x₂ ~ N(p₂, a/2)
                let m = match self.prefactor {
                    Prefactor::Linear => x1 + p[1],
                    Prefactor::Quadratic => x1 * x1 + p[1] * p[1] + 0.5 * a,
                };
                e * m
            })
            .sum()
    }

    /// ∫ u dx₃…dx_d as a function of (x₁, x₂).
    pub fn projection_2d(&self, x1: f64, x2: f64, t: f64) -> f64 {
        let a = self.a(t);
        let q = self.q(&[x1, x2]);
        q / (PI * a)
            * self
                .terms
                .iter()
                .map(|(beta, p)| beta * (-((x1 - p[0]).powi(2) + (x2 - p[1]).powi(2)) / a).exp())
                .sum::<f64>()
    }

    /// ∫|u(·, 0)|. Coordinates beyond the second integrate out exactly.
    pub fn initial_mass(&self) -> Result<f64> {
        let inner = |x1: f64| -> Result<f64> {
            let (v, _) = integrate(|x2| self.projection_2d(x1, x2, 0.0).abs(), -12.0, 12.0, 1e-12, 1e-11, 2000)?;
            Ok(v)
        };
        let failure = RefCell::new(None);
        let (v, _) = integrate(
            |x1| match inner(x1) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            -12.0,
            12.0,
            1e-11,
            1e-10,
            2000,
        )?;
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// u(·, 0) with a two-component rejection proposal centered on the kernels.
    pub fn initial_condition(&self) -> Result<InitialCondition> {
        let me = self.clone();
        let value: Profile = Arc::new(move |x: &[f64]| me.value(x, 0.0));
        let means = self
            .terms
            .iter()
            .map(|(_, p)| {
                let mut m = vec![0.0; self.dim];
                m[0] = p[0];
                m[1] = p[1];
                m
            })
            .collect();
        let weights = self.terms.iter().map(|(b, _)| b.abs()).collect();
        let proposal = GaussianMixture::new(weights, means, vec![0.75f64.sqrt(); self.terms.len()])?;
        Ok(InitialCondition {
            value,
            sampler: InitialSampler::Rejection {
                proposal,
                scan: EnvelopeScan {
                    axes: vec![0, 1],
                    lo: -8.0,
                    hi: 8.0,
                    points: 801,
                    base: vec![0.0; self.dim],
                },
                mass: self.initial_mass()?,
                acceptance_floor: DEFAULT_ACCEPTANCE_FLOOR,
            },
        })
    }

    pub fn forcing_field(&self) -> Field {
        let me = self.clone();
        Arc::new(move |x: &[f64], t: f64| me.forcing(x, t))
    }
}
