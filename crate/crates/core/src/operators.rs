//! Particle motion realizing the adjoint linear semigroup in expectation:
//! drift, Brownian diffusion and the compound-Gaussian walk for the
//! fractional Laplacian.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SpmError};
use crate::rng::StreamRng;
use crate::special::gamma;

/// Default guard on jumps per step.
pub const DEFAULT_JUMP_CAP: u64 = 1_000_000;

/// Fractional order α with cut-off ε; the two derived constants are
/// recomputed on every access.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionalParams {
    alpha: f64,
    epsilon: f64,
}

impl FractionalParams {
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(SpmError::InvalidSpec(format!("fractional order must lie in (0,2), got {alpha}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(SpmError::InvalidSpec(format!("cut-off must be positive, got {epsilon}")));
        }
        Ok(Self { alpha, epsilon })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn abs_gamma(&self) -> f64 {
        let half = 0.5 * self.alpha;
        (gamma(1.0 - half) / half).abs()
    }

    /// Local diffusion coefficient of the truncated small-jump part.
    pub fn c_coeff(&self) -> f64 {
        let half = 0.5 * self.alpha;
        self.epsilon.powf(1.0 - half) / ((1.0 - half) * self.abs_gamma())
    }

    /// Jump rate of the large-jump part.
    pub fn gamma_coeff(&self) -> f64 {
        let half = 0.5 * self.alpha;
        self.epsilon.powf(-half) / (half * self.abs_gamma())
    }
}

/// x ← x − bτ.
#[inline]
pub fn advect(x: &mut [f64], b: &[f64], tau: f64) {
    for (xi, bi) in x.iter_mut().zip(b) {
        *xi -= bi * tau;
    }
}

/// x ← x − y with y ~ N(0, 2cτ I).
#[inline]
pub fn diffuse(x: &mut [f64], c: f64, tau: f64, rng: &mut StreamRng) {
    gaussian_kick(x, 2.0 * c * tau, rng);
}

#[inline]
fn gaussian_kick(x: &mut [f64], variance: f64, rng: &mut StreamRng) {
    if variance <= 0.0 {
        return;
    }
    let s = variance.sqrt();
    for xi in x.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *xi -= s * z;
    }
}

/// Uniform variate on (0, 1].
#[inline]
fn open_unit(rng: &mut StreamRng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Inverse CDF of the exponential law with rate `gamma`.
#[inline]
pub fn exponential_from_uniform(u: f64, gamma: f64) -> f64 {
    -u.ln() / gamma
}

/// Inverse CDF of the Pareto law with density ∝ s^{−1−α/2} on [ε, ∞).
#[inline]
pub fn powerlaw_from_uniform(u: f64, alpha: f64, epsilon: f64) -> f64 {
    epsilon * u.powf(-2.0 / alpha)
}

pub fn sample_exponential_gap(gamma: f64, rng: &mut StreamRng) -> f64 {
    exponential_from_uniform(open_unit(rng), gamma)
}

pub fn sample_powerlaw_scale(alpha: f64, epsilon: f64, rng: &mut StreamRng) -> f64 {
    powerlaw_from_uniform(open_unit(rng), alpha, epsilon)
}

/// Total Gaussian variance scale S of one step of the walk, and the number of
/// completed jumps.
pub fn fractional_scale(params: &FractionalParams, tau: f64, cap: u64, rng: &mut StreamRng) -> Result<(f64, u64)> {
    let gamma = params.gamma_coeff();
    let mut elapsed = 0.0;
    let mut jumps = 0u64;
    let mut s = params.c_coeff() * tau;
    loop {
        elapsed += sample_exponential_gap(gamma, rng);
        if elapsed > tau {
            break;
        }
        s += sample_powerlaw_scale(params.alpha, params.epsilon, rng);
        jumps += 1;
        if jumps > cap {
            return Err(SpmError::JumpCapExceeded { cap });
        }
    }
    Ok((s, jumps))
}

/// One step of the fractional walk: x ← x − y, y ~ N(0, 2S I). Returns the jump count.
pub fn fractional_jump(
    x: &mut [f64],
    params: &FractionalParams,
    tau: f64,
    cap: u64,
    rng: &mut StreamRng,
) -> Result<u64> {
    let (s, jumps) = fractional_scale(params, tau, cap, rng)?;
    gaussian_kick(x, 2.0 * s, rng);
    Ok(jumps)
}

/// The full linear motion of one time step.
#[derive(Clone, Debug, PartialEq)]
pub struct Motion {
    pub advection: Option<Vec<f64>>,
    pub diffusion: f64,
    pub fractional: Option<FractionalParams>,
    pub jump_cap: u64,
}

impl Motion {
    /// Advection, then diffusion, then the fractional walk. Returns the jump count.
    #[inline]
    pub fn apply(&self, x: &mut [f64], tau: f64, rng: &mut StreamRng) -> Result<u64> {
        if let Some(b) = &self.advection {
            advect(x, b, tau);
        }
        diffuse(x, self.diffusion, tau, rng);
        match &self.fractional {
            Some(p) => fractional_jump(x, p, tau, self.jump_cap, rng),
            None => Ok(0),
        }
    }

    /// Distributionally identical to [`Motion::apply`] but draws a single
    /// Gaussian of variance 2(cτ + S); halves the normal draws in high d.
    #[inline]
    pub fn apply_fused(&self, x: &mut [f64], tau: f64, rng: &mut StreamRng) -> Result<u64> {
        if let Some(b) = &self.advection {
            advect(x, b, tau);
        }
        let (s, jumps) = match &self.fractional {
            Some(p) => fractional_scale(p, tau, self.jump_cap, rng)?,
            None => (0.0, 0),
        };
        gaussian_kick(x, 2.0 * (self.diffusion * tau + s), rng);
        Ok(jumps)
    }

    pub fn is_stochastic(&self) -> bool {
        self.diffusion > 0.0 || self.fractional.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn advect_examples() {
        let mut x = [1.0, 2.0];
        advect(&mut x, &[1.0, 1.0], 0.1);
        assert_eq!(x, [0.9, 1.9]);
        let mut y = [1.0, 2.0];
        advect(&mut y, &[1.0, 1.0], 0.0);
        assert_eq!(y, [1.0, 2.0]);
        let mut z = [0.5, -3.0];
        advect(&mut z, &[2.0, 4.0], 0.25);
        advect(&mut z, &[-2.0, -4.0], 0.25);
        assert_eq!(z, [0.5, -3.0]);
    }

    #[test]
    fn zero_diffusion_is_identity() {
        let mut rng = RngStream::new(1, 0).rng();
        let mut x = [0.3, -1.2];
        diffuse(&mut x, 0.0, 0.5, &mut rng);
        assert_eq!(x, [0.3, -1.2]);
    }

    #[test]
    fn diffusion_covariance() {
        let mut rng = RngStream::new(2, 0).rng();
        let n = 1_000_000;
        let (mut s0, mut s1, mut s01, mut m0, mut m1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let mut x = [0.0, 0.0];
            diffuse(&mut x, 1.0, 0.5, &mut rng);
            s0 += x[0] * x[0];
            s1 += x[1] * x[1];
            s01 += x[0] * x[1];
            m0 += x[0];
            m1 += x[1];
        }
        let n = n as f64;
        let v0 = s0 / n - (m0 / n).powi(2);
        let v1 = s1 / n - (m1 / n).powi(2);
        let cov = s01 / n - m0 * m1 / (n * n);
        assert!((v0 - 1.0).abs() < 0.005, "{v0}");
        assert!((v1 - 1.0).abs() < 0.005, "{v1}");
        assert!(cov.abs() < 0.005, "{cov}");
    }

    #[test]
    fn inverse_cdfs() {
        let g = 14.67;
        assert_eq!(exponential_from_uniform(0.5, g), std::f64::consts::LN_2 / g);
        let s = powerlaw_from_uniform(0.5, 1.5, 0.005);
        assert!((s - 0.005 * 2f64.powf(4.0 / 3.0)).abs() < 1e-15);
        assert!((s - 0.012_599).abs() < 1e-6);
        assert_eq!(powerlaw_from_uniform(1.0, 1.5, 0.005), 0.005);
    }

    // Numeric inversion of the Pareto CDF F(s) = 1 − (ε/s)^{α/2} by bisection.
    #[test]
    fn powerlaw_matches_numeric_cdf_inversion() {
        let (a, e): (f64, f64) = (1.5, 0.005);
        for &u in &[0.05, 0.3, 0.5, 0.9] {
            let target = 1.0 - u;
            let (mut lo, mut hi): (f64, f64) = (e, 1e6);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if 1.0 - (e / mid).powf(a / 2.0) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let s = powerlaw_from_uniform(u, a, e);
            assert!((s - lo).abs() < 1e-9 * s, "u={u}: {s} vs {lo}");
        }
    }

    #[test]
    fn exponential_moments() {
        let g = 14.67;
        let mut rng = RngStream::new(3, 0).rng();
        let n = 1_000_000;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_exponential_gap(g, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0 / g).abs() < 3.0 * (1.0 / g) / (n as f64).sqrt());
        draws.sort_by(f64::total_cmp);
        let median = draws[n / 2];
        // density at the median is g/2, so its s.e. is 1/(g√n)
        assert!((median - std::f64::consts::LN_2 / g).abs() < 3.0 / (g * (n as f64).sqrt()));
    }

    #[test]
    fn powerlaw_tail_probability() {
        let (a, e) = (1.5, 0.005);
        let mut rng = RngStream::new(4, 0).rng();
        let n = 1_000_000;
        let hits = (0..n).filter(|_| sample_powerlaw_scale(a, e, &mut rng) > 2.0 * e).count();
        let p = 2f64.powf(-0.75);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() < 3.0 * se);
        assert!((p - 0.5946).abs() < 1e-4);
    }

    // Γ(1/4) from its 16-digit value; Γ(−3/4) = Γ(1/4)/(−3/4).
    #[test]
    fn fractional_constants() {
        let p = FractionalParams::new(1.5, 0.005).unwrap();
        let g = 3.625_609_908_221_908 / 0.75;
        let eps: f64 = 0.005;
        let c = eps.powf(0.25) / (0.25 * g);
        let gam = eps.powf(-0.75) / (0.75 * g);
        assert!((p.c_coeff() - c).abs() < 1e-12 * c);
        assert!((p.gamma_coeff() - gam).abs() < 1e-12 * gam);
        assert!((p.gamma_coeff() - 14.67).abs() < 0.01);
        assert!((p.gamma_coeff() * 0.1 - 1.467).abs() < 1e-3);
        assert!(p.c_coeff() > 0.0 && p.gamma_coeff() > 0.0);
    }

    #[test]
    fn rejects_bad_fractional_params() {
        assert!(FractionalParams::new(2.0, 0.1).is_err());
        assert!(FractionalParams::new(0.0, 0.1).is_err());
        assert!(FractionalParams::new(1.0, 0.0).is_err());
    }

    #[test]
    fn mean_jump_count() {
        let p = FractionalParams::new(1.5, 0.005).unwrap();
        let tau = 0.1;
        let n = 100_000;
        let mut total = 0u64;
        for i in 0..n {
            let mut rng = RngStream::new(5, i).rng();
            total += fractional_scale(&p, tau, DEFAULT_JUMP_CAP, &mut rng).unwrap().1;
        }
        let lam = p.gamma_coeff() * tau;
        let mean = total as f64 / n as f64;
        assert!((mean - lam).abs() < 3.0 * (lam / n as f64).sqrt(), "{mean} vs {lam}");
    }

    #[test]
    fn zero_jump_variance_is_two_c_tau() {
        let p = FractionalParams::new(1.5, 0.005).unwrap();
        let tau = 0.1;
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..400_000u64 {
            let mut rng = RngStream::new(6, i).rng();
            let mut x = [0.0];
            if fractional_jump(&mut x, &p, tau, DEFAULT_JUMP_CAP, &mut rng).unwrap() == 0 {
                sum += x[0] * x[0];
                count += 1;
            }
        }
        let v = 2.0 * p.c_coeff() * tau;
        let est = sum / count as f64;
        // variance of the sample variance of a normal is 2v²/n
        assert!((est - v).abs() < 4.0 * v * (2.0 / count as f64).sqrt(), "{est} vs {v}");
    }

    #[test]
    fn jump_cap_aborts() {
        let p = FractionalParams::new(1.5, 1e-12).unwrap();
        let mut rng = RngStream::new(7, 0).rng();
        let r = fractional_scale(&p, 1.0, 10, &mut rng);
        assert!(matches!(r, Err(SpmError::JumpCapExceeded { cap: 10 })));
    }
}
