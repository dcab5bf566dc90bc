//! Radially symmetric fundamental solution of uₜ = cΔu − (−Δ)^{α/2}u in ℝᵈ.
//!
//! g̃(y, t) = y^{−ν} ∫₀^∞ (r/2π)^{d/2} J_ν(yr) exp(−(cr² + r^α)t) dr, ν = (d−2)/2.

use std::f64::consts::PI;

use crate::error::{Result, SpmError};
use crate::special::{bessel_j, gamma, integrate};

/// Integrate `f` over `[0, r_max]` in panels no wider than `width`.
fn panel_integral<F: Fn(f64) -> f64>(f: F, r_max: f64, width: f64, abs_tol: f64) -> Result<f64> {
    let panels = (r_max / width).ceil().max(1.0);
    if panels > 1e6 {
        return Err(SpmError::QuadratureFailed { estimate: f64::NAN, tolerance: abs_tol });
    }
    let panels = panels as usize;
    let w = r_max / panels as f64;
    let per = abs_tol / panels as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for k in 0..panels {
        let (v, e) = integrate(&f, k as f64 * w, (k + 1) as f64 * w, per, 1e-12, 200)?;
        total += v;
        err += e;
    }
    if err > abs_tol {
        return Err(SpmError::QuadratureFailed { estimate: err, tolerance: abs_tol });
    }
    Ok(total)
}

/// Radius beyond which `env` is negligible relative to its peak.
fn truncation(env: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let dr = 0.02;
    let mut peak: f64 = 0.0;
    let mut r = dr;
    while r < 1e4 {
        let v = env(r);
        peak = peak.max(v);
        if peak > 0.0 && v < 1e-18 * peak && r > 1.0 {
            return Ok((r, peak));
        }
        r += dr * (1.0 + r / 10.0);
    }
    Err(SpmError::QuadratureFailed { estimate: f64::INFINITY, tolerance: 0.0 })
}

fn check(t: f64, c: f64, alpha: f64) -> Result<()> {
    if !(t > 0.0) || !(c >= 0.0) || !(alpha > 0.0) {
        return Err(SpmError::InvalidSpec("radial integral needs t > 0, c ≥ 0, α > 0".into()));
    }
    Ok(())
}

/// g̃(y, t) for d ≥ 2.
pub fn radial_reference(y: f64, t: f64, c: f64, alpha: f64, d: usize) -> Result<f64> {
    check(t, c, alpha)?;
    if d < 2 || !(y >= 0.0) {
        return Err(SpmError::InvalidSpec("radial integral needs d ≥ 2 and y ≥ 0".into()));
    }
    let nu = 0.5 * (d as f64 - 2.0);
    let half_d = 0.5 * d as f64;
    let decay = |r: f64| (-(c * r * r + r.powf(alpha)) * t).exp();
    let small = 1.0 / gamma(nu + 1.0);
    // |J_ν(z)| ≤ (z/2)^ν / Γ(ν+1) for ν ≥ −1/2
    let env = |r: f64| (r / (2.0 * PI)).powf(half_d) * (0.5 * r).powf(nu) * small * decay(r);
    let (r_max, peak) = truncation(env)?;
    let integrand = |r: f64| {
        let kernel = if y == 0.0 { (0.5 * r).powf(nu) * small } else { bessel_j(nu, y * r) / y.powf(nu) };
        (r / (2.0 * PI)).powf(half_d) * kernel * decay(r)
    };
    let width = if y > 0.0 { (PI / y).min(r_max / 8.0) } else { r_max / 8.0 };
    panel_integral(integrand, r_max, width, 1e-12 * peak * r_max)
}

/// ∫_{|x|<Y} g dx for d = 2, via Y ∫₀^∞ J₁(Yr) exp(−(cr² + r^α)t) dr.
pub fn mass_within(y_max: f64, t: f64, c: f64, alpha: f64) -> Result<f64> {
    check(t, c, alpha)?;
    let decay = |r: f64| (-(c * r * r + r.powf(alpha)) * t).exp();
    let (r_max, _) = truncation(decay)?;
    let width = (PI / y_max).min(r_max / 8.0);
    panel_integral(|r| y_max * bessel_j(1.0, y_max * r) * decay(r), r_max, width, 1e-12 * y_max * r_max)
}

/// Leading-order mass of the α-stable tail outside radius Y in d = 2.
pub fn stable_tail_mass(y_max: f64, t: f64, alpha: f64) -> f64 {
    let d = 2.0;
    let coeff = alpha * 2f64.powf(alpha - 1.0) * gamma(0.5 * (d + alpha)) / (PI.powf(0.5 * d) * gamma(1.0 - 0.5 * alpha));
    t * coeff * 2.0 * PI * y_max.powf(-alpha) / alpha
}
