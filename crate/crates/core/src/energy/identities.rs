//! Discrete checks of the energy identities.
//!
//! Each check compares a central difference of a sampled functional with the
//! right-hand side assembled from the same samples.

use serde::Serialize;

use super::RawSample;
use crate::error::{Error, Result};
use crate::kernels::ScalarKernel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    /// Number of interior points compared.
    pub points: usize,
    pub max_residual: f64,
    /// Largest `|lhs|` or `|rhs|` seen, for relative readings.
    pub scale: f64,
    /// Time of the largest residual.
    pub worst_t: f64,
}

impl IdentityReport {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.max_residual / self.scale
        } else {
            self.max_residual
        }
    }
}

/// `log₂(r_i / r_{i+1})` for a refinement sequence of residuals.
pub fn observed_orders(residuals: &[f64]) -> Vec<f64> {
    residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn compare(
    name: &str,
    raw: &[RawSample],
    quantity: impl Fn(&RawSample) -> f64,
    rhs: impl Fn(&RawSample) -> f64,
) -> Result<IdentityReport> {
    if raw.len() < 3 {
        return Err(Error::Validation(format!(
            "{name} check needs at least 3 samples, got {}",
            raw.len()
        )));
    }
    let step = raw[1].t - raw[0].t;
    for w in raw.windows(2) {
        if ((w[1].t - w[0].t) - step).abs() > 1e-9 * step.max(1e-300) {
            return Err(Error::Validation(format!(
                "{name} check needs uniformly spaced samples (last sample must fall on the stride)"
            )));
        }
    }
    let mut rep = IdentityReport {
        name: name.into(),
        points: raw.len() - 2,
        max_residual: 0.0,
        scale: 0.0,
        worst_t: raw[1].t,
    };
    for i in 1..raw.len() - 1 {
        let lhs = (quantity(&raw[i + 1]) - quantity(&raw[i - 1])) / (2.0 * step);
        let r = rhs(&raw[i]);
        let res = (lhs - r).abs();
        rep.scale = rep.scale.max(lhs.abs()).max(r.abs());
        if res > rep.max_residual {
            rep.max_residual = res;
            rep.worst_t = raw[i].t;
        }
    }
    Ok(rep)
}

/// `dE/dt = −½∫Gε² + ½∫Ġ□∂u − s|u̇(L)|²`.
pub fn check_identity_3_2(raw: &[RawSample], s: f64) -> Result<IdentityReport> {
    compare(
        "energy",
        raw,
        RawSample::energy,
        |r| -0.5 * r.g_eps2 + 0.5 * r.box_gd_u - s * r.v_l * r.v_l,
    )
}

/// `dE(t,u̇)/dt = −½∫Gε̇² + ½∫Ġ□∂u̇ + ∫G(t)ε(0)ε̈ − s|ü(L)|²`.
pub fn check_identity_3_3(raw: &[RawSample], s: f64) -> Result<IdentityReport> {
    compare(
        "energy_dot",
        raw,
        RawSample::energy_dot,
        |r| -0.5 * r.g_epsdot2 + 0.5 * r.box_gd_v + r.g_eps0_epsddot - s * r.a_l * r.a_l,
    )
}

/// `d/dt ∫u u̇ = ∫|u̇|² − ∫(C − ∫₀ᵗG)ε² − ∫(∫₀ᵗG(t−τ)(ε(t)−ε(τ))dτ)ε − s u̇(L)u(L)`.
pub fn check_identity_3_16(raw: &[RawSample], s: f64) -> Result<IdentityReport> {
    compare(
        "u_udot",
        raw,
        |r| r.u_v,
        |r| {
            let deviation = r.intg_eps2 - r.sigma_eps;
            r.v2 - (r.c_eps2 - r.intg_eps2) - deviation - s * r.v_l * r.u_l
        },
    )
}

/// Convolution identity for a prescribed field `v` on `(0, length)`.
///
/// `grad_v(x, t)` and `grad_vdot(x, t)` give `∂ₓv` and `∂ₓv̇`. The x-integrals
/// use the midpoint rule on `nx` cells, τ-integrals the trapezoidal rule with
/// step `dt`, and `d/dt` a central difference with the same step. The residual
/// is evaluated at `n_eval` equally spaced times in `(0, t_end]`.
#[allow(clippy::too_many_arguments)]
pub fn check_identity_3_1(
    kernel: &ScalarKernel,
    grad_v: &dyn Fn(f64, f64) -> f64,
    grad_vdot: &dyn Fn(f64, f64) -> f64,
    length: f64,
    nx: usize,
    t_end: f64,
    dt: f64,
    n_eval: usize,
) -> Result<IdentityReport> {
    if !(dt > 0.0 && t_end > dt && nx > 0 && n_eval > 0 && length > 0.0) {
        return Err(Error::Validation("convolution identity check is misconfigured".into()));
    }
    let n_max = (t_end / dt).round() as usize + 1;
    let g: Vec<f64> = (0..=n_max).map(|k| kernel.g(k as f64 * dt)).collect();
    let gd: Vec<f64> = (0..=n_max).map(|k| kernel.g_dot(k as f64 * dt)).collect();
    let eval_steps: Vec<usize> = (1..=n_eval)
        .map(|j| ((j as f64 / n_eval as f64) * (n_max - 1) as f64).round() as usize)
        .map(|n| n.max(1))
        .collect();
    let hx = length / nx as f64;

    let trap = |lag: &[f64], a: &[f64], n: usize, f: &dyn Fn(f64, f64) -> f64| -> f64 {
        let mut s = 0.0;
        for k in 0..=n {
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            s += w * lag[n - k] * f(a[n], a[k]);
        }
        s * dt
    };
    let conv = |_: f64, ak: f64| ak;
    let sq = |an: f64, ak: f64| (an - ak) * (an - ak);

    let mut lhs = vec![0.0; eval_steps.len()];
    let mut rhs = vec![0.0; eval_steps.len()];
    let mut hist = vec![0.0; n_max + 1];
    for i in 0..nx {
        let x = (i as f64 + 0.5) * hx;
        for (k, a) in hist.iter_mut().enumerate() {
            *a = grad_v(x, k as f64 * dt);
        }
        for (j, &n) in eval_steps.iter().enumerate() {
            let t = n as f64 * dt;
            let a_n = hist[n];
            lhs[j] += hx * trap(&g, &hist, n, &conv) * grad_vdot(x, t);
            let box_p = trap(&g, &hist, n + 1, &sq);
            let box_m = trap(&g, &hist, n - 1, &sq);
            let boxdot = trap(&gd, &hist, n, &sq);
            let amp = |m: usize| kernel.integral(m as f64 * dt) * hist[m] * hist[m];
            let d_box = (box_p - box_m) / (2.0 * dt);
            let d_amp = (amp(n + 1) - amp(n - 1)) / (2.0 * dt);
            rhs[j] += hx * (-0.5 * d_box + 0.5 * boxdot + 0.5 * d_amp - 0.5 * kernel.g(t) * a_n * a_n);
        }
    }
    let mut rep = IdentityReport {
        name: "convolution".into(),
        points: eval_steps.len(),
        max_residual: 0.0,
        scale: 0.0,
        worst_t: 0.0,
    };
    for (j, &n) in eval_steps.iter().enumerate() {
        let res = (lhs[j] - rhs[j]).abs();
        rep.scale = rep.scale.max(lhs[j].abs()).max(rhs[j].abs());
        if res >= rep.max_residual {
            rep.max_residual = res;
            rep.worst_t = n as f64 * dt;
        }
    }
    Ok(rep)
}
