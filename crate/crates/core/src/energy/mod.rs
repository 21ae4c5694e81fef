//! Energy functionals along discrete trajectories.
//!
//! The solver records the raw spatial integrals of a sample in [`RawSample`];
//! everything here is an algebraic combination of those integrals.

mod identities;

pub use identities::{
    check_identity_3_1, check_identity_3_16, check_identity_3_2, check_identity_3_3,
    observed_orders, IdentityReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{validate, KernelSpec, ScalarKernel};
use crate::solver::MaterialField1D;
use crate::tensor::VoigtTensor;

/// Spatial integrals at one sample time. Nodal sums use the lumped mass, cell
/// sums the cell width; kernel scaling is included.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RawSample {
    pub t: f64,
    pub u_l: f64,
    pub v_l: f64,
    pub a_l: f64,
    pub probes: Vec<f64>,
    /// `½ v^{n+½}·M v^{n−½}`, the kinetic term conserved by leapfrog.
    pub kinetic: f64,
    /// `∫|u̇|²`.
    pub v2: f64,
    /// `∫|ü|²`.
    pub accel2: f64,
    /// `∫u u̇`.
    pub u_v: f64,
    /// `∫ü u̇`.
    pub a_v: f64,
    pub eps2: f64,
    pub epsdot2: f64,
    pub c_eps2: f64,
    pub c_epsdot2: f64,
    pub c_eps_epsdot: f64,
    /// `∫(∫₀ᵗG) ε²`.
    pub intg_eps2: f64,
    pub intg_epsdot2: f64,
    /// `∫G(t) ε²`.
    pub g_eps2: f64,
    pub g_epsdot2: f64,
    pub g0_eps_epsdot: f64,
    /// `∫G(t) ε(0) ε̇(t)`.
    pub g_eps0_epsdot: f64,
    /// `∫G(t) ε(0) ε̈(t)`.
    pub g_eps0_epsddot: f64,
    /// `∫σ_mem ε` with `σ_mem = ∫₀ᵗ G(t−τ) ε(τ) dτ`.
    pub sigma_eps: f64,
    pub sigma_epsdot: f64,
    /// `∫(∫₀ᵗ Ġ(t−τ) ε(τ) dτ) ε̇`.
    pub convgd_epsdot: f64,
    pub box_g_u: f64,
    pub box_gd_u: f64,
    pub box_g_v: f64,
    pub box_gd_v: f64,
}

impl RawSample {
    /// `½ ∫(C − ∫₀ᵗG) ε²`.
    pub fn elastic(&self) -> f64 {
        0.5 * (self.c_eps2 - self.intg_eps2)
    }

    /// `E(t,u)`.
    pub fn energy(&self) -> f64 {
        self.kinetic + 0.5 * self.box_g_u + self.elastic()
    }

    /// `E(t,u̇)`.
    pub fn energy_dot(&self) -> f64 {
        0.5 * (self.accel2 + self.box_g_v + self.c_epsdot2 - self.intg_epsdot2)
    }

    /// `K(t,u)` with `F = γG + Ġ`.
    pub fn functional_k(&self, gamma: f64) -> f64 {
        0.5 * self.accel2 + 0.5 * self.c_epsdot2 - self.g0_eps_epsdot + gamma * self.c_eps_epsdot
            - (gamma * self.sigma_epsdot + self.convgd_epsdot)
    }

    /// `I(t,u)`; the `G(0)` terms combine into `−½∫G(t)ε²`.
    pub fn functional_i(&self) -> f64 {
        self.a_v - 0.5 * self.g_eps2 + 0.5 * self.box_gd_u
    }

    pub fn functional_b(&self, n3: f64) -> f64 {
        n3 * self.energy() + self.energy_dot() - self.g_eps0_epsdot
    }

    /// `R(t,u) = ∫|ü|² + |∇u|² + |∇u̇|²`.
    pub fn functional_r(&self) -> f64 {
        self.accel2 + self.eps2 + self.epsdot2
    }

    /// `M(t,u) = R + ∫G□∂u + ∫G□∂u̇`.
    pub fn functional_m(&self) -> f64 {
        self.functional_r() + self.box_g_u + self.box_g_v
    }

    /// Scales every quadratic field by `λ²` and the linear ones by `λ`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let q = lambda * lambda;
        Self {
            t: self.t,
            u_l: lambda * self.u_l,
            v_l: lambda * self.v_l,
            a_l: lambda * self.a_l,
            probes: self.probes.iter().map(|p| lambda * p).collect(),
            kinetic: q * self.kinetic,
            v2: q * self.v2,
            accel2: q * self.accel2,
            u_v: q * self.u_v,
            a_v: q * self.a_v,
            eps2: q * self.eps2,
            epsdot2: q * self.epsdot2,
            c_eps2: q * self.c_eps2,
            c_epsdot2: q * self.c_epsdot2,
            c_eps_epsdot: q * self.c_eps_epsdot,
            intg_eps2: q * self.intg_eps2,
            intg_epsdot2: q * self.intg_epsdot2,
            g_eps2: q * self.g_eps2,
            g_epsdot2: q * self.g_epsdot2,
            g0_eps_epsdot: q * self.g0_eps_epsdot,
            g_eps0_epsdot: q * self.g_eps0_epsdot,
            g_eps0_epsddot: q * self.g_eps0_epsddot,
            sigma_eps: q * self.sigma_eps,
            sigma_epsdot: q * self.sigma_epsdot,
            convgd_epsdot: q * self.convgd_epsdot,
            box_g_u: q * self.box_g_u,
            box_gd_u: q * self.box_gd_u,
            box_g_v: q * self.box_g_v,
            box_gd_v: q * self.box_gd_v,
        }
    }
}

/// Time weight of the `E(0)` term in `𝓛`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum WeightMode {
    /// `(1+t)^{-p}`.
    Polynomial { p: f64 },
    /// `e^{-κ̃₄ t}`.
    Exponential { kappa4_tilde: f64 },
}

impl WeightMode {
    pub fn weight(&self, t: f64) -> f64 {
        match *self {
            WeightMode::Polynomial { p } => (1.0 + t).powf(-p),
            WeightMode::Exponential { kappa4_tilde } => (-kappa4_tilde * t).exp(),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self, WeightMode::Polynomial { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorMode {
    Polynomial,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorParams {
    pub gamma: f64,
    pub theta: f64,
    pub omega: f64,
    pub n1: f64,
    pub n3: f64,
    pub delta: f64,
    pub c_hat_delta: f64,
    pub weight: WeightMode,
}

impl MonitorParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("theta", self.theta),
            ("omega", self.omega),
            ("delta", self.delta),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("monitor parameter {name} must be positive, got {v}")));
            }
        }
        if !(self.n1 >= 1.0 && self.n3 >= 1.0) {
            return Err(Error::Config("N1 and N3 must be at least 1".into()));
        }
        if !(self.c_hat_delta >= 0.0 && self.c_hat_delta.is_finite()) {
            return Err(Error::Config("c_hat_delta must be non-negative".into()));
        }
        Ok(())
    }

    /// `𝓛` (polynomial weight) or `𝓛_e` (exponential weight).
    pub fn functional_l(&self, raw: &RawSample, e0: f64) -> f64 {
        self.n1 * (raw.functional_b(self.n3) + 2.0 * self.c_hat_delta * self.weight.weight(raw.t) * e0)
            + raw.functional_k(self.gamma)
            + (self.gamma - self.theta) * raw.functional_i()
            + self.omega * raw.u_v
    }

    /// `M̃ = M + weight · E(0)`.
    pub fn functional_m_tilde(&self, raw: &RawSample, e0: f64) -> f64 {
        raw.functional_m() + self.weight.weight(raw.t) * e0
    }
}

/// Optional replacements for the default monitor parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<MonitorMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_hat_delta: Option<f64>,
    /// Poincaré constant `ĉ₅`; defaults to `(2L/π)²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c5: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa4_tilde: Option<f64>,
}

/// Weight mode implied by the kernel family, checked against a requested mode.
pub fn resolve_weight(kernel: &ScalarKernel, requested: Option<MonitorMode>, kappa4_tilde: Option<f64>) -> Result<WeightMode> {
    let natural = match kernel {
        ScalarKernel::Polynomial { p, .. } => WeightMode::Polynomial { p: *p },
        ScalarKernel::Prony(terms) => WeightMode::Exponential {
            kappa4_tilde: kappa4_tilde.unwrap_or_else(|| {
                terms.iter().map(|&(_, r)| r).reduce(f64::min).unwrap_or(1.0)
            }),
        },
    };
    match (requested, natural) {
        (None, w) => Ok(w),
        (Some(MonitorMode::Polynomial), w @ WeightMode::Polynomial { .. }) => Ok(w),
        (Some(MonitorMode::Exponential), w @ WeightMode::Exponential { .. }) => Ok(w),
        (Some(m), _) => Err(Error::Config(format!(
            "monitor mode {m:?} does not match the kernel family; polynomial kernels use the polynomial \
             functional and Prony kernels the exponential one"
        ))),
    }
}

/// Defaults: `θ = α₀/(4β₀)`, `γ = 2θ`, `ω = α₀/(4ĉ₅)`, `δ = α₀/8`,
/// `ĉ_δ = κ₄²/(2δα₀)`, `N₁ = N₃ = 16` before tuning.
pub fn default_params(material: &MaterialField1D, length: f64, overrides: &MonitorOverrides) -> Result<MonitorParams> {
    let bounds = material.instantaneous_bounds();
    let (alpha0, beta0) = (bounds.alpha0, bounds.beta0);
    let c5 = overrides.c5.unwrap_or((2.0 * length / std::f64::consts::PI).powi(2));
    let theta = overrides.theta.unwrap_or(alpha0 / (4.0 * beta0));
    let gamma = overrides.gamma.unwrap_or(2.0 * theta);
    let omega = overrides.omega.unwrap_or(alpha0 / (4.0 * c5));
    let delta = overrides.delta.unwrap_or(alpha0 / 8.0);
    let weight = resolve_weight(material.scalar_kernel(), overrides.mode, overrides.kappa4_tilde)?;
    let kappa4 = kernel_kappa4(material.kernel())? * material.kernel_scale().iter().cloned().fold(0.0, f64::max);
    let c_hat_delta = overrides
        .c_hat_delta
        .unwrap_or(kappa4 * kappa4 / (2.0 * delta * alpha0));
    let p = MonitorParams {
        gamma,
        theta,
        omega,
        n1: overrides.n1.unwrap_or(16.0),
        n3: overrides.n3.unwrap_or(16.0),
        delta,
        c_hat_delta,
        weight,
    };
    p.validate()?;
    Ok(p)
}

fn kernel_kappa4(kernel: &KernelSpec) -> Result<f64> {
    if kernel.is_empty() {
        return Ok(0.0);
    }
    // any positive modulus gives the same kernel constants
    let report = validate(&VoigtTensor::scalar(1.0), kernel)?;
    Ok(report.kappa4.unwrap_or(0.0))
}

/// One row of the trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySample {
    pub t: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "E_dot")]
    pub e_dot: f64,
    #[serde(rename = "boxG_u")]
    pub box_g_u: f64,
    #[serde(rename = "boxG_udot")]
    pub box_g_udot: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub u_l: f64,
    pub v_l: f64,
    pub probes: Vec<f64>,
}

impl EnergySample {
    pub const COLUMNS: [&'static str; 14] = [
        "t", "E", "E_dot", "boxG_u", "boxG_udot", "K", "I", "B", "L", "R", "kinetic", "elastic", "u_L",
        "v_L",
    ];

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![
            self.t,
            self.e,
            self.e_dot,
            self.box_g_u,
            self.box_g_udot,
            self.k,
            self.i,
            self.b,
            self.l,
            self.r,
            self.kinetic,
            self.elastic,
            self.u_l,
            self.v_l,
        ];
        v.extend(&self.probes);
        v
    }

    pub fn boundary_speed2(&self) -> f64 {
        self.v_l * self.v_l
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceMeta {
    pub params: MonitorParams,
    /// Whether N1/N3 came from the automatic doubling search.
    pub tuned: bool,
    /// Whether the sampled (B) conditions and `𝓛 > 0` held at the check times.
    pub conditions_met: bool,
    /// `min 𝓛/M̃` and `max 𝓛/M̃` over the samples.
    pub c5_tilde: f64,
    pub c6_tilde: f64,
    pub warnings: Vec<String>,
    /// Node indices of the probe columns.
    pub probes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyTrace {
    pub samples: Vec<EnergySample>,
    pub meta: TraceMeta,
}

impl EnergyTrace {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        if let Some(idx) = EnergySample::COLUMNS.iter().position(|c| *c == name) {
            return Some(self.samples.iter().map(|s| s.values()[idx]).collect());
        }
        let node: usize = name.strip_prefix("u_p")?.parse().ok()?;
        let k = self.meta.probes.iter().position(|&p| p == node)?;
        Some(self.samples.iter().map(|s| s.probes[k]).collect())
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }
}

/// Sample indices nearest to `0, T/4, T/2, 3T/4`.
fn check_indices(raw: &[RawSample]) -> Vec<usize> {
    let t_end = raw.last().map(|s| s.t).unwrap_or(0.0);
    let mut idx: Vec<usize> = [0.0, 0.25, 0.5, 0.75]
        .iter()
        .map(|f| {
            let target = f * t_end;
            (0..raw.len())
                .min_by(|&a, &b| {
                    (raw[a].t - target)
                        .abs()
                        .partial_cmp(&(raw[b].t - target).abs())
                        .expect("finite times")
                })
                .unwrap_or(0)
        })
        .collect();
    idx.dedup();
    idx
}

fn b_conditions(raw: &[RawSample], idx: &[usize], p: &MonitorParams) -> bool {
    let e0 = raw[0].energy();
    let ed0 = raw[0].energy_dot();
    let b0 = raw[0].functional_b(p.n3);
    let slack = 1e-12 * (p.n3 * e0 + ed0).abs().max(f64::MIN_POSITIVE);
    if !(0.5 * p.n3 * e0 + 0.5 * ed0 <= b0 + slack && b0 <= 2.0 * p.n3 * e0 + 2.0 * ed0 + slack) {
        return false;
    }
    idx.iter().all(|&i| {
        let r = &raw[i];
        0.5 * p.n3 * r.energy() + 0.5 * r.energy_dot()
            <= r.functional_b(p.n3) + p.c_hat_delta * p.weight.weight(r.t) * e0 + slack
    })
}

fn l_positive(raw: &[RawSample], idx: &[usize], p: &MonitorParams) -> bool {
    let e0 = raw[0].energy();
    if e0 == 0.0 && raw[0].energy_dot() == 0.0 {
        return true;
    }
    idx.iter().all(|&i| p.functional_l(&raw[i], e0) > 0.0)
}

/// Assembles the trace. Unless `fixed` is set, N₃ then N₁ are doubled from
/// their starting values (up to 2¹⁰) until the sampled (B) conditions and
/// `𝓛 > 0` hold at `t = 0, T/4, T/2, 3T/4`.
pub fn build_trace(raw: &[RawSample], mut params: MonitorParams, fixed: bool) -> Result<EnergyTrace> {
    params.validate()?;
    if raw.is_empty() {
        return Err(Error::Validation("no samples to assemble".into()));
    }
    let mut warnings = Vec::new();
    let idx = check_indices(raw);
    let mut conditions_met = b_conditions(raw, &idx, &params) && l_positive(raw, &idx, &params);
    if !fixed {
        const MAX_N: f64 = 1024.0;
        while !b_conditions(raw, &idx, &params) && params.n3 < MAX_N {
            params.n3 *= 2.0;
        }
        while !l_positive(raw, &idx, &params) && params.n1 < MAX_N {
            params.n1 *= 2.0;
        }
        conditions_met = b_conditions(raw, &idx, &params) && l_positive(raw, &idx, &params);
    }
    if !conditions_met {
        warnings.push(format!(
            "sampled (B) conditions or L > 0 fail with N1 = {}, N3 = {}",
            params.n1, params.n3
        ));
    }

    let e0 = raw[0].energy();
    let mut c5 = f64::INFINITY;
    let mut c6: f64 = 0.0;
    let samples = raw
        .iter()
        .map(|r| {
            let l = params.functional_l(r, e0);
            let mt = params.functional_m_tilde(r, e0);
            if mt > 0.0 {
                c5 = c5.min(l / mt);
                c6 = c6.max(l / mt);
            }
            EnergySample {
                t: r.t,
                e: r.energy(),
                e_dot: r.energy_dot(),
                box_g_u: r.box_g_u,
                box_g_udot: r.box_g_v,
                k: r.functional_k(params.gamma),
                i: r.functional_i(),
                b: r.functional_b(params.n3),
                l,
                r: r.functional_r(),
                kinetic: r.kinetic,
                elastic: r.elastic(),
                u_l: r.u_l,
                v_l: r.v_l,
                probes: r.probes.clone(),
            }
        })
        .collect();
    if !c5.is_finite() {
        c5 = 0.0;
    }
    Ok(EnergyTrace {
        samples,
        meta: TraceMeta {
            params,
            tuned: !fixed,
            conditions_met,
            c5_tilde: c5,
            c6_tilde: c6,
            warnings,
            probes: Vec::new(),
        },
    })
}

/// `∫₀ᵗ G(t−τ)(ε(t) − ε(τ))² dτ` by the trapezoidal rule over a uniformly
/// sampled history `ε(kΔt)`, `t = (len−1)Δt`.
pub fn box_product(history: &[f64], kernel: &ScalarKernel, dt: f64) -> Result<f64> {
    let Some((&en, _)) = history.split_last() else {
        return Err(Error::InsufficientHistory("empty strain history".into()));
    };
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("history step must be positive, got {dt}")));
    }
    let n = history.len() - 1;
    let mut s = 0.0;
    for (k, &e) in history.iter().enumerate() {
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        let d = en - e;
        s += w * kernel.g((n - k) as f64 * dt) * d * d;
    }
    Ok(s * dt)
}
