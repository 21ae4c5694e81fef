//! Explicit central-difference time stepping for the 1D VID system on `(0, L)`
//! with `u(0) = 0` and traction plus dissipation `s u̇` at `x = L`.

mod assemble;
mod material;
mod memory;
mod mesh;

pub use assemble::{assemble, DiscreteOperators};
pub use material::MaterialField1D;
pub use memory::{Backend, HistoryTerms, Memory};
pub use mesh::Mesh1D;

use serde::{Deserialize, Serialize};

use crate::energy::RawSample;
use crate::error::{Error, Result};

/// Largest admissible Courant safety factor.
pub const MAX_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Fixed time step; mutually exclusive with `cfl`.
    pub dt: Option<f64>,
    /// Courant safety factor; `dt = T / ceil(T / (cfl h / c_max))`.
    pub cfl: Option<f64>,
    pub t_end: f64,
    /// Boundary dissipation coefficient.
    pub s: f64,
    pub backend: Backend,
    /// Sampling stride in steps.
    pub stride: usize,
    pub probes: Vec<usize>,
    pub snapshot_stride: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: None,
            cfl: Some(0.5),
            t_end: 1.0,
            s: 0.0,
            backend: Backend::Dense,
            stride: 1,
            probes: Vec::new(),
            snapshot_stride: None,
        }
    }
}

/// Nodal initial displacement `f1` and velocity `f2`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
}

impl InitialData {
    pub fn from_fn(mesh: &Mesh1D, f1: impl Fn(f64) -> f64, f2: impl Fn(f64) -> f64) -> Self {
        let x = mesh.coordinates();
        Self {
            u0: x.iter().map(|&x| f1(x)).collect(),
            v0: x.iter().map(|&x| f2(x)).collect(),
        }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            u0: self.u0.iter().map(|v| lambda * v).collect(),
            v0: self.v0.iter().map(|v| lambda * v).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dt: f64,
    pub steps: usize,
    pub samples: Vec<RawSample>,
    pub snapshots: Vec<Snapshot>,
    pub final_u: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Time step and step count honouring the CFL bound `dt ≤ 0.9 h / c_max`.
pub fn time_step(mesh: &Mesh1D, material: &MaterialField1D, config: &SimConfig) -> Result<(f64, usize)> {
    let t_end = config.t_end;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Config(format!("t_end must be non-negative, got {t_end}")));
    }
    let limit = mesh.h() / material.max_speed();
    match (config.dt, config.cfl) {
        (Some(_), Some(_)) => Err(Error::Config("give either dt or cfl, not both".into())),
        (Some(dt), None) => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config(format!("dt must be positive, got {dt}")));
            }
            if dt > MAX_SAFETY * limit {
                return Err(Error::Cfl {
                    dt,
                    limit: MAX_SAFETY * limit,
                    suggested: 0.5 * limit,
                });
            }
            let ratio = t_end / dt;
            let steps = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
                ratio.round() as usize
            } else {
                ratio.ceil() as usize
            };
            Ok((dt, steps))
        }
        (None, cfl) => {
            let cfl = cfl.unwrap_or(0.5);
            if !(cfl > 0.0 && cfl <= MAX_SAFETY) {
                return Err(Error::Config(format!(
                    "cfl safety factor must lie in (0, {MAX_SAFETY}], got {cfl}"
                )));
            }
            let target = cfl * limit;
            if t_end == 0.0 {
                return Ok((target, 0));
            }
            let steps = (t_end / target).ceil() as usize;
            Ok((t_end / steps as f64, steps))
        }
    }
}

/// Advances the system to `t_end`, sampling the raw energy integrals every
/// `stride` steps and at the final step.
pub fn run(
    mesh: &Mesh1D,
    material: &MaterialField1D,
    config: &SimConfig,
    initial: &InitialData,
) -> Result<RunOutput> {
    let nodes = mesh.nodes();
    let cells = mesh.cells();
    if initial.u0.len() != nodes || initial.v0.len() != nodes {
        return Err(Error::Config(format!(
            "initial data must have {nodes} nodal values (got {} and {})",
            initial.u0.len(),
            initial.v0.len()
        )));
    }
    if initial.u0[0] != 0.0 {
        return Err(Error::Config(format!(
            "initial displacement must vanish at x = 0, got {}",
            initial.u0[0]
        )));
    }
    if !(config.s >= 0.0 && config.s.is_finite()) {
        return Err(Error::Config(format!("dissipation s must be non-negative, got {}", config.s)));
    }
    if config.stride == 0 {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    if let Some(p) = config.probes.iter().find(|&&p| p >= nodes) {
        return Err(Error::Config(format!("probe node {p} is outside 0..={cells}")));
    }
    if config.snapshot_stride == Some(0) {
        return Err(Error::Config("snapshot stride must be at least 1".into()));
    }
    if initial.u0.iter().chain(&initial.v0).any(|v| !v.is_finite()) {
        return Err(Error::Config("initial data must be finite".into()));
    }

    let (dt, steps) = time_step(mesh, material, config)?;
    let ops = assemble(mesh, material)?;
    let kernel = material.scalar_kernel();
    let scale = material.kernel_scale();
    let s = config.s;
    let h = ops.h;
    let mut warnings = Vec::new();
    if !material.unit_density() {
        warnings.push("density is not identically 1; energy monitors use the rho-weighted kinetic term".into());
    }

    let mut u = initial.u0.clone();
    let mut v0 = initial.v0.clone();
    v0[0] = 0.0;
    let mut eps = vec![0.0; cells];
    ops.strain(&u, &mut eps);
    let eps0 = eps.clone();
    let mut memory = Memory::new(kernel, scale, dt, steps, config.backend, &eps)?;

    let mut sigma_mem = vec![0.0; cells];
    let mut stress = vec![0.0; cells];
    let mut force = vec![0.0; nodes];
    let compute_force = |eps: &[f64], sigma_mem: &[f64], stress: &mut [f64], force: &mut [f64]| {
        for c in 0..cells {
            stress[c] = ops.c[c] * eps[c] - sigma_mem[c];
        }
        ops.divergence(stress, force);
    };

    // Taylor ghost step u^{-1} = u0 - dt v0 + dt²/2 a0.
    compute_force(&eps, &sigma_mem, &mut stress, &mut force);
    let mut u_prev = vec![0.0; nodes];
    for i in 1..nodes {
        let mut f = force[i];
        if i == cells {
            f -= s * v0[i];
        }
        let a0 = f / ops.mass[i];
        u_prev[i] = u[i] - dt * v0[i] + 0.5 * dt * dt * a0;
    }

    let mut u_next = vec![0.0; nodes];
    let mut vel = vec![0.0; nodes];
    let mut acc = vec![0.0; nodes];
    let mut epsdot = vec![0.0; cells];
    let mut epsddot = vec![0.0; cells];
    let mut samples = Vec::new();
    let mut snapshots = Vec::new();
    let dt2 = dt * dt;
    let n_last = cells;
    let m_last = ops.mass[n_last];
    let g0 = kernel.g(0.0);

    for n in 0..=steps {
        let t = n as f64 * dt;
        memory.stress(&mut sigma_mem);
        compute_force(&eps, &sigma_mem, &mut stress, &mut force);

        u_next[0] = 0.0;
        for i in 1..n_last {
            u_next[i] = 2.0 * u[i] - u_prev[i] + dt2 * force[i] / ops.mass[i];
        }
        u_next[n_last] = (m_last * (2.0 * u[n_last] - u_prev[n_last]) / dt2
            + force[n_last]
            + s * u_prev[n_last] / (2.0 * dt))
            / (m_last / dt2 + s / (2.0 * dt));
        if !u_next.iter().all(|v| v.is_finite()) {
            return Err(Error::Instability { step: n + 1, t: t + dt });
        }

        let inv2dt = 0.5 / dt;
        for i in 0..nodes {
            vel[i] = (u_next[i] - u_prev[i]) * inv2dt;
        }
        acc[0] = 0.0;
        for i in 1..n_last {
            acc[i] = force[i] / ops.mass[i];
        }
        acc[n_last] = (force[n_last] - s * vel[n_last]) / m_last;
        ops.strain(&vel, &mut epsdot);
        memory.push_rate(&epsdot);

        let is_sample = n % config.stride == 0 || n == steps;
        if is_sample {
            ops.strain(&acc, &mut epsddot);
            let hist = memory.history_terms(&eps, &epsdot)?;
            let gt = kernel.g(t);
            let int_g = kernel.integral(t);
            let mut r = RawSample {
                t,
                u_l: u[n_last],
                v_l: vel[n_last],
                a_l: acc[n_last],
                probes: config.probes.iter().map(|&p| u[p]).collect(),
                ..RawSample::default()
            };
            for i in 1..nodes {
                let m = ops.mass[i];
                let vm = (u_next[i] - u[i]) / dt;
                let vp = (u[i] - u_prev[i]) / dt;
                r.kinetic += 0.5 * m * vm * vp;
                r.v2 += m * vel[i] * vel[i];
                r.accel2 += m * acc[i] * acc[i];
                r.u_v += m * u[i] * vel[i];
                r.a_v += m * acc[i] * vel[i];
            }
            for c in 0..cells {
                let (e, ed, k, cc) = (eps[c], epsdot[c], scale[c], ops.c[c]);
                r.eps2 += h * e * e;
                r.epsdot2 += h * ed * ed;
                r.c_eps2 += h * cc * e * e;
                r.c_epsdot2 += h * cc * ed * ed;
                r.c_eps_epsdot += h * cc * e * ed;
                r.intg_eps2 += h * k * int_g * e * e;
                r.intg_epsdot2 += h * k * int_g * ed * ed;
                r.g_eps2 += h * k * gt * e * e;
                r.g_epsdot2 += h * k * gt * ed * ed;
                r.g0_eps_epsdot += h * k * g0 * e * ed;
                r.g_eps0_epsdot += h * k * gt * eps0[c] * ed;
                r.g_eps0_epsddot += h * k * gt * eps0[c] * epsddot[c];
                r.sigma_eps += h * sigma_mem[c] * e;
                r.sigma_epsdot += h * sigma_mem[c] * ed;
                r.convgd_epsdot += h * hist.conv_gdot[c] * ed;
                r.box_g_u += h * hist.box_g_u[c];
                r.box_gd_u += h * hist.box_gdot_u[c];
                r.box_g_v += h * hist.box_g_v[c];
                r.box_gd_v += h * hist.box_gdot_v[c];
            }
            samples.push(r);
        }
        if let Some(ss) = config.snapshot_stride {
            if n % ss == 0 || n == steps {
                snapshots.push(Snapshot { t, u: u.clone() });
            }
        }
        if n == steps {
            break;
        }

        std::mem::swap(&mut u_prev, &mut u);
        std::mem::swap(&mut u, &mut u_next);
        ops.strain(&u, &mut eps);
        memory.advance(&eps);
    }

    Ok(RunOutput {
        dt,
        steps,
        samples,
        snapshots,
        final_u: u,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{KernelSpec, PronyKernel};

    fn elastic(mesh: &Mesh1D) -> MaterialField1D {
        MaterialField1D::uniform(mesh, 1.0, 1.0, KernelSpec::Prony(PronyKernel::empty(1).unwrap())).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let mesh = Mesh1D::new(1.0, 8).unwrap();
        let mat = MaterialField1D::uniform(
            &mesh,
            1.0,
            3.0,
            KernelSpec::Prony(PronyKernel::scalar(&[(4.0, 2.0)]).unwrap()),
        )
        .unwrap();
        let cfg = SimConfig { t_end: 1.0, s: 0.5, ..SimConfig::default() };
        let out = run(&mesh, &mat, &cfg, &InitialData::from_fn(&mesh, |_| 0.0, |_| 0.0)).unwrap();
        assert!(out.final_u.iter().all(|&v| v == 0.0));
        assert!(out.samples.iter().all(|s| s.kinetic == 0.0 && s.box_g_u == 0.0));
    }

    #[test]
    fn zero_end_time_gives_single_sample() {
        let mesh = Mesh1D::new(1.0, 8).unwrap();
        let cfg = SimConfig { t_end: 0.0, ..SimConfig::default() };
        let init = InitialData::from_fn(&mesh, |x| x, |_| 0.0);
        let out = run(&mesh, &elastic(&mesh), &cfg, &init).unwrap();
        assert_eq!(out.samples.len(), 1);
        assert_eq!(out.samples[0].t, 0.0);
    }

    #[test]
    fn cfl_violation_suggests_step() {
        let mesh = Mesh1D::new(1.0, 10).unwrap();
        let cfg = SimConfig { dt: Some(0.2), cfl: None, ..SimConfig::default() };
        match time_step(&mesh, &elastic(&mesh), &cfg) {
            Err(Error::Cfl { suggested, limit, .. }) => {
                assert!(suggested < limit && suggested > 0.0);
            }
            other => panic!("expected CFL error, got {other:?}"),
        }
    }

    #[test]
    fn nonzero_dirichlet_value_is_rejected() {
        let mesh = Mesh1D::new(1.0, 8).unwrap();
        let init = InitialData::from_fn(&mesh, |x| 1.0 + x, |_| 0.0);
        assert!(matches!(
            run(&mesh, &elastic(&mesh), &SimConfig::default(), &init),
            Err(Error::Config(_))
        ));
    }
}
