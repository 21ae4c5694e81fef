//! Discrete energy identities on a standard linear solid, under time-step halving.

use vidlab::config::ScenarioConfig;
use vidlab::energy::{check_identity_3_16, check_identity_3_2, check_identity_3_3, observed_orders};
use vidlab::solver::run;

fn main() -> vidlab::Result<()> {
    let mut residuals = vec![Vec::new(); 3];
    for k in 0..3 {
        let mut cfg = ScenarioConfig::bundled("sls_unit")?;
        cfg.mesh.cells = 50;
        cfg.sim.dt = Some(4e-3 / 2f64.powi(k));
        cfg.sim.cfl = None;
        cfg.sim.t_end = 2.0;
        cfg.sim.stride = 1;
        let sc = cfg.build()?;
        let out = run(&sc.mesh, &sc.material, &sc.sim, &sc.initial)?;
        for (slot, rep) in residuals.iter_mut().zip([
            check_identity_3_2(&out.samples, sc.sim.s)?,
            check_identity_3_3(&out.samples, sc.sim.s)?,
            check_identity_3_16(&out.samples, sc.sim.s)?,
        ]) {
            slot.push(rep.max_residual);
        }
    }
    for (name, r) in ["dE/dt", "dE(u_t)/dt", "d(u,u_t)/dt"].iter().zip(&residuals) {
        let shown: Vec<String> = r.iter().map(|v| format!("{v:.2e}")).collect();
        println!("{name:>12}: residuals [{}], orders {:.2?}", shown.join(", "), observed_orders(r));
    }
    Ok(())
}
