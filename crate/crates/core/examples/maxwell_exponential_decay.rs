//! Maxwell arm plus equilibrium spring: exponential energy decay at a rate
//! that does not depend on the initial data.

use vidlab::config::{Profile, ScenarioConfig};
use vidlab::decay::{fit_decay, DecayModel};

fn main() -> vidlab::Result<()> {
    let profiles = [
        ("sin(pi x/2)", Profile::QuarterSine { mode: 1, amplitude: 1.0 }),
        ("x - x^2/2", Profile::Poly { coefficients: vec![0.0, 1.0, -0.5] }),
        ("x^2", Profile::Poly { coefficients: vec![0.0, 0.0, 1.0] }),
    ];
    for (label, u0) in profiles {
        let mut cfg = ScenarioConfig::bundled("maxwell_spring")?;
        cfg.initial.u0 = u0;
        let res = cfg.build()?.run()?;
        let e = res.trace.column("E").unwrap();
        let fit = fit_decay(&res.trace.times(), &e, DecayModel::Exponential, None)?;
        println!(
            "{label:>12}: E(0) = {:.4}, E(T) = {:.3e}, rate = {:.4}, r2 = {:.5}",
            e[0],
            e[e.len() - 1],
            fit.parameter,
            fit.r_squared
        );
    }
    Ok(())
}
