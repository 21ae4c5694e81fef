//! Polynomially decaying kernel: power-law energy decay.

use vidlab::config::ScenarioConfig;
use vidlab::decay::{fit_decay, pm_for, DecayModel};

fn main() -> vidlab::Result<()> {
    let scenario = ScenarioConfig::bundled("poly_p3")?.build()?;
    let res = scenario.run()?;
    let t = res.trace.times();
    let e = res.trace.column("E").unwrap();
    let fit = fit_decay(&t, &e, DecayModel::Power, None)?;
    let (m, pm) = pm_for(3.0)?;
    println!("samples = {}, E(0) = {:.4}, E(T) = {:.4e}", t.len(), e[0], e[e.len() - 1]);
    println!("fitted exponent on [{}, {}] = {:.3} (r2 = {:.4})", fit.t_lo, fit.t_hi, fit.parameter, fit.r_squared);
    println!("guaranteed exponent -p_m = -{pm} (m = {m})");
    Ok(())
}
