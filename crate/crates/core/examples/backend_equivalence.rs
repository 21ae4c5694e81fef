//! Dense trapezoidal history against the exponential recursion.

use std::time::Instant;

use vidlab::config::ScenarioConfig;
use vidlab::solver::{run, Backend};

fn main() -> vidlab::Result<()> {
    let mut finals = Vec::new();
    for backend in [Backend::Dense, Backend::Prony] {
        let mut sc = ScenarioConfig::bundled("maxwell_spring")?.build()?;
        sc.sim.t_end = 1.5;
        sc.sim.backend = backend;
        let start = Instant::now();
        let out = run(&sc.mesh, &sc.material, &sc.sim, &sc.initial)?;
        println!("{backend:?}: {} steps in {:.2?}", out.steps, start.elapsed());
        finals.push(out.final_u);
    }
    let scale = finals[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = finals[0].iter().zip(&finals[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max relative difference in u(T): {:.2e}", diff / scale);
    Ok(())
}
