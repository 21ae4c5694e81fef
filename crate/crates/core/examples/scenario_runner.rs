//! Runs every bundled scenario concurrently and prints the energy decay.

use vidlab::cli::run_parallel;
use vidlab::config::{ScenarioConfig, BUNDLED};

fn main() -> vidlab::Result<()> {
    let configs = BUNDLED
        .iter()
        .map(|(name, _)| ScenarioConfig::bundled(name))
        .collect::<vidlab::Result<Vec<_>>>()?;
    for result in run_parallel(&configs) {
        let (sc, res) = result?;
        let e = res.trace.column("E").unwrap();
        println!("{:>26}: E {:.4} -> {:.4e} over t = {}", sc.name, e[0], e[e.len() - 1], res.trace.times().last().unwrap());
    }
    Ok(())
}
