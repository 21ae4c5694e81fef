//! The comparison ODE against its closed-form bound, including the draws
//! where the closed form is too small.

use vidlab::decay::{lemma_sweep, poly_bound, verify_lemma_2_1, PolyBoundParams};

fn main() -> vidlab::Result<()> {
    let p = PolyBoundParams::new(1.0, 1.0, 1.0, 3.0)?;
    println!("bound(0) = {}", poly_bound(&p, 0.0));
    let c = verify_lemma_2_1(&p, 100.0, 1e-3)?;
    println!("y0=1 M2=1 M3=1 q=3: passed = {}, worst margin = {:.4}", c.passed, c.worst_margin);

    for c in lemma_sweep(2024, 20, 50.0)? {
        let p = c.params;
        println!(
            "y0={:6.3} M2={:6.3} M3={:6.3} q={:5.3}  margin {:+.3e} at t={:.3}  {}",
            p.y0,
            p.m2,
            p.m3,
            p.q,
            c.worst_margin,
            c.worst_t,
            if c.passed { "ok" } else { "VIOLATED" }
        );
    }
    Ok(())
}
