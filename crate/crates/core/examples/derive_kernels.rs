//! Reduces the spring-dashpot rheologies to instantaneous modulus plus Prony kernel.

use vidlab::kernels::{derive, validate, SpringDashpotSpec};

fn main() -> vidlab::Result<()> {
    let models = [
        ("maxwell", SpringDashpotSpec::Maxwell { cs: 2.0, eta: 1.0 }),
        ("sls", SpringDashpotSpec::Sls { c1: 1.0, c2: 1.0, eta2: 1.0 }),
        ("burgers", SpringDashpotSpec::Burgers { c1: 1.0, c2: 1.0, eta2: 1.0, eta3: 1.0 }),
        (
            "spring + burgers",
            SpringDashpotSpec::Extended(vec![
                SpringDashpotSpec::Spring { c: 1.0 },
                SpringDashpotSpec::Burgers { c1: 1.0, c2: 1.0, eta2: 1.0, eta3: 1.0 },
            ]),
        ),
    ];
    for (name, spec) in &models {
        let m = derive(spec)?;
        let report = validate(&m.instantaneous, &m.kernel_spec())?;
        println!("{name}: C = {:?}, C_eq = {:.6}", m.instantaneous.as_scalar(), m.equilibrium_modulus());
        for t in m.kernel.terms() {
            println!("    g = {:.6}  r = {:.6}", t.amplitude.as_scalar().unwrap(), t.rate);
        }
        for b in &m.burgers {
            println!("    r1 = {:.4}, r2 = {:.4}, b1 = {:.4}, b2 = {:.4}", b.r1, b.r2, b.b1, b.b2);
        }
        println!("    assumptions satisfied: {}", report.satisfied);
    }
    Ok(())
}
