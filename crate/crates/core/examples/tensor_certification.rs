//! Convexity bounds of an isotropic elasticity tensor and of its equilibrium part.

use vidlab::kernels::{KernelSpec, PronyKernel, PronyTerm};
use vidlab::tensor::{certify_equilibrium, convexity_bounds, VoigtTensor};

fn main() -> vidlab::Result<()> {
    let c = VoigtTensor::isotropic(3, 2.0, 1.0)?;
    let r = convexity_bounds(&c)?;
    println!("C: alpha0 = {:.4}, beta0 = {:.4}, strongly convex = {}", r.alpha0, r.beta0, r.strongly_convex);

    for relax in [0.5, 1.0, 1.5] {
        let g = VoigtTensor::isotropic(3, 2.0 * relax, relax)?;
        let kernel = KernelSpec::Prony(PronyKernel::new(vec![PronyTerm::new(g, 1.0)?])?);
        let eq = certify_equilibrium(&c, &kernel)?;
        println!(
            "relaxed fraction {relax}: mu0 = {:+.4}, nu0 = {:+.4}, solid = {}",
            eq.alpha0, eq.beta0, eq.strongly_convex
        );
    }
    Ok(())
}
