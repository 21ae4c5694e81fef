use crate::error::{Error, Result};

use super::{MaterialField1D, Mesh1D};

/// Lumped-mass P1 operators on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperators {
    pub h: f64,
    /// Lumped nodal masses.
    pub mass: Vec<f64>,
    /// Per-cell modulus.
    pub c: Vec<f64>,
}

pub fn assemble(mesh: &Mesh1D, material: &MaterialField1D) -> Result<DiscreteOperators> {
    let h = mesh.h();
    let n = mesh.cells();
    if material.c().len() != n {
        return Err(Error::Validation("material does not match the mesh".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Validation("degenerate mesh".into()));
    }
    let rho = material.rho();
    let mut mass = vec![0.0; n + 1];
    for (cell, &r) in rho.iter().enumerate() {
        mass[cell] += 0.5 * r * h;
        mass[cell + 1] += 0.5 * r * h;
    }
    Ok(DiscreteOperators {
        h,
        mass,
        c: material.c().to_vec(),
    })
}

impl DiscreteOperators {
    pub fn cells(&self) -> usize {
        self.c.len()
    }

    /// Cell strains `(u_{c+1} - u_c)/h`.
    pub fn strain(&self, u: &[f64], out: &mut [f64]) {
        let inv_h = 1.0 / self.h;
        for (c, e) in out.iter_mut().enumerate() {
            *e = (u[c + 1] - u[c]) * inv_h;
        }
    }

    /// Nodal internal force `-∫ σ ∂φ_i dx` for per-cell stress `σ`.
    pub fn divergence(&self, stress: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|f| *f = 0.0);
        for (c, &s) in stress.iter().enumerate() {
            out[c] += s;
            out[c + 1] -= s;
        }
    }

    /// Stiffness action `K_C u`, i.e. minus the elastic nodal force.
    pub fn apply_stiffness(&self, u: &[f64]) -> Vec<f64> {
        let mut eps = vec![0.0; self.cells()];
        self.strain(u, &mut eps);
        let stress: Vec<f64> = eps.iter().zip(&self.c).map(|(e, c)| c * e).collect();
        let mut f = vec![0.0; u.len()];
        self.divergence(&stress, &mut f);
        f.iter_mut().for_each(|v| *v = -*v);
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{KernelSpec, PronyKernel};

    fn setup(c: f64) -> DiscreteOperators {
        let mesh = Mesh1D::new(1.0, 4).unwrap();
        let mat = MaterialField1D::uniform(&mesh, 1.0, c, KernelSpec::Prony(PronyKernel::empty(1).unwrap()))
            .unwrap();
        assemble(&mesh, &mat).unwrap()
    }

    #[test]
    fn lumped_mass() {
        let ops = setup(1.0);
        assert_eq!(ops.mass, vec![0.125, 0.25, 0.25, 0.25, 0.125]);
    }

    #[test]
    fn linear_profile_has_boundary_flux_only() {
        let ops = setup(1.0);
        let u = [0.0, 0.25, 0.5, 0.75, 1.0];
        let ku = ops.apply_stiffness(&u);
        for v in &ku[1..4] {
            assert!(v.abs() < 1e-15);
        }
        assert!((ku[4] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stiffness_scales_with_modulus() {
        let u = [0.0, 0.3, -0.2, 0.9, 0.1];
        let a = setup(1.0).apply_stiffness(&u);
        let b = setup(2.5).apply_stiffness(&u);
        for (x, y) in a.iter().zip(&b) {
            assert!((2.5 * x - y).abs() <= 1e-14 * y.abs().max(1.0));
        }
    }

    #[test]
    fn degenerate_mesh_is_rejected() {
        assert!(Mesh1D::new(0.0, 8).is_err());
        assert!(Mesh1D::new(1.0, 3).is_err());
    }
}
