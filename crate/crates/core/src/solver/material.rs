use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, ScalarKernel};
use crate::tensor::{convexity_bounds_cells, ConvexityReport, VoigtTensor};

use super::Mesh1D;

/// Piecewise-constant density, modulus and kernel amplitude scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialField1D {
    rho: Vec<f64>,
    c: Vec<f64>,
    kernel: KernelSpec,
    scalar: ScalarKernel,
    kernel_scale: Vec<f64>,
}

fn per_cell(name: &str, values: Vec<f64>, cells: usize) -> Result<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; cells]),
        n if n == cells => Ok(values),
        n => Err(Error::Validation(format!(
            "{name} has {n} entries; expected 1 or {cells}"
        ))),
    }
}

impl MaterialField1D {
    /// Fields given as one value (uniform) or one value per cell.
    pub fn new(
        mesh: &Mesh1D,
        rho: Vec<f64>,
        c: Vec<f64>,
        kernel: KernelSpec,
        kernel_scale: Vec<f64>,
    ) -> Result<Self> {
        let n = mesh.cells();
        let rho = per_cell("rho", rho, n)?;
        let c = per_cell("C", c, n)?;
        let kernel_scale = per_cell("kernel_scale", kernel_scale, n)?;
        if let Some(r) = rho.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::Validation(format!("density must be positive, got {r}")));
        }
        if let Some(s) = kernel_scale.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
            return Err(Error::Validation(format!("kernel scale must be non-negative, got {s}")));
        }
        let report = convexity_bounds_cells(&c.iter().map(|&v| VoigtTensor::scalar(v)).collect::<Vec<_>>())?;
        if !report.strongly_convex {
            return Err(Error::Validation(format!(
                "modulus C must be positive in every cell (min {:e})",
                report.alpha0
            )));
        }
        let scalar = kernel.to_scalar()?;
        Ok(Self { rho, c, kernel, scalar, kernel_scale })
    }

    pub fn uniform(mesh: &Mesh1D, rho: f64, c: f64, kernel: KernelSpec) -> Result<Self> {
        Self::new(mesh, vec![rho], vec![c], kernel, vec![1.0])
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn scalar_kernel(&self) -> &ScalarKernel {
        &self.scalar
    }

    pub fn kernel_scale(&self) -> &[f64] {
        &self.kernel_scale
    }

    pub fn unit_density(&self) -> bool {
        self.rho.iter().all(|&r| r == 1.0)
    }

    /// Largest instantaneous wave speed `√(C/ρ)`.
    pub fn max_speed(&self) -> f64 {
        self.c
            .iter()
            .zip(&self.rho)
            .map(|(c, r)| (c / r).sqrt())
            .fold(0.0, f64::max)
    }

    /// α₀, β₀ over cells for the instantaneous modulus.
    pub fn instantaneous_bounds(&self) -> ConvexityReport {
        let cells: Vec<_> = self.c.iter().map(|&v| VoigtTensor::scalar(v)).collect();
        convexity_bounds_cells(&cells).expect("validated at construction")
    }

    /// μ₀, ν₀ over cells for `C − k_c ∫₀^∞ G`.
    pub fn equilibrium_bounds(&self) -> Result<ConvexityReport> {
        let total = self.scalar.integral_to_infinity();
        if !total.is_finite() {
            return Err(Error::Domain("kernel is not integrable".into()));
        }
        let cells: Vec<_> = self
            .c
            .iter()
            .zip(&self.kernel_scale)
            .map(|(&c, &k)| VoigtTensor::scalar(c - k * total))
            .collect();
        convexity_bounds_cells(&cells)
    }

    /// Same material with every modulus multiplied by `factor`.
    pub fn with_scaled_modulus(&self, factor: f64) -> Result<Self> {
        let mut out = self.clone();
        out.c.iter_mut().for_each(|c| *c *= factor);
        if out.c.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::Validation("scaled modulus must stay positive".into()));
        }
        Ok(out)
    }
}
