//! One-dimensional spring-dashpot rheologies and their VID form.
//!
//! Every model is reduced to an instantaneous modulus `C = H(0)` and a Prony
//! kernel `G = -Ḣ`, where `H` is the relaxation function of the model.

use serde::{Deserialize, Serialize};

use super::{KernelSpec, PronyKernel};
use crate::error::{Error, Result};
use crate::tensor::{certify_equilibrium, ConvexityReport, VoigtTensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpringDashpotSpec {
    /// A lone spring; contributes stiffness but no memory.
    Spring { c: f64 },
    /// Spring `cs` in series with dashpot `eta`.
    Maxwell { cs: f64, eta: f64 },
    /// Spring `c1` in parallel with a Maxwell arm (`c2`, `eta2`).
    Sls { c1: f64, c2: f64, eta2: f64 },
    /// Maxwell arm (`c1`, `eta3`) in series with a Kelvin-Voigt unit (`c2`, `eta2`).
    Burgers { c1: f64, c2: f64, eta2: f64, eta3: f64 },
    /// Parallel connection of sub-models.
    Extended(Vec<SpringDashpotSpec>),
    /// Series connection of Burgers units. Not supported.
    SeriesBurgers(Vec<SpringDashpotSpec>),
}

/// Intermediate quantities of the Burgers reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BurgersDerivation {
    pub b1_coef: f64,
    pub b2_coef: f64,
    pub discriminant: f64,
    pub r1: f64,
    pub r2: f64,
    pub b1: f64,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedModel {
    pub instantaneous: VoigtTensor,
    pub kernel: PronyKernel,
    pub burgers: Vec<BurgersDerivation>,
}

impl DerivedModel {
    pub fn kernel_spec(&self) -> KernelSpec {
        KernelSpec::Prony(self.kernel.clone())
    }

    pub fn equilibrium(&self) -> Result<ConvexityReport> {
        certify_equilibrium(&self.instantaneous, &self.kernel_spec())
    }

    /// `C − Σ Ĝ_j / r_j` for the one-dimensional model.
    pub fn equilibrium_modulus(&self) -> f64 {
        let total: f64 = self
            .kernel
            .terms()
            .iter()
            .map(|t| t.amplitude.get(0, 0) / t.rate)
            .sum();
        self.instantaneous.get(0, 0) - total
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

fn single(c_inst: f64, amplitude: f64, rate: f64) -> Result<DerivedModel> {
    Ok(DerivedModel {
        instantaneous: VoigtTensor::scalar(c_inst),
        kernel: PronyKernel::scalar(&[(amplitude, rate)])?,
        burgers: Vec::new(),
    })
}

pub fn derive_maxwell(cs: f64, eta: f64) -> Result<DerivedModel> {
    let cs = positive("cs", cs)?;
    let eta = positive("eta", eta)?;
    single(cs, cs * cs / eta, cs / eta)
}

pub fn derive_sls(c1: f64, c2: f64, eta2: f64) -> Result<DerivedModel> {
    let c1 = positive("c1", c1)?;
    let c2 = positive("c2", c2)?;
    let eta2 = positive("eta2", eta2)?;
    single(c1 + c2, c2 * c2 / eta2, c2 / eta2)
}

pub fn derive_burgers(c1: f64, c2: f64, eta2: f64, eta3: f64) -> Result<DerivedModel> {
    let c1 = positive("c1", c1)?;
    let c2 = positive("c2", c2)?;
    let eta2 = positive("eta2", eta2)?;
    let eta3 = positive("eta3", eta3)?;

    let b1_coef = eta3 / c2 + eta3 / c1 + eta2 / c2;
    let b2_coef = (eta3 / c1) * (eta2 / c2);
    let discriminant = b1_coef * b1_coef - 4.0 * b2_coef;
    if !(discriminant > 0.0) {
        return Err(Error::UnsupportedRegime(format!(
            "Burgers relaxation is oscillatory (discriminant {discriminant:e} <= 0)"
        )));
    }
    let r1 = (b1_coef + discriminant.sqrt()) / (2.0 * b2_coef);
    // product of the roots is 1/B2; avoids cancellation in B1 - √D
    let r2 = 1.0 / (b2_coef * r1);

    let retard = eta2 / c2;
    let lo = retard * r2;
    let hi = retard * r1;
    let tol = 1e-12;
    if lo > 1.0 + tol || hi < 1.0 - tol {
        return Err(Error::Certification(format!(
            "root ordering violated: eta2/c2 * r2 = {lo}, eta2/c2 * r1 = {hi}"
        )));
    }
    let gap = r1 - r2;
    let b1 = (eta3 * retard * r1 - eta3) / gap;
    let b2 = (eta3 - eta3 * retard * r2) / gap;
    let scale = b1.abs().max(b2.abs());
    if b1 < -tol * scale || b2 < -tol * scale {
        return Err(Error::Certification(format!(
            "negative relaxation weights b1 = {b1:e}, b2 = {b2:e}"
        )));
    }
    let (b1, b2) = (b1.max(0.0), b2.max(0.0));

    Ok(DerivedModel {
        instantaneous: VoigtTensor::scalar(b1 + b2),
        kernel: PronyKernel::scalar(&[(b1 * r1, r1), (b2 * r2, r2)])?,
        burgers: vec![BurgersDerivation {
            b1_coef,
            b2_coef,
            discriminant,
            r1,
            r2,
            b1,
            b2,
        }],
    })
}

/// Parallel composition: moduli add and Prony terms concatenate.
pub fn extend(models: &[DerivedModel]) -> Result<DerivedModel> {
    let (first, rest) = models
        .split_first()
        .ok_or_else(|| Error::Validation("extended model needs at least one unit".into()))?;
    let mut out = first.clone();
    for m in rest {
        out.instantaneous = out.instantaneous.checked_add(&m.instantaneous)?;
        out.kernel = out.kernel.concat(&m.kernel)?;
        out.burgers.extend(m.burgers.iter().copied());
    }
    Ok(out)
}

pub fn derive(spec: &SpringDashpotSpec) -> Result<DerivedModel> {
    match *spec {
        SpringDashpotSpec::Spring { c } => Ok(DerivedModel {
            instantaneous: VoigtTensor::scalar(positive("c", c)?),
            kernel: PronyKernel::empty(1)?,
            burgers: Vec::new(),
        }),
        SpringDashpotSpec::Maxwell { cs, eta } => derive_maxwell(cs, eta),
        SpringDashpotSpec::Sls { c1, c2, eta2 } => derive_sls(c1, c2, eta2),
        SpringDashpotSpec::Burgers { c1, c2, eta2, eta3 } => derive_burgers(c1, c2, eta2, eta3),
        SpringDashpotSpec::Extended(ref parts) => {
            extend(&parts.iter().map(derive).collect::<Result<Vec<_>>>()?)
        }
        SpringDashpotSpec::SeriesBurgers(_) => Err(Error::UnsupportedRegime(
            "series composition of Burgers units has no closed-form Prony kernel; \
             connect units in parallel with an equilibrium spring instead"
                .into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn terms(m: &DerivedModel) -> Vec<(f64, f64)> {
        m.kernel
            .terms()
            .iter()
            .map(|t| (t.amplitude.get(0, 0), t.rate))
            .collect()
    }

    #[test]
    fn maxwell_examples() {
        let m = derive_maxwell(2.0, 1.0).unwrap();
        assert_eq!(m.instantaneous.as_scalar(), Some(2.0));
        assert_eq!(terms(&m), vec![(4.0, 2.0)]);
        assert_eq!(m.equilibrium_modulus(), 0.0);
        assert!(!m.equilibrium().unwrap().strongly_convex);

        let m = derive_maxwell(1.0, 1.0).unwrap();
        assert_eq!(terms(&m), vec![(1.0, 1.0)]);
        assert!(matches!(derive_maxwell(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(derive_maxwell(1.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sls_examples() {
        let m = derive_sls(1.0, 2.0, 1.0).unwrap();
        assert_eq!(m.instantaneous.as_scalar(), Some(3.0));
        assert_eq!(terms(&m), vec![(4.0, 2.0)]);
        assert_eq!(m.equilibrium_modulus(), 1.0);

        let m = derive_sls(1.0, 1.0, 1.0).unwrap();
        assert_eq!(m.instantaneous.as_scalar(), Some(2.0));
        assert_eq!(m.equilibrium_modulus(), 1.0);

        let m = derive_sls(1.0, 1e-12, 1.0).unwrap();
        assert_relative_eq!(m.instantaneous.get(0, 0), 1.0, max_relative = 1e-11);
        assert!(terms(&m)[0].0 < 1e-23);
    }

    #[test]
    fn burgers_unit_constants() {
        let m = derive_burgers(1.0, 1.0, 1.0, 1.0).unwrap();
        let d = m.burgers[0];
        let s5 = 5f64.sqrt();
        assert_eq!(d.b1_coef, 3.0);
        assert_eq!(d.b2_coef, 1.0);
        assert_eq!(d.discriminant, 5.0);
        assert_relative_eq!(d.r1, (3.0 + s5) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(d.r2, (3.0 - s5) / 2.0, max_relative = 1e-14);
        // b1 = (r1 - 1)/(r1 - r2) = (1 + √5)/(2√5)
        assert_relative_eq!(d.b1, (1.0 + s5) / (2.0 * s5), max_relative = 1e-14);
        assert_relative_eq!(d.b2, (s5 - 1.0) / (2.0 * s5), max_relative = 1e-14);
        assert!((d.b1 - 0.7236).abs() < 1e-4 && (d.b2 - 0.2764).abs() < 1e-4);
        assert_relative_eq!(m.instantaneous.get(0, 0), 1.0, max_relative = 1e-14);
        assert!(m.equilibrium_modulus().abs() < 1e-14);
        assert!(!m.equilibrium().unwrap().strongly_convex);
    }

    #[test]
    fn burgers_root_ordering_holds_for_random_positive_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut draw = || 10f64.powf(rng.gen_range(-2.0..2.0));
        for _ in 0..10_000 {
            let (c1, c2, eta2, eta3) = (draw(), draw(), draw(), draw());
            // independent check: B2 r² - B1 r + 1 at r = c2/eta2 equals -eta3/eta2 < 0
            let b1c = eta3 / c2 + eta3 / c1 + eta2 / c2;
            let b2c = (eta3 / c1) * (eta2 / c2);
            let r = c2 / eta2;
            let q = b2c * r * r - b1c * r + 1.0;
            assert!((q + eta3 / eta2).abs() <= 1e-9 * (eta3 / eta2).max(b1c * r));
            let m = derive_burgers(c1, c2, eta2, eta3).unwrap();
            let d = m.burgers[0];
            assert!(d.b1 >= -1e-12 && d.b2 >= -1e-12);
        }
    }

    #[test]
    fn extended_models() {
        let a = derive_maxwell(2.0, 1.0).unwrap();
        let b = derive_maxwell(1.0, 1.0).unwrap();
        let m = extend(&[a.clone(), b]).unwrap();
        assert_eq!(m.instantaneous.as_scalar(), Some(3.0));
        assert_eq!(terms(&m), vec![(4.0, 2.0), (1.0, 1.0)]);

        assert_eq!(extend(std::slice::from_ref(&a)).unwrap(), a);

        let spec = SpringDashpotSpec::Extended(vec![
            SpringDashpotSpec::Spring { c: 0.5 },
            SpringDashpotSpec::Maxwell { cs: 2.0, eta: 1.0 },
            SpringDashpotSpec::Maxwell { cs: 1.0, eta: 3.0 },
        ]);
        let m = derive(&spec).unwrap();
        assert_relative_eq!(m.instantaneous.get(0, 0), 3.5);
        assert_relative_eq!(m.equilibrium_modulus(), 0.5, max_relative = 1e-14);
        assert!(m.equilibrium().unwrap().strongly_convex);
    }

    #[test]
    fn series_burgers_is_rejected() {
        let spec = SpringDashpotSpec::SeriesBurgers(vec![SpringDashpotSpec::Burgers {
            c1: 1.0,
            c2: 1.0,
            eta2: 1.0,
            eta3: 1.0,
        }]);
        assert!(matches!(derive(&spec), Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn spec_parses_from_json() {
        let spec: SpringDashpotSpec = serde_json::from_str(
            r#"{"extended": [{"spring": {"c": 1.0}}, {"maxwell": {"cs": 2.0, "eta": 1.0}}]}"#,
        )
        .unwrap();
        let m = derive(&spec).unwrap();
        assert_eq!(m.instantaneous.as_scalar(), Some(3.0));
    }
}
