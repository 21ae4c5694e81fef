//! Relaxation-derivative kernels `G(t)`.
//!
//! Two families are supported: Prony sums `Σ Ĝ_j e^{-r_j t}` (which also
//! cover every spring-dashpot model in [`spring_dashpot`]) and the
//! polynomial family `ĝ (1 + a t)^{-p} Ĝ`.

mod spring_dashpot;
mod validate;

pub use spring_dashpot::{
    derive, derive_burgers, derive_maxwell, derive_sls, extend, BurgersDerivation, DerivedModel,
    SpringDashpotSpec,
};
pub use validate::{
    validate, validate_exponential, validate_polynomial, AssumptionReport, SharpRatios,
};

use crate::error::{Error, Result};
use crate::tensor::{convexity_bounds, eig_tolerance, VoigtTensor};

/// Time-derivative order accepted by [`KernelSpec::eval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Value,
    First,
    Second,
}

impl Order {
    pub fn as_u32(self) -> u32 {
        match self {
            Order::Value => 0,
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

impl TryFrom<u32> for Order {
    type Error = Error;

    fn try_from(v: u32) -> Result<Self> {
        match v {
            0 => Ok(Order::Value),
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::Domain(format!("derivative order must be 0, 1 or 2, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PronyTerm {
    pub amplitude: VoigtTensor,
    pub rate: f64,
}

impl PronyTerm {
    pub fn new(amplitude: VoigtTensor, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!("Prony rate must be positive, got {rate}")));
        }
        let r = convexity_bounds(&amplitude)?;
        if r.alpha0 < -eig_tolerance(r.beta0) {
            return Err(Error::Validation(format!(
                "Prony amplitude is not positive semidefinite (smallest eigenvalue {:e})",
                r.alpha0
            )));
        }
        Ok(Self { amplitude, rate })
    }
}

/// `G(t) = Σ_j Ĝ_j e^{-r_j t}`; an empty sum is the elastic limit.
#[derive(Debug, Clone, PartialEq)]
pub struct PronyKernel {
    dim: usize,
    terms: Vec<PronyTerm>,
}

impl PronyKernel {
    pub fn new(terms: Vec<PronyTerm>) -> Result<Self> {
        let dim = terms
            .first()
            .map(|t| t.amplitude.dim())
            .ok_or_else(|| Error::Validation("use PronyKernel::empty for a kernel without terms".into()))?;
        if terms.iter().any(|t| t.amplitude.dim() != dim) {
            return Err(Error::Validation("Prony amplitudes have mixed dimensions".into()));
        }
        Ok(Self { dim, terms })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        crate::tensor::voigt_size(dim)?;
        Ok(Self { dim, terms: Vec::new() })
    }

    /// One-dimensional kernel from `(amplitude, rate)` pairs.
    pub fn scalar(terms: &[(f64, f64)]) -> Result<Self> {
        if terms.is_empty() {
            return Self::empty(1);
        }
        Self::new(
            terms
                .iter()
                .map(|&(g, r)| PronyTerm::new(VoigtTensor::scalar(g), r))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[PronyTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_rate(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.rate).reduce(f64::min)
    }

    pub fn max_rate(&self) -> Option<f64> {
        self.terms.iter().map(|t| t.rate).reduce(f64::max)
    }

    /// Concatenation of terms (parallel composition).
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Validation("cannot join kernels of different dimension".into()));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { dim: self.dim, terms })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| PronyTerm {
                    amplitude: t.amplitude.scaled(factor),
                    rate: t.rate,
                })
                .collect(),
        }
    }

    fn eval(&self, t: f64, order: Order) -> VoigtTensor {
        let k = order.as_u32() as i32;
        let mut acc = VoigtTensor::zeros(self.dim).expect("validated dimension");
        for term in &self.terms {
            let coef = (-term.rate).powi(k) * (-term.rate * t).exp();
            acc = &acc + &term.amplitude.scaled(coef);
        }
        acc
    }
}

/// `G(t) = ĝ (1 + a t)^{-p} Ĝ` with `p > 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialKernel {
    pub amplitude: VoigtTensor,
    pub scale: f64,
    pub a: f64,
    pub p: f64,
}

impl PolynomialKernel {
    pub fn new(amplitude: VoigtTensor, scale: f64, a: f64, p: f64) -> Result<Self> {
        if !(p > 2.0 && p.is_finite()) {
            return Err(Error::Domain(format!("polynomial kernel needs p > 2, got {p}")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("polynomial kernel needs a > 0, got {a}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("polynomial kernel needs a positive scale, got {scale}")));
        }
        let r = convexity_bounds(&amplitude)?;
        if !r.strongly_convex {
            return Err(Error::Validation(
                "polynomial kernel amplitude must be positive definite".into(),
            ));
        }
        Ok(Self { amplitude, scale, a, p })
    }

    /// Scalar factor `ĝ(1+at)^{-p}` and its first two derivatives.
    pub fn factor(&self, t: f64, order: Order) -> f64 {
        let base = 1.0 + self.a * t;
        let (p, a) = (self.p, self.a);
        match order {
            Order::Value => self.scale * base.powf(-p),
            Order::First => -self.scale * a * p * base.powf(-p - 1.0),
            Order::Second => self.scale * a * a * p * (p + 1.0) * base.powf(-p - 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Prony(PronyKernel),
    Polynomial(PolynomialKernel),
}

impl KernelSpec {
    pub fn dim(&self) -> usize {
        match self {
            KernelSpec::Prony(k) => k.dim(),
            KernelSpec::Polynomial(k) => k.amplitude.dim(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, KernelSpec::Prony(k) if k.is_empty())
    }

    /// `G`, `Ġ` or `G̈` at time `t ≥ 0`.
    pub fn eval(&self, t: f64, order: Order) -> Result<VoigtTensor> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("kernel evaluated at negative time {t}")));
        }
        Ok(match self {
            KernelSpec::Prony(k) => k.eval(t, order),
            KernelSpec::Polynomial(k) => k.amplitude.scaled(k.factor(t, order)),
        })
    }

    /// `∫₀ᵗ G(τ) dτ` in closed form.
    pub fn integral(&self, t: f64) -> Result<VoigtTensor> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("kernel integral to negative time {t}")));
        }
        Ok(match self {
            KernelSpec::Prony(k) => {
                let mut acc = VoigtTensor::zeros(k.dim())?;
                for term in k.terms() {
                    let w = -(-term.rate * t).exp_m1() / term.rate;
                    acc = &acc + &term.amplitude.scaled(w);
                }
                acc
            }
            KernelSpec::Polynomial(k) => {
                let w = k.scale * (1.0 - (1.0 + k.a * t).powf(1.0 - k.p)) / (k.a * (k.p - 1.0));
                k.amplitude.scaled(w)
            }
        })
    }

    /// `∫₀^∞ G(τ) dτ`; fails for non-integrable parameters.
    pub fn integral_to_infinity(&self) -> Result<VoigtTensor> {
        match self {
            KernelSpec::Prony(k) => {
                let mut acc = VoigtTensor::zeros(k.dim())?;
                for term in k.terms() {
                    if !(term.rate > 0.0) {
                        return Err(Error::Domain("Prony rate must be positive".into()));
                    }
                    acc = &acc + &term.amplitude.scaled(1.0 / term.rate);
                }
                Ok(acc)
            }
            KernelSpec::Polynomial(k) => {
                if !(k.p > 1.0) || !(k.a > 0.0) {
                    return Err(Error::Domain(format!(
                        "polynomial kernel is not integrable for a = {}, p = {}",
                        k.a, k.p
                    )));
                }
                Ok(k.amplitude.scaled(k.scale / (k.a * (k.p - 1.0))))
            }
        }
    }

    /// Scalar view of a one-dimensional kernel for the 1D solver.
    pub fn to_scalar(&self) -> Result<ScalarKernel> {
        if self.dim() != 1 {
            return Err(Error::Config(format!(
                "the 1D solver needs a one-dimensional kernel, got dimension {}",
                self.dim()
            )));
        }
        Ok(match self {
            KernelSpec::Prony(k) => ScalarKernel::Prony(
                k.terms()
                    .iter()
                    .map(|t| (t.amplitude.get(0, 0), t.rate))
                    .collect(),
            ),
            KernelSpec::Polynomial(k) => ScalarKernel::Polynomial {
                scale: k.scale * k.amplitude.get(0, 0),
                a: k.a,
                p: k.p,
            },
        })
    }
}

/// One-dimensional kernel in scalar form, as used by the solver and monitors.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarKernel {
    /// `(amplitude, rate)` pairs.
    Prony(Vec<(f64, f64)>),
    Polynomial { scale: f64, a: f64, p: f64 },
}

impl ScalarKernel {
    pub fn is_empty(&self) -> bool {
        matches!(self, ScalarKernel::Prony(t) if t.is_empty())
    }

    pub fn prony_terms(&self) -> Option<&[(f64, f64)]> {
        match self {
            ScalarKernel::Prony(t) => Some(t),
            ScalarKernel::Polynomial { .. } => None,
        }
    }

    pub fn value(&self, t: f64, order: Order) -> f64 {
        match self {
            ScalarKernel::Prony(terms) => {
                let k = order.as_u32() as i32;
                terms
                    .iter()
                    .map(|&(g, r)| g * (-r).powi(k) * (-r * t).exp())
                    .sum()
            }
            &ScalarKernel::Polynomial { scale, a, p } => {
                let base = 1.0 + a * t;
                match order {
                    Order::Value => scale * base.powf(-p),
                    Order::First => -scale * a * p * base.powf(-p - 1.0),
                    Order::Second => scale * a * a * p * (p + 1.0) * base.powf(-p - 2.0),
                }
            }
        }
    }

    pub fn g(&self, t: f64) -> f64 {
        self.value(t, Order::Value)
    }

    pub fn g_dot(&self, t: f64) -> f64 {
        self.value(t, Order::First)
    }

    /// `∫₀ᵗ G(τ) dτ`.
    pub fn integral(&self, t: f64) -> f64 {
        match self {
            ScalarKernel::Prony(terms) => terms.iter().map(|&(g, r)| -g * (-r * t).exp_m1() / r).sum(),
            &ScalarKernel::Polynomial { scale, a, p } => {
                scale * (1.0 - (1.0 + a * t).powf(1.0 - p)) / (a * (p - 1.0))
            }
        }
    }

    pub fn integral_to_infinity(&self) -> f64 {
        match self {
            ScalarKernel::Prony(terms) => terms.iter().map(|&(g, r)| g / r).sum(),
            &ScalarKernel::Polynomial { scale, a, p } => scale / (a * (p - 1.0)),
        }
    }
}
