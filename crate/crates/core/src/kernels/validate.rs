//! Certification of the kernel assumptions for polynomial and exponential decay.
//!
//! Loewner inequalities such as `Ġ ≤ -κ₂ G` are checked by the smallest
//! eigenvalue of the difference tensor on a sampled time grid.

use serde::Serialize;

use super::{KernelSpec, Order, PolynomialKernel, PronyKernel};
use crate::error::{Error, Result};
use crate::tensor::{certify_equilibrium, convexity_bounds, ConvexityReport, VoigtTensor};

/// Relative slack allowed on every sampled inequality.
const REL_TOL: f64 = 1e-10;

/// Ratios of the scalar profile of a commuting Prony kernel, sampled on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SharpRatios {
    /// sup of `-ġ/g`.
    pub kappa1: f64,
    /// inf of `-ġ/g`.
    pub kappa2: f64,
    /// sup of `g̈/g`.
    pub kappa3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub satisfied: bool,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    pub kappa3: Option<f64>,
    pub kappa4: Option<f64>,
    pub kappa4_tilde: Option<f64>,
    pub kappa5: Option<f64>,
    pub kappa6: Option<f64>,
    pub p: Option<f64>,
    /// Time of the worst sampled violation, if any.
    pub witness_t: Option<f64>,
    /// Largest relative violation seen on the grid (0 when none).
    pub worst_violation: f64,
    pub commuting: bool,
    pub sufficient_only: bool,
    pub empty_kernel: bool,
    pub instantaneous: ConvexityReport,
    pub equilibrium: ConvexityReport,
    pub sharp: Option<SharpRatios>,
    pub notes: Vec<String>,
}

/// Tracks the worst relative violation over all sampled inequalities.
#[derive(Default)]
struct Violations {
    worst: f64,
    witness: Option<f64>,
    label: &'static str,
}

impl Violations {
    /// Records `lhs ⪰ 0`, scaled by `scale`.
    fn psd(&mut self, t: f64, lhs: &VoigtTensor, scale: f64, label: &'static str) {
        let lo = lhs.eigenvalues()[0];
        self.scalar(t, lo, scale, label);
    }

    /// Records `value ≥ 0`, scaled by `scale`.
    fn scalar(&mut self, t: f64, value: f64, scale: f64, label: &'static str) {
        let rel = -value / scale.max(f64::MIN_POSITIVE);
        if rel > REL_TOL && rel > self.worst {
            self.worst = rel;
            self.witness = Some(t);
            self.label = label;
        }
    }

    fn note(&self) -> Option<String> {
        self.witness
            .map(|t| format!("{} violated at t = {t:e} (relative {:e})", self.label, self.worst))
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Whether all amplitudes are non-negative multiples of one matrix.
/// Returns the reference matrix and the multipliers when they are.
fn common_direction(k: &PronyKernel) -> Option<(VoigtTensor, Vec<f64>)> {
    let reference = k.terms().iter().map(|t| &t.amplitude).find(|a| a.norm() > 0.0)?;
    let rr = reference.frobenius_dot(reference);
    let mut coefs = Vec::with_capacity(k.terms().len());
    for term in k.terms() {
        let c = term.amplitude.frobenius_dot(reference) / rr;
        let resid = (&term.amplitude - &reference.scaled(c)).norm();
        if resid > 1e-12 * term.amplitude.norm().max(reference.norm() * c.abs()) {
            return None;
        }
        coefs.push(c);
    }
    Some((reference.clone(), coefs))
}

fn log_or_none(v: f64) -> Option<f64> {
    (v > 0.0).then(|| -v.ln())
}

fn prony_eval(k: &PronyKernel, t: f64, order: Order) -> VoigtTensor {
    k.eval(t, order)
}

/// Checks the exponential-decay assumptions for a Prony kernel.
///
/// The reported κ's are the per-term envelope constants (`κ₁ = max r_j`,
/// `κ₂ = κ̃₄ = min r_j`, `κ₃ = max r_j²`, `κ₄ = Σ (1 + r_j)‖Ĝ_j‖`), which are
/// exact Loewner bounds for any PSD mixture. When the kernel is commuting the
/// sampled sharp ratios are reported as well.
pub fn validate_exponential(
    c: &VoigtTensor,
    k: &PronyKernel,
    t_max: Option<f64>,
    n_samples: usize,
) -> Result<AssumptionReport> {
    if c.dim() != k.dim() {
        return Err(Error::Validation(format!(
            "modulus has dimension {} but kernel has dimension {}",
            c.dim(),
            k.dim()
        )));
    }
    let instantaneous = convexity_bounds(c)?;
    let spec = KernelSpec::Prony(k.clone());
    let equilibrium = certify_equilibrium(c, &spec)?;
    let mut notes = Vec::new();
    if !instantaneous.strongly_convex {
        notes.push(format!(
            "instantaneous modulus is not strongly convex (alpha0 = {:e})",
            instantaneous.alpha0
        ));
    }
    if !equilibrium.strongly_convex {
        notes.push(format!(
            "equilibrium modulus is not strongly convex (mu0 = {:e})",
            equilibrium.alpha0
        ));
    }
    let kappa5 = log_or_none(equilibrium.alpha0);
    let kappa6 = log_or_none(equilibrium.beta0);

    let (Some(r_min), Some(r_max)) = (k.min_rate(), k.max_rate()) else {
        notes.push("empty kernel: assumptions hold trivially, kappa constants undefined".into());
        return Ok(AssumptionReport {
            satisfied: instantaneous.strongly_convex && equilibrium.strongly_convex,
            kappa1: None,
            kappa2: None,
            kappa3: None,
            kappa4: None,
            kappa4_tilde: None,
            kappa5,
            kappa6,
            p: None,
            witness_t: None,
            worst_violation: 0.0,
            commuting: true,
            sufficient_only: false,
            empty_kernel: true,
            instantaneous,
            equilibrium,
            sharp: None,
            notes,
        });
    };

    let kappa1 = r_max;
    let kappa2 = r_min;
    let kappa3 = r_max * r_max;
    let kappa4_tilde = r_min;
    let kappa4: f64 = k
        .terms()
        .iter()
        .map(|t| (1.0 + t.rate) * t.amplitude.spectral_norm())
        .sum();

    let t_end = match t_max {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return Err(Error::Domain(format!("t_max must be positive, got {t}"))),
        None => 20.0 / r_min,
    };
    let t_lo = (1e-6 / r_min).min(t_end);
    let mut grid = vec![0.0];
    grid.extend(log_grid(t_lo, t_end, n_samples.max(2)));

    let direction = common_direction(k);
    let commuting = direction.is_some();
    let mut v = Violations::default();
    let mut sharp = direction.as_ref().map(|_| SharpRatios {
        kappa1: f64::NEG_INFINITY,
        kappa2: f64::INFINITY,
        kappa3: f64::NEG_INFINITY,
    });

    for &t in &grid {
        let g = prony_eval(k, t, Order::Value);
        let gd = prony_eval(k, t, Order::First);
        let gdd = prony_eval(k, t, Order::Second);
        let scale = g.spectral_norm() * r_max.max(1.0) * r_max.max(1.0);
        v.psd(t, &g, scale, "G >= 0");
        v.psd(t, &(&gd + &g.scaled(kappa1)), scale, "-kappa1 G <= G'");
        v.psd(t, &(&gd.scaled(-1.0) - &g.scaled(kappa2)), scale, "G' <= -kappa2 G");
        v.psd(t, &(&g.scaled(kappa3) - &gdd), scale, "G'' <= kappa3 G");
        let env = kappa4 * (-kappa4_tilde * t).exp();
        v.scalar(
            t,
            env - g.spectral_norm() - gd.spectral_norm(),
            env,
            "|G| + |G'| <= kappa4 exp(-kappa4~ t)",
        );

        if let (Some((_, coefs)), Some(s)) = (&direction, sharp.as_mut()) {
            let mut s0 = 0.0;
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for (term, &cj) in k.terms().iter().zip(coefs) {
                let e = cj * (-term.rate * t).exp();
                s0 += e;
                s1 += term.rate * e;
                s2 += term.rate * term.rate * e;
            }
            if s0 > 0.0 {
                s.kappa1 = s.kappa1.max(s1 / s0);
                s.kappa2 = s.kappa2.min(s1 / s0);
                s.kappa3 = s.kappa3.max(s2 / s0);
            }
        }
    }
    if !commuting {
        notes.push(
            "amplitudes do not commute: only the per-term sufficient condition is certified".into(),
        );
    }
    notes.extend(v.note());

    Ok(AssumptionReport {
        satisfied: instantaneous.strongly_convex
            && equilibrium.strongly_convex
            && v.witness.is_none(),
        kappa1: Some(kappa1),
        kappa2: Some(kappa2),
        kappa3: Some(kappa3),
        kappa4: Some(kappa4),
        kappa4_tilde: Some(kappa4_tilde),
        kappa5,
        kappa6,
        p: None,
        witness_t: v.witness,
        worst_violation: v.worst,
        commuting,
        sufficient_only: !commuting,
        empty_kernel: false,
        instantaneous,
        equilibrium,
        sharp: sharp.filter(|s| s.kappa1.is_finite()),
        notes,
    })
}

/// Closed-form constants for `ĝ(1+at)^{-p} Ĝ`, checked on a 1000-point log grid
/// over `[0, 10³/a]`.
///
/// With `λ` the eigenvalues of `Ĝ`: `κ₁ = ap`, `κ₂ = ap (ĝ λ_max)^{-1/p}`,
/// `κ₃ = a² p (p+1) (ĝ λ_min)^{-1/p}` and
/// `κ₄ = ĝ λ_max (1 + ap) max(1, a^{-p})`.
pub fn validate_polynomial(c: &VoigtTensor, k: &PolynomialKernel) -> Result<AssumptionReport> {
    if c.dim() != k.amplitude.dim() {
        return Err(Error::Validation(format!(
            "modulus has dimension {} but kernel has dimension {}",
            c.dim(),
            k.amplitude.dim()
        )));
    }
    let (a, p, gh) = (k.a, k.p, k.scale);
    if !(p > 2.0) {
        return Err(Error::Domain(format!("polynomial kernel needs p > 2, got {p}")));
    }
    let amp = convexity_bounds(&k.amplitude)?;
    let instantaneous = convexity_bounds(c)?;
    let spec = KernelSpec::Polynomial(k.clone());
    let equilibrium = certify_equilibrium(c, &spec)?;
    let mut notes = Vec::new();
    if !instantaneous.strongly_convex {
        notes.push(format!(
            "instantaneous modulus is not strongly convex (alpha0 = {:e})",
            instantaneous.alpha0
        ));
    }
    if !equilibrium.strongly_convex {
        notes.push(format!(
            "equilibrium modulus is not strongly convex (mu0 = {:e})",
            equilibrium.alpha0
        ));
    }
    if gh * amp.beta0 > 1.0 {
        notes.push(format!(
            "G(0) has spectral norm {:e} > 1; constants remain valid but are not normalized",
            gh * amp.beta0
        ));
    }

    let kappa1 = a * p;
    let kappa2 = a * p * (gh * amp.beta0).powf(-1.0 / p);
    let kappa3 = a * a * p * (p + 1.0) * (gh * amp.alpha0).powf(-1.0 / p);
    let kappa4 = gh * amp.beta0 * (1.0 + a * p) * a.powf(-p).max(1.0);

    let mut grid = vec![0.0];
    grid.extend(log_grid(1e-3 / a, 1e3 / a, 999));
    let mut v = Violations::default();
    for &t in &grid {
        let g = spec.eval(t, Order::Value)?;
        let gd = spec.eval(t, Order::First)?;
        let gdd = spec.eval(t, Order::Second)?;
        let g_pow = g.map_spectrum(|x| x.max(0.0).powf(1.0 + 1.0 / p));
        let scale = gd.spectral_norm().max(gdd.spectral_norm()).max(g.spectral_norm());
        v.psd(t, &g, scale, "G >= 0");
        v.psd(t, &(&gd + &g.scaled(kappa1)), scale, "-kappa1 G <= G'");
        v.psd(t, &(&gd.scaled(-1.0) - &g_pow.scaled(kappa2)), scale, "G' <= -kappa2 G^(1+1/p)");
        v.psd(t, &(&g_pow.scaled(kappa3) - &gdd), scale, "G'' <= kappa3 G^(1+1/p)");
        let env = kappa4 * (1.0 + t).powf(-p);
        v.scalar(
            t,
            env - g.spectral_norm() - gd.spectral_norm(),
            env,
            "|G| + |G'| <= kappa4 (1+t)^-p",
        );
    }
    notes.extend(v.note());

    Ok(AssumptionReport {
        satisfied: instantaneous.strongly_convex
            && equilibrium.strongly_convex
            && v.witness.is_none(),
        kappa1: Some(kappa1),
        kappa2: Some(kappa2),
        kappa3: Some(kappa3),
        kappa4: Some(kappa4),
        kappa4_tilde: None,
        kappa5: None,
        kappa6: None,
        p: Some(p),
        witness_t: v.witness,
        worst_violation: v.worst,
        commuting: true,
        sufficient_only: false,
        empty_kernel: false,
        instantaneous,
        equilibrium,
        sharp: None,
        notes,
    })
}

/// Dispatches on the kernel family with the default grids.
pub fn validate(c: &VoigtTensor, k: &KernelSpec) -> Result<AssumptionReport> {
    match k {
        KernelSpec::Prony(pk) => validate_exponential(c, pk, None, 512),
        KernelSpec::Polynomial(pk) => validate_polynomial(c, pk),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{derive_burgers, derive_maxwell, PronyTerm};
    use approx::assert_relative_eq;

    #[test]
    fn single_term_constants() {
        let k = PronyKernel::scalar(&[(4.0, 2.0)]).unwrap();
        let r = validate_exponential(&VoigtTensor::scalar(3.0), &k, None, 512).unwrap();
        assert_eq!(r.kappa1, Some(2.0));
        assert_eq!(r.kappa2, Some(2.0));
        assert_eq!(r.kappa3, Some(4.0));
        assert_eq!(r.kappa4_tilde, Some(2.0));
        assert_eq!(r.kappa4, Some(12.0));
        assert!(r.satisfied, "{:?}", r.notes);
        let s = r.sharp.unwrap();
        assert_relative_eq!(s.kappa1, 2.0, max_relative = 1e-14);
        assert_relative_eq!(s.kappa2, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn burgers_rate_bounds() {
        let m = derive_burgers(1.0, 1.0, 1.0, 1.0).unwrap();
        let r = validate_exponential(&m.instantaneous, &m.kernel, None, 512).unwrap();
        let d = m.burgers[0];
        assert_eq!(r.kappa1, Some(d.r1));
        assert_eq!(r.kappa2, Some(d.r2));
        // Burgers is a fluid
        assert!(!r.satisfied);
        assert!(r.witness_t.is_none());
        let s = r.sharp.unwrap();
        assert!(s.kappa1 <= d.r1 && s.kappa2 >= d.r2 * (1.0 - 1e-12));
        // the sharp sup of -G'/G is the weighted mean at t = 0
        let mean = (d.b1 * d.r1 * d.r1 + d.b2 * d.r2 * d.r2) / (d.b1 * d.r1 + d.b2 * d.r2);
        assert_relative_eq!(s.kappa1, mean, max_relative = 1e-12);
    }

    #[test]
    fn maxwell_without_spring_fails_equilibrium() {
        let m = derive_maxwell(2.0, 1.0).unwrap();
        let r = validate_exponential(&m.instantaneous, &m.kernel, None, 512).unwrap();
        assert!(!r.satisfied);
        assert!(!r.equilibrium.strongly_convex);
        assert!(r.instantaneous.strongly_convex);
    }

    #[test]
    fn empty_kernel_is_flagged() {
        let r = validate_exponential(&VoigtTensor::scalar(1.0), &PronyKernel::empty(1).unwrap(), None, 8)
            .unwrap();
        assert!(r.satisfied && r.empty_kernel);
        assert!(r.kappa1.is_none());
    }

    #[test]
    fn non_commuting_mixture_is_sufficient_only() {
        let a = VoigtTensor::new(2, vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 0.2]])
            .unwrap();
        let b = VoigtTensor::identity(2).unwrap();
        let k = PronyKernel::new(vec![
            PronyTerm::new(a, 1.0).unwrap(),
            PronyTerm::new(b, 3.0).unwrap(),
        ])
        .unwrap();
        let c = VoigtTensor::isotropic(2, 2.0, 2.0).unwrap();
        let r = validate_exponential(&c, &k, None, 128).unwrap();
        assert!(!r.commuting && r.sufficient_only && r.sharp.is_none());
        assert!(r.witness_t.is_none(), "{:?}", r.notes);
    }

    #[test]
    fn polynomial_constants() {
        let k = PolynomialKernel::new(VoigtTensor::scalar(1.0), 1.0, 3.0, 3.0).unwrap();
        let r = validate_polynomial(&VoigtTensor::scalar(2.0), &k).unwrap();
        assert_eq!(r.kappa1, Some(9.0));
        assert_relative_eq!(r.kappa2.unwrap(), 9.0, max_relative = 1e-15);
        // G'' = a² p (p+1) (1+at)^{-p-2} gives 108, not a p (p+1) = 36
        assert_relative_eq!(r.kappa3.unwrap(), 108.0, max_relative = 1e-15);
        assert_eq!(r.kappa4, Some(10.0));
        assert!(r.satisfied, "{:?}", r.notes);
        assert_eq!(r.p, Some(3.0));
    }

    #[test]
    fn underestimated_polynomial_kappa3_is_caught() {
        // the constant a p (p+1) fails near t = 0 for a = 3, p = 3
        let k = PolynomialKernel::new(VoigtTensor::scalar(1.0), 1.0, 3.0, 3.0).unwrap();
        let g = KernelSpec::Polynomial(k);
        let gdd = g.eval(0.0, Order::Second).unwrap().get(0, 0);
        assert!(gdd > 36.0);
    }

    #[test]
    fn polynomial_tensor_amplitude() {
        let amp = VoigtTensor::new(2, vec![vec![1.0, 0.2, 0.0], vec![0.2, 0.6, 0.0], vec![0.0, 0.0, 0.3]])
            .unwrap();
        let k = PolynomialKernel::new(amp, 0.8, 2.0, 4.5).unwrap();
        let c = VoigtTensor::isotropic(2, 3.0, 3.0).unwrap();
        let r = validate_polynomial(&c, &k).unwrap();
        assert!(r.witness_t.is_none(), "{:?}", r.notes);
        assert!(r.satisfied);
    }
}
