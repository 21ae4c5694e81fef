//! ODE comparison bounds and decay-rate fitting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of `ẏ ≤ −M₂ y^{1+1/q} + M₃ (1+t)^{−q−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyBoundParams {
    pub y0: f64,
    pub m2: f64,
    pub m3: f64,
    pub q: f64,
}

impl PolyBoundParams {
    pub fn new(y0: f64, m2: f64, m3: f64, q: f64) -> Result<Self> {
        let p = Self { y0, m2, m3, q };
        p.check()?;
        Ok(p)
    }

    /// Rejects values outside the closed-form's domain. `q ∈ [1, 2]` is
    /// accepted; see [`PolyBoundParams::warning`].
    pub fn check(&self) -> Result<()> {
        if !(self.y0 >= 0.0 && self.y0.is_finite()) {
            return Err(Error::Domain(format!("y0 must be non-negative, got {}", self.y0)));
        }
        if !(self.m2 >= 0.0 && self.m2.is_finite() && self.m3 >= 0.0 && self.m3.is_finite()) {
            return Err(Error::Domain(format!(
                "M2 and M3 must be non-negative, got {} and {}",
                self.m2, self.m3
            )));
        }
        if !(self.q >= 1.0 && self.q.is_finite()) {
            return Err(Error::Domain(format!("q must be at least 1, got {}", self.q)));
        }
        Ok(())
    }

    /// Set when the parameters leave the lemma's hypotheses `M₂, M₃ > 0`, `q > 2`.
    pub fn warning(&self) -> Option<String> {
        if self.q <= 2.0 {
            Some(format!(
                "q = {} is outside the lemma's hypothesis q > 2; the closed form is evaluated anyway",
                self.q
            ))
        } else if self.m2 == 0.0 || self.m3 == 0.0 {
            Some("M2 and M3 are assumed positive by the lemma".into())
        } else {
            None
        }
    }
}

/// `q^q [(y₀ + 2M₂^q M₃)^{−1/q} + (2M₂)^{−1} M₃^{−1/q} t]^{−q}`.
pub fn poly_bound(p: &PolyBoundParams, t: f64) -> f64 {
    let q = p.q;
    let head = (p.y0 + 2.0 * p.m2.powf(q) * p.m3).powf(-1.0 / q);
    let bracket = if t == 0.0 {
        head
    } else {
        head + t / (2.0 * p.m2) * p.m3.powf(-1.0 / q)
    };
    q.powf(q) * bracket.powf(-q)
}

/// RK4 solution of the equality version of the differential inequality.
///
/// Stage values are clamped at zero. A non-finite step is retried with the
/// step halved, at most three times.
pub fn ode_oracle(p: &PolyBoundParams, t_end: f64, dt: f64) -> Result<Vec<(f64, f64)>> {
    p.check()?;
    let max_dt = 1e-3 * (if p.m2 > 0.0 { 1.0 / p.m2 } else { 1.0 }).max(1.0);
    if !(dt > 0.0 && dt <= max_dt * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!("dt must lie in (0, {max_dt:e}], got {dt:e}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("t_end must be non-negative, got {t_end}")));
    }
    let exponent = 1.0 + 1.0 / p.q;
    let f = |t: f64, y: f64| -p.m2 * y.max(0.0).powf(exponent) + p.m3 * (1.0 + t).powf(-p.q - 1.0);
    let rk4 = |t: f64, y: f64, h: f64| {
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, (y + 0.5 * h * k1).max(0.0));
        let k3 = f(t + 0.5 * h, (y + 0.5 * h * k2).max(0.0));
        let k4 = f(t + h, (y + h * k3).max(0.0));
        y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let steps = (t_end / dt).ceil() as usize;
    let h = if steps > 0 { t_end / steps as f64 } else { dt };
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = p.y0;
    out.push((0.0, y));
    for n in 0..steps {
        let t = n as f64 * h;
        let mut next = rk4(t, y, h);
        let mut halvings = 0;
        while !next.is_finite() {
            if halvings == 3 {
                return Err(Error::Stiffness { halvings, t });
            }
            halvings += 1;
            let sub = 1usize << halvings;
            let hs = h / sub as f64;
            let mut ys = y;
            for k in 0..sub {
                ys = rk4(t + k as f64 * hs, ys, hs).max(0.0);
            }
            next = ys;
        }
        y = next.max(0.0);
        out.push(((n + 1) as f64 * h, y));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub params: PolyBoundParams,
    pub passed: bool,
    /// `min (bound − y)/bound` over the trace; negative when violated.
    pub worst_margin: f64,
    pub worst_t: f64,
}

/// Relative slack allowed when comparing the ODE trace with the bound.
pub const LEMMA_SLACK: f64 = 1e-6;

/// Checks the ODE trace against the closed-form bound pointwise.
pub fn verify_lemma_2_1(p: &PolyBoundParams, t_end: f64, dt: f64) -> Result<LemmaCheck> {
    let trace = ode_oracle(p, t_end, dt)?;
    let mut check = LemmaCheck {
        params: *p,
        passed: true,
        worst_margin: f64::INFINITY,
        worst_t: 0.0,
    };
    for &(t, y) in &trace {
        let b = poly_bound(p, t);
        let margin = if b > 0.0 {
            (b - y) / b
        } else if y > 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        if margin < check.worst_margin {
            check.worst_margin = margin;
            check.worst_t = t;
        }
        if y > b * (1.0 + LEMMA_SLACK) {
            check.passed = false;
        }
    }
    Ok(check)
}

/// Seeded sweep with `y₀ ∈ [0,10]`, `M₂, M₃ ∈ [0.1,10]`, `q ∈ [2.1,8]`,
/// drawn uniformly in that order.
pub fn lemma_sweep(seed: u64, draws: usize, t_end: f64) -> Result<Vec<LemmaCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..draws)
        .map(|_| {
            let y0 = rng.gen_range(0.0..=10.0);
            let m2 = rng.gen_range(0.1..=10.0);
            let m3 = rng.gen_range(0.1..=10.0);
            let q = rng.gen_range(2.1..=8.0);
            let p = PolyBoundParams::new(y0, m2, m3, q)?;
            let dt = 1e-3 * (1.0 / m2).max(1.0);
            verify_lemma_2_1(&p, t_end, dt)
        })
        .collect()
}

/// Largest `m ≥ 1` with `p_m = 2^m − 1 < p − 1`.
pub fn pm_for(p: f64) -> Result<(u32, f64)> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must exceed 2, got {p}")));
    }
    let mut m = 1u32;
    while (((1u64 << (m + 1)) - 1) as f64) < p - 1.0 {
        m += 1;
    }
    Ok((m, ((1u64 << m) - 1) as f64))
}

/// `L₀ a₃ e^{−b₃ t}`.
pub fn exp_bound(l0: f64, a3: f64, b3: f64, t: f64) -> f64 {
    l0 * a3 * (-b3 * t).exp()
}

/// Solution of `ż = e^{−k t} − b z`, `z(0) = z0`.
pub fn exp_comparison(z0: f64, k: f64, b: f64, t: f64) -> f64 {
    let d = b - k;
    if d.abs() <= 1e-12 * b.abs().max(k.abs()).max(1.0) {
        (z0 + t) * (-b * t).exp()
    } else {
        z0 * (-b * t).exp() + ((-k * t).exp() - (-b * t).exp()) / d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpCheck {
    pub passed: bool,
    /// Fitted comparison rate; the check fails when it is not positive.
    pub b2: f64,
    pub a3: f64,
    pub b3: f64,
    /// `max y/z` over the trace.
    pub worst_ratio: f64,
    pub notes: Vec<String>,
}

/// Checks a normalized trace `y = 𝓛_e/𝓛_e(0)` against the comparison ODE.
///
/// `b₂` is the smallest sampled value of `(e^{−κ̃₄t} − ẏ)/y`, with `ẏ` by
/// central differences. The trace passes when `y ≤ (1 + slack) z` everywhere
/// and `b₂ > 0`. The envelope `a₃ e^{−b₃ t}` dominates `z`.
pub fn verify_exp(times: &[f64], values: &[f64], kappa4_tilde: f64, slack: f64) -> Result<ExpCheck> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(Error::Validation("exponential check needs at least 3 samples".into()));
    }
    let mut notes = Vec::new();
    let y0 = values[0];
    if y0 == 0.0 && values.iter().all(|&v| v == 0.0) {
        return Ok(ExpCheck {
            passed: true,
            b2: f64::INFINITY,
            a3: 1.0,
            b3: kappa4_tilde,
            worst_ratio: 0.0,
            notes: vec!["trace is identically zero".into()],
        });
    }
    if !(y0 > 0.0) {
        return Err(Error::Validation(format!("trace must start positive, got {y0}")));
    }
    let y: Vec<f64> = values.iter().map(|v| v / y0).collect();
    let mut b2 = f64::INFINITY;
    for i in 1..y.len() - 1 {
        if y[i] <= 0.0 {
            notes.push(format!("non-positive trace value at t = {}", times[i]));
            continue;
        }
        let dy = (y[i + 1] - y[i - 1]) / (times[i + 1] - times[i - 1]);
        b2 = b2.min(((-kappa4_tilde * times[i]).exp() - dy) / y[i]);
    }
    if !(b2 > 0.0 && b2.is_finite()) {
        return Ok(ExpCheck {
            passed: false,
            b2,
            a3: f64::NAN,
            b3: f64::NAN,
            worst_ratio: f64::NAN,
            notes: vec![format!("fitted b2 = {b2} is not positive")],
        });
    }
    let z0 = 1.0;
    let k = kappa4_tilde;
    let (a3, b3) = if (b2 - k).abs() <= 1e-12 * b2.max(k) {
        (1.0 + 2.0 / (std::f64::consts::E * b2 * z0), 0.5 * b2)
    } else if b2 < k {
        (1.0 + 1.0 / (z0 * (k - b2)), b2)
    } else {
        (1.0 + 1.0 / (z0 * (b2 - k)), k)
    };
    let mut worst: f64 = 0.0;
    let mut passed = true;
    for (&t, &v) in times.iter().zip(&y) {
        let z = exp_comparison(z0, k, b2, t);
        if z > 0.0 {
            worst = worst.max(v / z);
        }
        if v > (1.0 + slack) * z {
            passed = false;
        }
    }
    Ok(ExpCheck {
        passed,
        b2,
        a3,
        b3,
        worst_ratio: worst,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `y ≈ A (1+t)^{k}`; the parameter is the exponent `k`.
    Power,
    /// `y ≈ A e^{−λ t}`; the parameter is the rate `λ`.
    Exponential,
}

impl std::str::FromStr for DecayModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(DecayModel::Power),
            "exp" | "exponential" => Ok(DecayModel::Exponential),
            other => Err(Error::Config(format!("unknown decay model '{other}' (use power or exp)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Exponent (power model) or rate (exponential model).
    pub parameter: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub points: usize,
    /// Samples in the window dropped for being non-positive.
    pub dropped: usize,
}

/// Least-squares fit of `log y` against `log(1+t)` or `t`.
///
/// The window defaults to the second half of the sampled interval.
pub fn fit_decay(times: &[f64], values: &[f64], model: DecayModel, window: Option<(f64, f64)>) -> Result<DecayFit> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::Validation("times and values must be non-empty and of equal length".into()));
    }
    let (t0, t1) = match window {
        Some(w) => w,
        None => {
            let end = times[times.len() - 1];
            (0.5 * (times[0] + end), end)
        }
    };
    if !(t0 <= t1) {
        return Err(Error::Validation(format!("empty fit window [{t0}, {t1}]")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dropped = 0;
    for (&t, &y) in times.iter().zip(values) {
        if t < t0 || t > t1 {
            continue;
        }
        if !(y > 0.0 && y.is_finite()) {
            dropped += 1;
            continue;
        }
        xs.push(match model {
            DecayModel::Power => (1.0 + t).ln(),
            DecayModel::Exponential => t,
        });
        ys.push(y.ln());
    }
    if xs.len() < 2 {
        return Err(Error::Validation(format!(
            "fit window [{t0}, {t1}] holds {} positive samples; need 2",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Validation("fit window holds a single abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecayFit {
        model,
        parameter: match model {
            DecayModel::Power => slope,
            DecayModel::Exponential => -slope,
        },
        intercept,
        r_squared,
        t_lo: t0,
        t_hi: t1,
        points: xs.len(),
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bound_examples() {
        let p = PolyBoundParams::new(1.0, 1.0, 1.0, 3.0).unwrap();
        assert_relative_eq!(poly_bound(&p, 0.0), 81.0, max_relative = 1e-14);
        let z = PolyBoundParams::new(0.0, 1.0, 1.0, 3.0).unwrap();
        assert_relative_eq!(poly_bound(&z, 0.0), 27.0 * 2.0, max_relative = 1e-14);
        let t = 1e7;
        assert_relative_eq!(poly_bound(&p, t) * t.powf(3.0), 27.0 * 8.0, max_relative = 1e-5);
    }

    #[test]
    fn pm_examples() {
        assert_eq!(pm_for(3.0).unwrap(), (1, 1.0));
        assert_eq!(pm_for(10.0).unwrap(), (3, 7.0));
        assert_eq!(pm_for(2.5).unwrap(), (1, 1.0));
        assert!(pm_for(2.0).is_err());
    }

    #[test]
    fn oracle_matches_separable_solution() {
        let p = PolyBoundParams::new(2.0, 1.5, 0.0, 3.0).unwrap();
        for &(t, y) in ode_oracle(&p, 5.0, 1e-3).unwrap().iter().step_by(500) {
            let exact = (2f64.powf(-1.0 / 3.0) + 1.5 * t / 3.0).powf(-3.0);
            assert_relative_eq!(y, exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn oracle_matches_pure_integration() {
        let p = PolyBoundParams { y0: 0.0, m2: 0.0, m3: 2.0, q: 3.0 };
        for &(t, y) in ode_oracle(&p, 4.0, 1e-3).unwrap().iter().step_by(400) {
            let exact = 2.0 * (1.0 - (1.0 + t).powf(-3.0)) / 3.0;
            assert_relative_eq!(y, exact, max_relative = 1e-10, epsilon = 1e-14);
        }
    }

    #[test]
    fn resonant_comparison() {
        let z = exp_comparison(2.0, 0.7, 0.7, 3.0);
        assert_relative_eq!(z, 5.0 * (-2.1f64).exp(), max_relative = 1e-14);
        let v = verify_exp(&[0.0, 1.0, 2.0], &[0.0; 3], 1.0, 0.05).unwrap();
        assert!(v.passed);
    }

    #[test]
    fn fits_recover_synthetic_models() {
        let t: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = t.iter().map(|t| (1.0 + t).powf(-2.0)).collect();
        let f = fit_decay(&t, &y, DecayModel::Power, None).unwrap();
        assert!((f.parameter + 2.0).abs() < 1e-6);
        assert!((f.r_squared - 1.0).abs() < 1e-9);
        let y: Vec<f64> = t.iter().map(|t| 5.0 * (-0.7 * t).exp()).collect();
        let f = fit_decay(&t, &y, DecayModel::Exponential, None).unwrap();
        assert!((f.parameter - 0.7).abs() < 1e-6);
        assert!((f.intercept - 5f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn fit_trims_non_positive_values() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 0.5, -1.0, 0.125, 0.0625];
        let f = fit_decay(&t, &y, DecayModel::Exponential, Some((0.0, 4.0))).unwrap();
        assert_eq!(f.dropped, 1);
        assert_eq!(f.points, 4);
    }
}
