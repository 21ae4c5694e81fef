//! Hereditary integrals `∫₀ᵗ G(t−τ) ε(τ) dτ` and the history quadratic forms.
//!
//! Both backends apply the trapezoidal rule on the step grid. The Prony
//! backend carries it by the exact exponential recursion, so the two agree to
//! rounding on any Prony kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::ScalarKernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Stored strain history, `O(n)` work per step.
    #[default]
    Dense,
    /// Recursive accumulators, Prony kernels only.
    Prony,
}

/// Per-cell history quantities at a sample time; kernel scaling applied.
#[derive(Debug, Clone, Default)]
pub struct HistoryTerms {
    /// `∫ Ġ(t−τ) ε(τ) dτ`.
    pub conv_gdot: Vec<f64>,
    /// `G□∂u`.
    pub box_g_u: Vec<f64>,
    /// `Ġ□∂u`.
    pub box_gdot_u: Vec<f64>,
    /// `G□∂u̇`.
    pub box_g_v: Vec<f64>,
    /// `Ġ□∂u̇`.
    pub box_gdot_v: Vec<f64>,
}

impl HistoryTerms {
    fn zeros(cells: usize) -> Self {
        Self {
            conv_gdot: vec![0.0; cells],
            box_g_u: vec![0.0; cells],
            box_gdot_u: vec![0.0; cells],
            box_g_v: vec![0.0; cells],
            box_gdot_v: vec![0.0; cells],
        }
    }
}

/// Four-way unrolled dot product.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// `Σ_k lag[k] (e_n − e_k)²` over the slice, trapezoid end weights applied.
fn box_sum(lag: &[f64], hist: &[f64]) -> f64 {
    let n = hist.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let en = hist[n];
    let mut acc = [0.0f64; 4];
    let body = &hist[..n];
    let lb = &lag[..n];
    let ch = body.chunks_exact(4);
    let cl = lb.chunks_exact(4);
    let (rh, rl) = (ch.remainder(), cl.remainder());
    for (x, g) in ch.zip(cl) {
        for i in 0..4 {
            let d = en - x[i];
            acc[i] += g[i] * d * d;
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, g) in rh.iter().zip(rl) {
        let d = en - x;
        s += g * d * d;
    }
    let d0 = en - hist[0];
    s - 0.5 * lag[0] * d0 * d0
}

struct DenseMemory {
    /// `G` at lags `L-1, L-2, ..., 0` steps (reversed).
    g_rev: Vec<f64>,
    gdot_rev: Vec<f64>,
    /// Per-cell strain history.
    eps: Vec<Vec<f64>>,
    epsdot: Vec<Vec<f64>>,
}

impl DenseMemory {
    fn lag_slice<'a>(&self, table: &'a [f64], n: usize) -> &'a [f64] {
        let len = table.len();
        &table[len - 1 - n..]
    }

    /// Trapezoid of `lag ⋆ hist` at step `n = hist.len() - 1`.
    fn conv(&self, table: &[f64], hist: &[f64]) -> f64 {
        let n = hist.len() - 1;
        if n == 0 {
            return 0.0;
        }
        let lag = self.lag_slice(table, n);
        dot(lag, hist) - 0.5 * (lag[0] * hist[0] + lag[n] * hist[n])
    }

    fn boxp(&self, table: &[f64], hist: &[f64]) -> f64 {
        let n = hist.len() - 1;
        box_sum(self.lag_slice(table, n), hist)
    }
}

struct PronyMemory {
    /// `(amplitude, rate, e^{-rΔt})` per term.
    terms: Vec<(f64, f64, f64)>,
    /// Indexed `[term][cell]`.
    psi: Vec<Vec<f64>>,
    phi: Vec<Vec<f64>>,
    chi: Vec<Vec<f64>>,
    xi: Vec<Vec<f64>>,
    /// Trapezoid of `e^{-r(t−τ)}` per term.
    w: Vec<f64>,
    prev_eps: Vec<f64>,
    prev_epsdot: Vec<f64>,
    rate_pushed: bool,
}

enum Kind {
    Elastic,
    Dense(DenseMemory),
    Prony(PronyMemory),
}

pub struct Memory {
    dt: f64,
    scale: Vec<f64>,
    /// Index of the latest strain sample.
    n: usize,
    kind: Kind,
}

impl Memory {
    /// `max_steps` bounds the time index the dense lag tables must reach.
    pub fn new(
        kernel: &ScalarKernel,
        scale: &[f64],
        dt: f64,
        max_steps: usize,
        backend: Backend,
        eps0: &[f64],
    ) -> Result<Self> {
        let cells = scale.len();
        let kind = if kernel.is_empty() || scale.iter().all(|&s| s == 0.0) {
            Kind::Elastic
        } else {
            match backend {
                Backend::Prony => {
                    let terms = kernel.prony_terms().ok_or_else(|| {
                        Error::Config("the prony backend needs a Prony kernel; use the dense backend".into())
                    })?;
                    let terms: Vec<_> = terms.iter().map(|&(g, r)| (g, r, (-r * dt).exp())).collect();
                    let zeros = vec![vec![0.0; cells]; terms.len()];
                    Kind::Prony(PronyMemory {
                        w: vec![0.0; terms.len()],
                        terms,
                        psi: zeros.clone(),
                        phi: zeros.clone(),
                        chi: zeros.clone(),
                        xi: zeros,
                        prev_eps: eps0.to_vec(),
                        prev_epsdot: vec![0.0; cells],
                        rate_pushed: false,
                    })
                }
                Backend::Dense => {
                    let len = max_steps + 2;
                    let table = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
                        (0..len).rev().map(|k| f(k as f64 * dt)).collect()
                    };
                    let g_rev = table(&|t| kernel.g(t));
                    let gdot_rev = table(&|t| kernel.g_dot(t));
                    let mut eps = Vec::with_capacity(cells);
                    for &e in eps0 {
                        let mut h = Vec::with_capacity(len);
                        h.push(e);
                        eps.push(h);
                    }
                    Kind::Dense(DenseMemory {
                        g_rev,
                        gdot_rev,
                        eps,
                        epsdot: (0..cells).map(|_| Vec::with_capacity(len)).collect(),
                    })
                }
            }
        };
        Ok(Self {
            dt,
            scale: scale.to_vec(),
            n: 0,
            kind,
        })
    }

    pub fn is_elastic(&self) -> bool {
        matches!(self.kind, Kind::Elastic)
    }

    /// Memory stress `∫₀ᵗ G(t−τ) ε(τ) dτ` per cell at the current step.
    pub fn stress(&self, out: &mut [f64]) {
        match &self.kind {
            Kind::Elastic => out.iter_mut().for_each(|s| *s = 0.0),
            Kind::Dense(d) => {
                for (c, s) in out.iter_mut().enumerate() {
                    *s = self.scale[c] * self.dt * d.conv(&d.g_rev, &d.eps[c]);
                }
            }
            Kind::Prony(p) => {
                out.iter_mut().for_each(|s| *s = 0.0);
                for (j, &(g, _, _)) in p.terms.iter().enumerate() {
                    for (c, s) in out.iter_mut().enumerate() {
                        *s += g * p.psi[j][c];
                    }
                }
                for (s, k) in out.iter_mut().zip(&self.scale) {
                    *s *= k;
                }
            }
        }
    }

    /// Records the strain-rate sample at the current step.
    pub fn push_rate(&mut self, epsdot: &[f64]) {
        let half = 0.5 * self.dt;
        match &mut self.kind {
            Kind::Elastic => {}
            Kind::Dense(d) => {
                for (h, &e) in d.epsdot.iter_mut().zip(epsdot) {
                    debug_assert_eq!(h.len(), self.n);
                    h.push(e);
                }
            }
            Kind::Prony(p) => {
                if p.rate_pushed {
                    for (j, &(_, _, decay)) in p.terms.iter().enumerate() {
                        for c in 0..epsdot.len() {
                            let (a, b) = (p.prev_epsdot[c], epsdot[c]);
                            p.chi[j][c] = decay * p.chi[j][c] + half * (decay * a + b);
                            p.xi[j][c] = decay * p.xi[j][c] + half * (decay * a * a + b * b);
                        }
                    }
                }
                p.prev_epsdot.copy_from_slice(epsdot);
                p.rate_pushed = true;
            }
        }
    }

    /// Appends the strain at the next step.
    pub fn advance(&mut self, eps_next: &[f64]) {
        let half = 0.5 * self.dt;
        match &mut self.kind {
            Kind::Elastic => {}
            Kind::Dense(d) => {
                for (h, &e) in d.eps.iter_mut().zip(eps_next) {
                    h.push(e);
                }
            }
            Kind::Prony(p) => {
                for (j, &(_, _, decay)) in p.terms.iter().enumerate() {
                    for c in 0..eps_next.len() {
                        let (a, b) = (p.prev_eps[c], eps_next[c]);
                        p.psi[j][c] = decay * p.psi[j][c] + half * (decay * a + b);
                        p.phi[j][c] = decay * p.phi[j][c] + half * (decay * a * a + b * b);
                    }
                    p.w[j] = decay * p.w[j] + half * (decay + 1.0);
                }
                p.prev_eps.copy_from_slice(eps_next);
            }
        }
        self.n += 1;
    }

    /// History quantities at the current step; requires [`Memory::push_rate`]
    /// to have been called for this step.
    pub fn history_terms(&self, eps: &[f64], epsdot: &[f64]) -> Result<HistoryTerms> {
        let cells = eps.len();
        let mut out = HistoryTerms::zeros(cells);
        match &self.kind {
            Kind::Elastic => {}
            Kind::Dense(d) => {
                for c in 0..cells {
                    if d.epsdot[c].len() != self.n + 1 {
                        return Err(Error::InsufficientHistory(format!(
                            "strain-rate history holds {} samples at step {}; sample every step (stride 1 in steps)",
                            d.epsdot[c].len(),
                            self.n
                        )));
                    }
                    let k = self.scale[c] * self.dt;
                    out.conv_gdot[c] = k * d.conv(&d.gdot_rev, &d.eps[c]);
                    out.box_g_u[c] = k * d.boxp(&d.g_rev, &d.eps[c]);
                    out.box_gdot_u[c] = k * d.boxp(&d.gdot_rev, &d.eps[c]);
                    out.box_g_v[c] = k * d.boxp(&d.g_rev, &d.epsdot[c]);
                    out.box_gdot_v[c] = k * d.boxp(&d.gdot_rev, &d.epsdot[c]);
                }
            }
            Kind::Prony(p) => {
                if !p.rate_pushed {
                    return Err(Error::InsufficientHistory("no strain-rate sample recorded".into()));
                }
                for (j, &(g, r, _)) in p.terms.iter().enumerate() {
                    let w = p.w[j];
                    for c in 0..cells {
                        let (e, v) = (eps[c], epsdot[c]);
                        let bu = e * e * w - 2.0 * e * p.psi[j][c] + p.phi[j][c];
                        let bv = v * v * w - 2.0 * v * p.chi[j][c] + p.xi[j][c];
                        out.conv_gdot[c] -= r * g * p.psi[j][c];
                        out.box_g_u[c] += g * bu;
                        out.box_gdot_u[c] -= r * g * bu;
                        out.box_g_v[c] += g * bv;
                        out.box_gdot_v[c] -= r * g * bv;
                    }
                }
                for c in 0..cells {
                    let k = self.scale[c];
                    out.conv_gdot[c] *= k;
                    out.box_g_u[c] *= k;
                    out.box_gdot_u[c] *= k;
                    out.box_g_v[c] *= k;
                    out.box_gdot_v[c] *= k;
                }
            }
        }
        Ok(out)
    }
}
