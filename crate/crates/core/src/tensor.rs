//! Rank-4 elasticity and relaxation tensors in symmetric matrix form.
//!
//! Tensors are stored in the Mandel (Kelvin) basis: the shear rows and
//! columns carry a factor √2, so that the basis of symmetric n×n matrices is
//! orthonormal. With that convention the contraction `(Cw):w` equals the
//! plain quadratic form `wᵀ C w` of the stored matrix on the Mandel vector of
//! `w`, and `|w|²` equals the Euclidean norm of that vector. The extreme
//! eigenvalues of the stored matrix are therefore the sharp constants in
//! `α₀|w|² ≤ (Cw):w ≤ β₀|w|²`.
//!
//! [`VoigtTensor::from_voigt`] converts an engineering-Voigt stiffness matrix
//! (the usual textbook layout) into this storage.

use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;

const MAX_SWEEPS: usize = 100;
const OFFDIAG_REL_THRESHOLD: f64 = 1e-14;

/// Voigt index pairs (0-based) in the order 11, 22, 33, 23, 13, 12.
const VOIGT_PAIRS_3D: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
/// Order 11, 22, 12 in two dimensions.
const VOIGT_PAIRS_2D: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

/// Symmetric matrix representation of a rank-4 tensor with major symmetry.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor", into = "RawTensor")]
pub struct VoigtTensor {
    dim: usize,
    size: usize,
    entries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTensor {
    dim: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<RawTensor> for VoigtTensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        VoigtTensor::new(raw.dim, raw.entries)
    }
}

impl From<VoigtTensor> for RawTensor {
    fn from(t: VoigtTensor) -> Self {
        RawTensor { dim: t.dim, entries: t.rows() }
    }
}

/// Size of the symmetric-matrix space for spatial dimension `dim`.
pub fn voigt_size(dim: usize) -> Result<usize> {
    match dim {
        1 => Ok(1),
        2 => Ok(3),
        3 => Ok(6),
        _ => Err(Error::Validation(format!(
            "spatial dimension must be 1, 2 or 3, got {dim}"
        ))),
    }
}

impl VoigtTensor {
    /// Builds a tensor from full rows given in the Mandel basis.
    ///
    /// Rows must be exactly symmetric and finite.
    pub fn new(dim: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = voigt_size(dim)?;
        if rows.len() != size || rows.iter().any(|r| r.len() != size) {
            return Err(Error::Validation(format!(
                "dimension {dim} needs a {size}x{size} matrix"
            )));
        }
        for i in 0..size {
            for j in 0..size {
                if !rows[i][j].is_finite() {
                    return Err(Error::Validation(format!(
                        "non-finite entry at ({i}, {j})"
                    )));
                }
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Validation(format!(
                        "entries ({i}, {j}) and ({j}, {i}) differ: major symmetry violated"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            size,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Converts an engineering-Voigt stiffness matrix (shear strains doubled)
    /// into the Mandel storage used here.
    pub fn from_voigt(dim: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let t = Self::new(dim, rows)?;
        let w = t.mandel_weights();
        Ok(t.map_indexed(|i, j, v| v * w[i] * w[j]))
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            dim: 1,
            size: 1,
            entries: vec![value],
        }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        let size = voigt_size(dim)?;
        Ok(Self {
            dim,
            size,
            entries: vec![0.0; size * size],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut t = Self::zeros(dim)?;
        for i in 0..t.size {
            t.entries[i * t.size + i] = 1.0;
        }
        Ok(t)
    }

    /// Isotropic tensor `λ I⊗I + 2μ 𝕀` in Mandel form.
    pub fn isotropic(dim: usize, lambda: f64, mu: f64) -> Result<Self> {
        let mut t = Self::zeros(dim)?;
        let size = t.size;
        for i in 0..size {
            for j in 0..size {
                let normal_i = i < dim;
                let normal_j = j < dim;
                let mut v = 0.0;
                if normal_i && normal_j {
                    v += lambda;
                }
                if i == j {
                    v += 2.0 * mu;
                }
                t.entries[i * size + j] = v;
            }
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.size).map(|r| r.to_vec()).collect()
    }

    /// The single entry of a one-dimensional tensor.
    pub fn as_scalar(&self) -> Option<f64> {
        (self.size == 1).then(|| self.entries[0])
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map_indexed(|_, _, v| v * factor)
    }

    /// Frobenius norm of the stored matrix.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn frobenius_dot(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(self.map_indexed(|i, j, v| v + other.get(i, j)))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(self.map_indexed(|i, j, v| v - other.get(i, j)))
    }

    /// `(T w) : w` for a symmetric n×n matrix `w`.
    pub fn contract(&self, w: &[Vec<f64>]) -> Result<f64> {
        let v = self.mandel_vector(w)?;
        let mut acc = 0.0;
        for i in 0..self.size {
            for j in 0..self.size {
                acc += self.get(i, j) * v[i] * v[j];
            }
        }
        Ok(acc)
    }

    /// Mandel vector of a symmetric n×n matrix; its Euclidean norm is `|w|`.
    pub fn mandel_vector(&self, w: &[Vec<f64>]) -> Result<Vec<f64>> {
        if w.len() != self.dim || w.iter().any(|r| r.len() != self.dim) {
            return Err(Error::Validation(format!(
                "expected a {0}x{0} strain matrix",
                self.dim
            )));
        }
        let pairs: &[(usize, usize)] = match self.dim {
            1 => &[(0, 0)],
            2 => &VOIGT_PAIRS_2D,
            _ => &VOIGT_PAIRS_3D,
        };
        Ok(pairs
            .iter()
            .map(|&(i, j)| {
                if i == j {
                    w[i][i]
                } else {
                    0.5 * (w[i][j] + w[j][i]) * std::f64::consts::SQRT_2
                }
            })
            .collect())
    }

    /// Eigen-decomposition by cyclic Jacobi rotations.
    pub fn eigen(&self) -> SymmetricEigen {
        jacobi_eigen(&self.entries, self.size)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().values
    }

    /// Applies `f` to the spectrum: `V diag(f(λ)) Vᵀ`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let eig = self.eigen();
        let n = self.size;
        let mut out = vec![0.0; n * n];
        for (k, &lambda) in eig.values.iter().enumerate() {
            let fl = f(lambda);
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += fl * eig.vectors[i * n + k] * eig.vectors[j * n + k];
                }
            }
        }
        // symmetrize against rounding so the structural invariant survives
        for i in 0..n {
            for j in (i + 1)..n {
                let m = 0.5 * (out[i * n + j] + out[j * n + i]);
                out[i * n + j] = m;
                out[j * n + i] = m;
            }
        }
        Self {
            dim: self.dim,
            size: n,
            entries: out,
        }
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Validation(format!(
                "tensor dimensions differ: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    fn mandel_weights(&self) -> Vec<f64> {
        (0..self.size)
            .map(|i| if i < self.dim { 1.0 } else { std::f64::consts::SQRT_2 })
            .collect()
    }

    fn map_indexed(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let n = self.size;
        let mut entries = self.entries.clone();
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = f(i, j, self.entries[i * n + j]);
            }
        }
        Self {
            dim: self.dim,
            size: n,
            entries,
        }
    }
}

impl fmt::Debug for VoigtTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VoigtTensor")
            .field("dim", &self.dim)
            .field("entries", &self.rows())
            .finish()
    }
}

impl Add for &VoigtTensor {
    type Output = VoigtTensor;

    /// Panics on dimension mismatch; use [`VoigtTensor::checked_add`] otherwise.
    fn add(self, rhs: Self) -> VoigtTensor {
        self.checked_add(rhs).expect("tensor dimensions must agree")
    }
}

impl Sub for &VoigtTensor {
    type Output = VoigtTensor;

    fn sub(self, rhs: Self) -> VoigtTensor {
        self.checked_sub(rhs).expect("tensor dimensions must agree")
    }
}

/// Eigenvalues in ascending order with column eigenvectors (row-major `n×n`).
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub sweeps: usize,
}

/// Cyclic Jacobi eigen-solver for a small dense symmetric matrix.
pub fn jacobi_eigen(matrix: &[f64], n: usize) -> SymmetricEigen {
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = OFFDIAG_REL_THRESHOLD * norm;
    let mut sweeps = 0;

    while sweeps < MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    SymmetricEigen {
        values,
        vectors,
        sweeps,
    }
}

/// Extreme eigenvalues of a tensor and the strong convexity verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub alpha0: f64,
    pub beta0: f64,
    pub strongly_convex: bool,
}

impl ConvexityReport {
    fn from_bounds(alpha0: f64, beta0: f64) -> Self {
        Self {
            alpha0,
            beta0,
            strongly_convex: alpha0 > eig_tolerance(beta0),
        }
    }
}

/// Scale-aware zero threshold for the smallest eigenvalue.
pub fn eig_tolerance(beta0: f64) -> f64 {
    1e-10 * beta0.max(1.0)
}

pub fn convexity_bounds(t: &VoigtTensor) -> Result<ConvexityReport> {
    if !t.is_finite() {
        return Err(Error::Validation("tensor has non-finite entries".into()));
    }
    let values = t.eigenvalues();
    Ok(ConvexityReport::from_bounds(
        values[0],
        values[values.len() - 1],
    ))
}

/// Per-cell certification: α₀ is the minimum over cells, β₀ the maximum.
pub fn convexity_bounds_cells(cells: &[VoigtTensor]) -> Result<ConvexityReport> {
    if cells.is_empty() {
        return Err(Error::Validation("no cells to certify".into()));
    }
    let mut alpha0 = f64::INFINITY;
    let mut beta0 = f64::NEG_INFINITY;
    for c in cells {
        let r = convexity_bounds(c)?;
        alpha0 = alpha0.min(r.alpha0);
        beta0 = beta0.max(r.beta0);
    }
    Ok(ConvexityReport::from_bounds(alpha0, beta0))
}

/// `C − ∫₀^∞ G(t) dt`.
pub fn equilibrium_tensor(c: &VoigtTensor, kernel: &KernelSpec) -> Result<VoigtTensor> {
    let total = kernel.integral_to_infinity()?;
    let eq = c.checked_sub(&total)?;
    if !eq.is_finite() {
        return Err(Error::Domain("equilibrium tensor is not finite".into()));
    }
    Ok(eq)
}

/// Convexity bounds of the equilibrium tensor; the fields read as μ₀ and ν₀.
pub fn certify_equilibrium(c: &VoigtTensor, kernel: &KernelSpec) -> Result<ConvexityReport> {
    convexity_bounds(&equilibrium_tensor(c, kernel)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{PolynomialKernel, PronyKernel, PronyTerm};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prony1(g: f64, r: f64) -> KernelSpec {
        KernelSpec::Prony(
            PronyKernel::new(vec![PronyTerm::new(VoigtTensor::scalar(g), r).unwrap()]).unwrap(),
        )
    }

    #[test]
    fn scalar_and_identity_bounds() {
        let r = convexity_bounds(&VoigtTensor::scalar(2.5)).unwrap();
        assert_eq!((r.alpha0, r.beta0), (2.5, 2.5));
        for dim in 1..=3 {
            let r = convexity_bounds(&VoigtTensor::identity(dim).unwrap()).unwrap();
            assert_relative_eq!(r.alpha0, 1.0);
            assert_relative_eq!(r.beta0, 1.0);
            assert!(r.strongly_convex);
        }
    }

    #[test]
    fn two_by_two_example() {
        let e = jacobi_eigen(&[2.0, 1.0, 1.0, 2.0], 2);
        assert_relative_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(e.values[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_asymmetric_and_nonfinite() {
        let bad = VoigtTensor::new(2, vec![vec![1.0, 0.5, 0.0], vec![0.4, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert!(matches!(bad, Err(Error::Validation(_))));
        let nan = VoigtTensor::new(1, vec![vec![f64::NAN]]);
        assert!(matches!(nan, Err(Error::Validation(_))));
        assert!(VoigtTensor::new(4, vec![]).is_err());
    }

    #[test]
    fn equilibrium_examples() {
        let c = VoigtTensor::scalar(4.0);
        let eq = equilibrium_tensor(&c, &prony1(4.0, 2.0)).unwrap();
        assert_eq!(eq.as_scalar(), Some(2.0));

        let empty = KernelSpec::Prony(PronyKernel::empty(3).unwrap());
        let c3 = VoigtTensor::isotropic(3, 1.0, 0.7).unwrap();
        assert_eq!(equilibrium_tensor(&c3, &empty).unwrap(), c3);

        let poly = KernelSpec::Polynomial(
            PolynomialKernel::new(VoigtTensor::scalar(1.0), 1.0, 3.0, 3.0).unwrap(),
        );
        let eq = equilibrium_tensor(&VoigtTensor::scalar(2.0), &poly).unwrap();
        assert_relative_eq!(eq.as_scalar().unwrap(), 2.0 - 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn certify_examples() {
        let r = certify_equilibrium(&VoigtTensor::scalar(4.0), &prony1(4.0, 2.0)).unwrap();
        assert_eq!(r.alpha0, 2.0);
        assert!(r.strongly_convex);

        let r = certify_equilibrium(&VoigtTensor::scalar(1.0), &prony1(2.0, 1.0)).unwrap();
        assert_eq!(r.alpha0, -1.0);
        assert!(!r.strongly_convex);

        let empty = KernelSpec::Prony(PronyKernel::empty(2).unwrap());
        let r = certify_equilibrium(&VoigtTensor::identity(2).unwrap(), &empty).unwrap();
        assert_eq!((r.alpha0, r.beta0), (1.0, 1.0));
    }

    #[test]
    fn from_voigt_matches_tensor_contraction() {
        // isotropic Lamé tensor written in engineering Voigt form
        let (lambda, mu) = (1.3, 0.8);
        let mut rows = vec![vec![0.0; 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                rows[i][j] = lambda + if i == j { 2.0 * mu } else { 0.0 };
            }
            rows[i + 3][i + 3] = mu;
        }
        let t = VoigtTensor::from_voigt(3, rows).unwrap();
        let iso = VoigtTensor::isotropic(3, lambda, mu).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((t.get(i, j) - iso.get(i, j)).abs() < 1e-14);
            }
        }
        let w = vec![
            vec![0.3, -0.2, 0.5],
            vec![-0.2, 1.1, 0.05],
            vec![0.5, 0.05, -0.4],
        ];
        // (Cw):w = λ (tr w)² + 2μ w:w
        let tr: f64 = (0..3).map(|i| w[i][i]).sum();
        let ww: f64 = w.iter().flatten().map(|x| x * x).sum();
        assert_relative_eq!(
            t.contract(&w).unwrap(),
            lambda * tr * tr + 2.0 * mu * ww,
            max_relative = 1e-14
        );
        let eig = t.eigenvalues();
        assert_relative_eq!(eig[0], 2.0 * mu, max_relative = 1e-12);
        assert_relative_eq!(eig[5], 3.0 * lambda + 2.0 * mu, max_relative = 1e-12);
    }

    fn random_symmetric(rng: &mut ChaCha8Rng, dim: usize) -> VoigtTensor {
        let n = voigt_size(dim).unwrap();
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen_range(-2.0..2.0);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        VoigtTensor::new(dim, rows).unwrap()
    }

    #[test]
    fn bounds_enclose_quadratic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 1..=3 {
            let t = random_symmetric(&mut rng, dim);
            let r = convexity_bounds(&t).unwrap();
            assert!(r.alpha0 <= r.beta0);
            for _ in 0..1000 {
                let mut w = vec![vec![0.0; dim]; dim];
                for i in 0..dim {
                    for j in i..dim {
                        let v: f64 = rng.gen_range(-1.0..1.0);
                        w[i][j] = v;
                        w[j][i] = v;
                    }
                }
                let norm2: f64 = w.iter().flatten().map(|x| x * x).sum();
                if norm2 < 1e-12 {
                    continue;
                }
                let ratio = t.contract(&w).unwrap() / norm2;
                let slack = 1e-12 * r.alpha0.abs().max(r.beta0.abs()).max(1.0);
                assert!(ratio >= r.alpha0 - slack && ratio <= r.beta0 + slack);
            }
        }
    }

    #[test]
    fn spectral_map_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_symmetric(&mut rng, 3);
        let back = t.map_spectrum(|x| x);
        for i in 0..6 {
            for j in 0..6 {
                assert!((back.get(i, j) - t.get(i, j)).abs() < 1e-12);
            }
        }
    }
}
