//! Operator abstractions: linear maps with adjoints, resolvents of maximally
//! monotone operators, and cocoercive single-valued operators, together with
//! the concrete instances used by the solvers and the SVM benchmark.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::{operator_norm_estimate, PowerIterOptions};
use crate::vector;

/// A bounded linear map `L: R^in -> R^out` together with its adjoint.
pub trait LinearMap: Send + Sync {
    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    /// `out = L x`
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// `out = L* y`
    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]);
}

impl fmt::Debug for dyn LinearMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearMap({} -> {})", self.in_dim(), self.out_dim())
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            vector::check_len(r, cols)?;
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.apply(x, &mut out);
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol * (1.0 + self.get(i, j).abs()))
            })
    }
}

impl LinearMap for DenseMatrix {
    fn in_dim(&self) -> usize {
        self.cols
    }

    fn out_dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = vector::dot(row, x);
        }
    }

    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (yi, row) in y.iter().zip(self.data.chunks_exact(self.cols)) {
            vector::axpy(*yi, row, out);
        }
    }
}

/// Resolvent `J_{gamma A} = (Id + gamma A)^{-1}` of a maximally monotone
/// operator. For `A = ∂g` this is `prox_{gamma g}`.
pub trait Resolvent: Send + Sync {
    fn dim(&self) -> Option<usize> {
        None
    }
    fn resolve(&self, gamma: f64, w: &[f64], out: &mut [f64]);
}

/// Single-valued `1/beta`-cocoercive operator. `beta == 0` encodes `C ≡ 0`.
pub trait Cocoercive: Send + Sync {
    fn eval(&self, x: &[f64], out: &mut [f64]);
    fn beta(&self) -> f64;
}

/// Soft-thresholding by `theta` on the selected coordinates; the others pass
/// through unchanged. `mask == None` thresholds everything.
pub fn prox_l1(x: &[f64], theta: f64, mask: Option<&[bool]>) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    prox_l1_into(x, theta, mask, &mut out);
    out
}

fn soft_threshold(v: f64, theta: f64) -> f64 {
    if v > theta {
        v - theta
    } else if v < -theta {
        v + theta
    } else {
        0.0
    }
}

fn prox_l1_into(x: &[f64], theta: f64, mask: Option<&[bool]>, out: &mut [f64]) {
    debug_assert!(theta >= 0.0);
    match mask {
        None => {
            for (o, v) in out.iter_mut().zip(x) {
                *o = soft_threshold(*v, theta);
            }
        }
        Some(mask) => {
            for ((o, v), m) in out.iter_mut().zip(x).zip(mask) {
                *o = if *m { soft_threshold(*v, theta) } else { *v };
            }
        }
    }
}

/// Componentwise prox of `rho * max(0, 1 - t)`.
pub fn prox_hinge_sum(z: &[f64], rho: f64) -> Vec<f64> {
    let mut out = vec![0.0; z.len()];
    prox_hinge_into(z, rho, &mut out);
    out
}

fn prox_hinge_into(z: &[f64], rho: f64, out: &mut [f64]) {
    debug_assert!(rho > 0.0);
    for (o, &v) in out.iter_mut().zip(z) {
        *o = if v >= 1.0 {
            v
        } else if v <= 1.0 - rho {
            v + rho
        } else {
            1.0
        };
    }
}

/// `J_{sigma ∂f*}(y) = y - sigma * prox_{f/sigma}(y / sigma)`, built from the
/// prox of `f` by the Moreau decomposition.
pub fn resolvent_conjugate(f_prox: &dyn Resolvent, y: &[f64], sigma: f64) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    conjugate_into(f_prox, y, sigma, &mut out);
    out
}

fn conjugate_into(f_prox: &dyn Resolvent, y: &[f64], sigma: f64, out: &mut [f64]) {
    debug_assert!(sigma > 0.0);
    let scaled: Vec<f64> = y.iter().map(|v| v / sigma).collect();
    f_prox.resolve(1.0 / sigma, &scaled, out);
    for (o, v) in out.iter_mut().zip(y) {
        *o = v - sigma * *o;
    }
}

/// Resolvent of `∂(weight * ||x_S||_1)` where `S` is the masked coordinate set.
#[derive(Debug, Clone)]
pub struct L1Norm {
    weight: f64,
    mask: Option<Vec<bool>>,
}

impl L1Norm {
    pub fn new(weight: f64) -> Self {
        Self { weight, mask: None }
    }

    /// Penalize only the coordinates flagged in `mask`.
    pub fn masked(weight: f64, mask: Vec<bool>) -> Self {
        Self { weight, mask: Some(mask) }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let s: f64 = match &self.mask {
            None => x.iter().map(|v| v.abs()).sum(),
            Some(m) => x.iter().zip(m).filter(|(_, m)| **m).map(|(v, _)| v.abs()).sum(),
        };
        self.weight * s
    }
}

impl Resolvent for L1Norm {
    fn dim(&self) -> Option<usize> {
        self.mask.as_ref().map(Vec::len)
    }

    fn resolve(&self, gamma: f64, w: &[f64], out: &mut [f64]) {
        prox_l1_into(w, gamma * self.weight, self.mask.as_deref(), out);
    }
}

/// `f(z) = sum_i max(0, 1 - z_i)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HingeSum;

impl HingeSum {
    pub fn value(&self, z: &[f64]) -> f64 {
        z.iter().map(|v| (1.0 - v).max(0.0)).sum()
    }
}

impl Resolvent for HingeSum {
    fn resolve(&self, gamma: f64, w: &[f64], out: &mut [f64]) {
        prox_hinge_into(w, gamma, out);
    }
}

/// `A ≡ 0`; the resolvent is the identity.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroResolvent;

impl Resolvent for ZeroResolvent {
    fn resolve(&self, _gamma: f64, w: &[f64], out: &mut [f64]) {
        out.copy_from_slice(w);
    }
}

/// Resolvent of `B^{-1} = ∂f*` from the prox of `f`.
#[derive(Clone)]
pub struct ConjugateResolvent {
    f_prox: Arc<dyn Resolvent>,
}

impl ConjugateResolvent {
    pub fn new(f_prox: Arc<dyn Resolvent>) -> Self {
        Self { f_prox }
    }
}

impl Resolvent for ConjugateResolvent {
    fn resolve(&self, sigma: f64, y: &[f64], out: &mut [f64]) {
        conjugate_into(self.f_prox.as_ref(), y, sigma, out);
    }
}

/// Gradient of `x ↦ ½xᵀQx - bᵀx`, i.e. `Cx = Qx - b`.
#[derive(Debug, Clone)]
pub struct QuadraticGradient {
    q: DenseMatrix,
    b: Vec<f64>,
    beta: f64,
}

impl Cocoercive for QuadraticGradient {
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        self.q.apply(x, out);
        for (o, b) in out.iter_mut().zip(&self.b) {
            *o -= b;
        }
    }

    fn beta(&self) -> f64 {
        self.beta
    }
}

impl QuadraticGradient {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn offset(&self) -> &[f64] {
        &self.b
    }
}

/// Builds `Cx = Qx - b` with `beta` an upper estimate of `λ_max(Q)`: the power
/// iteration value inflated by `1e-6` relative.
pub fn make_quadratic_gradient(q: DenseMatrix, b: Vec<f64>) -> Result<QuadraticGradient> {
    if q.rows() != q.cols() {
        return Err(Error::InvalidArgument(format!("Q must be square, got {}x{}", q.rows(), q.cols())));
    }
    vector::check_len(&b, q.rows())?;
    if !q.is_symmetric(1e-12) {
        return Err(Error::InvalidArgument("Q must be symmetric".into()));
    }
    let beta = if q.data.iter().all(|v| *v == 0.0) {
        0.0
    } else {
        // ‖Q‖ = λ_max for symmetric PSD Q
        let opts = PowerIterOptions { max_iters: 20_000, tol: 1e-13, seed: 0 };
        let est = operator_norm_estimate(&q, &opts)?;
        est.value * (1.0 + 1e-6)
    };
    Ok(QuadraticGradient { q, b, beta })
}

/// Wrapper that counts `apply` / `apply_adjoint` calls.
#[derive(Debug)]
pub struct CountingMap<M> {
    inner: M,
    forward: std::sync::atomic::AtomicUsize,
    adjoint: std::sync::atomic::AtomicUsize,
}

impl<M: LinearMap> CountingMap<M> {
    pub fn new(inner: M) -> Self {
        Self { inner, forward: 0.into(), adjoint: 0.into() }
    }

    pub fn counts(&self) -> (usize, usize) {
        use std::sync::atomic::Ordering::Relaxed;
        (self.forward.load(Relaxed), self.adjoint.load(Relaxed))
    }
}

impl<M: LinearMap> LinearMap for CountingMap<M> {
    fn in_dim(&self) -> usize {
        self.inner.in_dim()
    }

    fn out_dim(&self) -> usize {
        self.inner.out_dim()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.forward.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        self.inner.apply(x, out);
    }

    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
        self.adjoint.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        self.inner.apply_adjoint(y, out);
    }
}
