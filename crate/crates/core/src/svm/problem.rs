//! The ℓ₁-regularized hinge-loss SVM `min_x 1ᵀmax(0, 1 − Lx) + ξ‖ω‖₁`,
//! `x = (ω, b)`, posed as a primal-dual problem with `A = ∂g`, `B = ∂f`,
//! `C = 0`.

use std::sync::Arc;

use super::libsvm::Dataset;
use crate::error::{Error, Result};
use crate::metric::{operator_norm_estimate, PowerIterOptions};
use crate::operators::{DenseMatrix, HingeSum, L1Norm, LinearMap};
use crate::primal_dual::PdProblem;

/// Step-size factor: `τ = σ = STEP_FACTOR / ‖L‖`.
pub const STEP_FACTOR: f64 = 0.99;

#[derive(Clone)]
pub struct SvmProblem {
    pub matrix: Arc<DenseMatrix>,
    pub xi: f64,
    /// Power-iteration estimate of `‖L‖`.
    pub op_norm: f64,
    pub pd: PdProblem,
}

/// Row `i` of `L` is `φᵢ(θᵢᵀ, 1)`.
pub fn svm_matrix(data: &Dataset) -> DenseMatrix {
    let (n, d) = (data.samples(), data.dim());
    let mut l = DenseMatrix::zeros(n, d + 1);
    for i in 0..n {
        let phi = data.labels[i];
        for j in 0..d {
            l.set(i, j, phi * data.features.get(i, j));
        }
        l.set(i, d, phi);
    }
    l
}

/// Builds the problem with `τ = σ = 0.99/‖L‖`. The power iteration is seeded
/// by `seed`.
pub fn build_svm_problem(data: &Dataset, xi: f64, seed: u64) -> Result<SvmProblem> {
    if data.samples() == 0 || data.dim() == 0 {
        return Err(Error::InvalidArgument(format!("need N >= 1 and d >= 1, got N = {}, d = {}", data.samples(), data.dim())));
    }
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::InvalidArgument(format!("xi must be a nonnegative real, got {xi}")));
    }
    let l = svm_matrix(data);
    let est = operator_norm_estimate(&l, &PowerIterOptions { seed, ..Default::default() })?;
    let step = STEP_FACTOR / est.value;
    build_with_steps(data, xi, step, step, est.value)
}

/// Same problem with explicit step sizes.
pub fn build_with_steps(data: &Dataset, xi: f64, tau: f64, sigma: f64, op_norm: f64) -> Result<SvmProblem> {
    let d = data.dim();
    let matrix = Arc::new(svm_matrix(data));
    let mut mask = vec![true; d + 1];
    mask[d] = false;
    let a = Arc::new(L1Norm::masked(xi, mask));
    let map: Arc<dyn LinearMap> = matrix.clone();
    let pd = PdProblem::new(a, Arc::new(HingeSum), map, None, tau, sigma, op_norm)?;
    Ok(SvmProblem { matrix, xi, op_norm, pd })
}

impl SvmProblem {
    pub fn n_features(&self) -> usize {
        self.matrix.cols() - 1
    }

    pub fn n_samples(&self) -> usize {
        self.matrix.rows()
    }

    /// `f(Lx) + g(x)` for the primal block `x = (ω, b)`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let lx = self.matrix.mul_vec(x);
        let hinge = HingeSum.value(&lx);
        let d = self.n_features();
        hinge + self.xi * x[..d].iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Fraction of training samples on the correct side of the hyperplane.
    pub fn training_accuracy(&self, x: &[f64]) -> f64 {
        let lx = self.matrix.mul_vec(x);
        lx.iter().filter(|v| **v > 0.0).count() as f64 / lx.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::libsvm::{parse_libsvm, ParseOptions};

    #[test]
    fn rows_carry_labels() {
        let d = parse_libsvm("-1 1:1 2:2\n+1 1:3\n".as_bytes(), ParseOptions::default()).unwrap();
        let l = svm_matrix(&d);
        assert_eq!(l.row(0), &[-1.0, -2.0, -1.0]);
        assert_eq!(l.row(1), &[3.0, 0.0, 1.0]);
        assert_eq!(l.column(2), d.labels);
    }

    #[test]
    fn zero_xi_gives_identity_resolvent() {
        let d = parse_libsvm("-1 1:1 2:2\n+1 1:3\n".as_bytes(), ParseOptions::default()).unwrap();
        let p = build_svm_problem(&d, 0.0, 0).unwrap();
        let w = [0.3, -0.01, 5.0];
        let mut out = [0.0; 3];
        p.pd.resolve_primal(&w, &mut out);
        assert_eq!(out, w);
    }

    #[test]
    fn bias_is_not_thresholded() {
        let d = parse_libsvm("-1 1:1 2:2\n+1 1:3\n".as_bytes(), ParseOptions::default()).unwrap();
        let p = build_svm_problem(&d, 10.0, 0).unwrap();
        let mut out = [0.0; 3];
        p.pd.resolve_primal(&[0.01, -0.01, 0.01], &mut out);
        assert_eq!(out, [0.0, 0.0, 0.01]);
    }
}
