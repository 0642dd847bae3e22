//! Small seeded problem generators used by the tests, examples and CLI.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fb::FbProblem;
use crate::operators::{make_quadratic_gradient, DenseMatrix, L1Norm, QuadraticGradient};
use crate::rng;

/// `0 ∈ ∂|x| + (x − 1)` on the real line. The unique solution is `x* = 0`,
/// and with `γ = λ = 1` one step lands on it from any start.
pub fn toy1d() -> FbProblem {
    let c = make_quadratic_gradient(DenseMatrix::identity(1), vec![1.0]).expect("1x1 identity is symmetric");
    FbProblem::new(1, Arc::new(L1Norm::new(1.0)), Some(Arc::new(c)))
}

/// Lasso-type instance `min ½xᵀQx − bᵀx + ξ‖x‖₁` with `Q = GᵀG/m + ridge·I`.
#[derive(Debug, Clone)]
pub struct QuadraticL1 {
    pub gradient: QuadraticGradient,
    pub xi: f64,
}

impl QuadraticL1 {
    pub fn problem(&self) -> FbProblem {
        FbProblem::new(self.gradient.offset().len(), Arc::new(L1Norm::new(self.xi)), Some(Arc::new(self.gradient.clone())))
    }

    pub fn beta(&self) -> f64 {
        use crate::operators::Cocoercive;
        self.gradient.beta()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let q = self.gradient.matrix().mul_vec(x);
        0.5 * crate::vector::dot(x, &q) - crate::vector::dot(self.gradient.offset(), x) + self.xi * x.iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// Draws a [`QuadraticL1`] of the given dimension. `ξ` is uniform on
/// `[0.05, 0.5]`, so some coordinates of the solution are usually zero.
pub fn quadratic_l1(seed: u64, dim: usize) -> Result<QuadraticL1> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut r = rng::stream(seed, "synthetic-quadratic");
    let m = dim + 5;
    let g = gaussian_matrix(&mut r, m, dim);
    let ridge = 0.05;
    let mut q = DenseMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..=i {
            let s: f64 = (0..m).map(|k| g.get(k, i) * g.get(k, j)).sum::<f64>() / m as f64;
            let s = if i == j { s + ridge } else { s };
            q.set(i, j, s);
            q.set(j, i, s);
        }
    }
    let b: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut r)).collect();
    let xi = r.random_range(0.05..0.5);
    Ok(QuadraticL1 { gradient: make_quadratic_gradient(q, b)?, xi })
}

/// `rows × cols` matrix with standard normal entries.
pub fn gaussian_matrix<R: Rng>(r: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| StandardNormal.sample(r)).collect();
    DenseMatrix::new(rows, cols, data).expect("sizes agree")
}
