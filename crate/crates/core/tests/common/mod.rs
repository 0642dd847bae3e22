#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use devsplit::fb::{solve, FbProblem, Schedules, SolveOptions, ZeroPolicy, ZetaPolicy};
use devsplit::operators::DenseMatrix;
use devsplit::svm::{self, Reference, SvmProblem};
use devsplit::synthetic::{self, QuadraticL1};
use rand::Rng;

/// Dense `Ax = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, bi)| r.iter().copied().chain([*bi]).collect()).collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, piv);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..=n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

/// One instance of the seeded suite: a lasso-type problem with step
/// parameters drawn inside the admissible region and its exact solution.
pub struct SuiteCase {
    pub seed: u64,
    pub inst: QuadraticL1,
    pub problem: FbProblem,
    pub gamma: f64,
    pub lambda: f64,
    pub x_star: Vec<f64>,
    pub x0: Vec<f64>,
}

/// Solution of `min ½xᵀQx − bᵀx + ξ‖x‖₁`: a long plain forward-backward run
/// fixes the support and signs, then the stationarity system on the support
/// is solved exactly.
pub fn exact_lasso_solution(inst: &QuadraticL1) -> Vec<f64> {
    let q = inst.gradient.matrix();
    let b = inst.gradient.offset();
    let n = b.len();
    let beta = inst.beta();
    let s = Schedules::constant(1e-6, 1.0 / beta, 1.0, ZetaPolicy::Zero);
    let t = solve(&inst.problem(), &vec![0.0; n], &s, &mut ZeroPolicy, &SolveOptions::new(200_000, 1e-12)).unwrap();
    let approx = t.x;
    let support: Vec<usize> = (0..n).filter(|&i| approx[i].abs() > 1e-8).collect();
    let rows: Vec<Vec<f64>> = support.iter().map(|&i| support.iter().map(|&j| q.get(i, j)).collect()).collect();
    let rhs: Vec<f64> = support.iter().map(|&i| b[i] - inst.xi * approx[i].signum()).collect();
    let xs = solve_dense(&rows, &rhs);
    let mut x = vec![0.0; n];
    for (k, &i) in support.iter().enumerate() {
        x[i] = xs[k];
    }
    // optimality: |(Qx − b)_i| ≤ ξ off the support, = −ξ sign(x_i) on it
    let g: Vec<f64> = (0..n).map(|i| (0..n).map(|j| q.get(i, j) * x[j]).sum::<f64>() - b[i]).collect();
    for i in 0..n {
        if x[i] != 0.0 {
            assert!((g[i] + inst.xi * x[i].signum()).abs() < 1e-9, "seed stationarity");
            assert_eq!(x[i].signum(), approx[i].signum());
        } else {
            assert!(g[i].abs() <= inst.xi + 1e-9, "seed subgradient");
        }
    }
    x
}

pub fn suite_case(seed: u64) -> SuiteCase {
    let dim = 2 + (seed as usize * 7) % 49;
    let inst = synthetic::quadratic_l1(seed, dim).unwrap();
    let beta = inst.beta();
    let mut r = devsplit::rng::stream(seed, "suite-params");
    let gb: f64 = r.random_range(0.2..1.9);
    let gamma = gb / beta;
    let lambda = r.random_range(0.2..(2.0 - gb / 2.0 - 0.05));
    let x0: Vec<f64> = (0..dim).map(|_| r.random_range(-5.0..5.0)).collect();
    let x_star = exact_lasso_solution(&inst);
    SuiteCase { seed, problem: inst.problem(), inst, gamma, lambda, x_star, x0 }
}

pub const SUITE_SIZE: u64 = 100;

pub fn suite() -> &'static [SuiteCase] {
    static S: OnceLock<Vec<SuiteCase>> = OnceLock::new();
    S.get_or_init(|| (0..SUITE_SIZE).map(suite_case).collect())
}

pub fn liver() -> &'static SvmProblem {
    static P: OnceLock<SvmProblem> = OnceLock::new();
    P.get_or_init(|| {
        let data = svm::read_libsvm_file(&svm::bundled_dataset_path(), svm::ParseOptions::default()).unwrap();
        svm::build_svm_problem(&data, 0.1, 0).unwrap()
    })
}

pub fn liver_reference() -> &'static Reference {
    static R: OnceLock<Reference> = OnceLock::new();
    R.get_or_init(|| {
        let p = liver();
        svm::compute_reference(p, &vec![0.0; p.pd.n_primal() + p.pd.n_dual()], 1e-13, 1_000_000).unwrap()
    })
}

pub fn dense_from_rows(rows: &[Vec<f64>]) -> Arc<DenseMatrix> {
    Arc::new(DenseMatrix::from_rows(rows).unwrap())
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / (1.0 + x.abs().max(y.abs()))).fold(0.0, f64::max)
}
