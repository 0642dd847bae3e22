//! Reference solve and algorithm runs for the SVM comparison.

use std::fmt;
use std::str::FromStr;

use super::problem::SvmProblem;
use crate::error::{Error, Result};
use crate::fb::{solve, Schedules, Sequence, SolveOptions, ZeroPolicy, ZetaPolicy};
use crate::fb::SplittingProblem;
use crate::primal_dual::{InertialOptions, InertialSolver};
use crate::trace::Trace;

/// Relative primal distances tabulated by the comparison.
pub const ACCURACY_LEVELS: [f64; 3] = [1e-2, 1e-4, 1e-6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Chambolle-Pock: the primal-dual iteration with zero deviations.
    Cp,
    /// The inertial primal-dual method with budget-sized momentum.
    Alg4,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Cp => "cp",
            Algorithm::Alg4 => "alg4",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cp" => Ok(Algorithm::Cp),
            "alg4" => Ok(Algorithm::Alg4),
            _ => Err(Error::InvalidArgument(format!("unknown algorithm `{s}` (expected cp or alg4)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub lambda: f64,
    pub epsilon: f64,
    pub zeta: ZetaPolicy,
    pub a_max: f64,
    pub max_iter: usize,
    /// Runs stop once the residual bound reaches this.
    pub residual_tol: f64,
    pub ref_tol: f64,
    pub ref_max_iter: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            epsilon: 1e-6,
            zeta: ZetaPolicy::Uniform { seed: 0 },
            a_max: 10.0,
            max_iter: 100_000,
            residual_tol: 1e-10,
            ref_tol: 1e-13,
            ref_max_iter: 1_000_000,
        }
    }
}

/// Long Chambolle-Pock run used as `(x*, μ*)`.
#[derive(Debug, Clone)]
pub struct Reference {
    pub w: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub objective: f64,
}

impl Reference {
    pub fn primal(&self, prob: &SvmProblem) -> Vec<f64> {
        self.w[..prob.pd.n_primal()].to_vec()
    }
}

/// Runs Chambolle-Pock from `w0` until the residual bound is at most
/// `tol`. Fails with [`Error::ReferenceNotConverged`] otherwise.
pub fn compute_reference(prob: &SvmProblem, w0: &[f64], tol: f64, max_iter: usize) -> Result<Reference> {
    let s = prob.pd.schedules(1e-6, Sequence::Constant(1.0), ZetaPolicy::Zero);
    let t = solve(&prob.pd, w0, &s, &mut ZeroPolicy, &SolveOptions::new(max_iter, tol))?;
    let residual = t.final_residual().unwrap_or(f64::INFINITY);
    if !t.converged() {
        return Err(Error::ReferenceNotConverged { residual, iters: t.iterations() });
    }
    let objective = prob.objective(&t.x[..prob.pd.n_primal()]);
    Ok(Reference { iterations: t.iterations(), residual, objective, w: t.x })
}

fn schedules(prob: &SvmProblem, cfg: &ExperimentConfig, alg: Algorithm) -> Schedules {
    let zeta = match alg {
        Algorithm::Cp => ZetaPolicy::Zero,
        Algorithm::Alg4 => cfg.zeta.clone(),
    };
    prob.pd.schedules(cfg.epsilon, Sequence::Constant(cfg.lambda), zeta)
}

/// One algorithm from `w0`, recording distances to the reference.
pub fn run_algorithm(prob: &SvmProblem, alg: Algorithm, cfg: &ExperimentConfig, reference: &Reference, w0: &[f64]) -> Result<Trace> {
    let s = schedules(prob, cfg, alg);
    match alg {
        Algorithm::Cp => {
            let opts = SolveOptions::new(cfg.max_iter, cfg.residual_tol).with_reference(reference.w.clone());
            solve(&prob.pd, w0, &s, &mut ZeroPolicy, &opts)
        }
        Algorithm::Alg4 => {
            let opts = InertialOptions {
                a_max: cfg.a_max,
                max_iter: cfg.max_iter,
                residual_tol: cfg.residual_tol,
                reference: Some(reference.w.clone()),
                validate: true,
            };
            InertialSolver::new(&prob.pd, w0, &s, opts)?.run()
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub trace: Trace,
    /// First iteration at each of [`ACCURACY_LEVELS`].
    pub iterations_to: [Option<usize>; 3],
    pub final_objective: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub reference: Reference,
    pub runs: Vec<RunResult>,
}

/// Reference solve followed by each algorithm from `w = 0`. Runs execute on
/// up to `threads` worker threads.
pub fn run_experiment(prob: &SvmProblem, algs: &[Algorithm], cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let runs: Vec<(Algorithm, f64)> = algs.iter().map(|a| (*a, cfg.lambda)).collect();
    run_comparison(prob, &runs, cfg, threads)
}

/// Like [`run_experiment`] with a relaxation parameter per run; all runs
/// share one reference.
pub fn run_comparison(prob: &SvmProblem, runs: &[(Algorithm, f64)], cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    let w0 = vec![0.0; prob.pd.dim()];
    let reference = compute_reference(prob, &w0, cfg.ref_tol, cfg.ref_max_iter)?;
    let run = |(alg, lambda): (Algorithm, f64)| -> Result<RunResult> {
        let cfg = ExperimentConfig { lambda, ..cfg.clone() };
        let trace = run_algorithm(prob, alg, &cfg, &reference, &w0)?;
        let iterations_to = ACCURACY_LEVELS.map(|t| trace.iterations_to(t));
        let final_objective = prob.objective(&trace.x[..prob.pd.n_primal()]);
        Ok(RunResult { algorithm: alg, lambda, trace, iterations_to, final_objective })
    };
    let runs = parallel_map(runs, threads, run)?;
    Ok(ExperimentResult { reference, runs })
}

/// Maps `f` over `items` on at most `threads` scoped threads, keeping order.
pub(crate) fn parallel_map<T: Sync + Copy, R: Send>(items: &[T], threads: usize, f: impl Fn(T) -> Result<R> + Sync) -> Result<Vec<R>> {
    let threads = threads.max(1).min(items.len().max(1));
    if threads == 1 {
        return items.iter().map(|t| f(*t)).collect();
    }
    let mut out: Vec<Option<Result<R>>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (chunk_items, chunk_out) in items.chunks(items.len().div_ceil(threads)).zip(out.chunks_mut(items.len().div_ceil(threads))) {
            let f = &f;
            scope.spawn(move || {
                for (t, o) in chunk_items.iter().zip(chunk_out.iter_mut()) {
                    *o = Some(f(*t));
                }
            });
        }
    });
    out.into_iter().map(|r| r.expect("every slot is filled")).collect()
}
