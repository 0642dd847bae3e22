//! The forward-backward iteration with deviations and its driver loop.

use std::sync::Arc;

use super::budget::{budget_weights, deviation_budget, ell_sq, enforce_budget, residual_bound};
use super::policy::{DeviationPolicy, PolicyContext};
use super::schedule::{validate_schedules, Schedules};
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::operators::{Cocoercive, Resolvent};
use crate::trace::{fingerprint, Distances, IterRecord, Status, Trace};
use crate::vector;

/// A splitting problem `0 ∈ Ax + Cx` together with its metric.
///
/// `backward` computes `p = (M + γA)⁻¹(Mz − γc)` with `c = Cy` (or no
/// forward term when `c` is `None`), which is the only place where `A` and
/// `M` interact.
pub trait SplittingProblem {
    fn dim(&self) -> usize;
    /// Cocoercivity constant of `C`; 0 means `C ≡ 0`.
    fn beta(&self) -> f64;
    fn metric(&self) -> &Metric;
    fn forward(&self, y: &[f64], out: &mut [f64]);
    fn backward(&self, gamma: f64, z: &[f64], cy: Option<&[f64]>, out: &mut [f64]) -> Result<()>;

    /// Projects a proposed `u` onto the subspace where it can act. The
    /// default keeps everything.
    fn restrict_u(&self, _u: &mut [f64]) {}

    /// Size of the primal block for primal-dual problems.
    fn primal_dim(&self) -> Option<usize> {
        None
    }
}

/// `0 ∈ Ax + Cx` under the identity metric: `p = J_{γA}(z − γCy)`.
#[derive(Clone)]
pub struct FbProblem {
    pub a: Arc<dyn Resolvent>,
    pub c: Option<Arc<dyn Cocoercive>>,
    dim: usize,
}

impl FbProblem {
    pub fn new(dim: usize, a: Arc<dyn Resolvent>, c: Option<Arc<dyn Cocoercive>>) -> Self {
        Self { a, c, dim }
    }
}

static IDENTITY: Metric = Metric::Identity;

impl SplittingProblem for FbProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn beta(&self) -> f64 {
        self.c.as_ref().map_or(0.0, |c| c.beta())
    }

    fn metric(&self) -> &Metric {
        &IDENTITY
    }

    fn forward(&self, y: &[f64], out: &mut [f64]) {
        match &self.c {
            Some(c) => c.eval(y, out),
            None => out.iter_mut().for_each(|o| *o = 0.0),
        }
    }

    fn backward(&self, gamma: f64, z: &[f64], cy: Option<&[f64]>, out: &mut [f64]) -> Result<()> {
        match cy {
            Some(cy) => {
                let w: Vec<f64> = z.iter().zip(cy).map(|(z, c)| z - gamma * c).collect();
                self.a.resolve(gamma, &w, out);
            }
            None => self.a.resolve(gamma, z, out),
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Stop once the residual bound falls to this value.
    pub residual_tol: f64,
    /// Known solution; enables distance recording.
    pub reference: Option<Vec<f64>>,
    /// Also evaluate `‖Δ_n‖` directly (costs one extra forward evaluation;
    /// identity metric only).
    pub record_delta: bool,
    pub store_iterates: bool,
    pub validate: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iter: 10_000, residual_tol: 1e-10, reference: None, record_delta: false, store_iterates: false, validate: true }
    }
}

impl SolveOptions {
    pub fn new(max_iter: usize, residual_tol: f64) -> Self {
        Self { max_iter, residual_tol, ..Default::default() }
    }

    pub fn with_reference(mut self, x_star: Vec<f64>) -> Self {
        self.reference = Some(x_star);
        self
    }
}

/// Iteration state between steps.
#[derive(Debug, Clone)]
pub struct FbState {
    pub n: usize,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p_prev: Option<Vec<f64>>,
    pub ell_sq_prev: f64,
    /// `ζ_{n−1} ℓ_{n−1}²`, the bound `(u_n, v_n)` were held to.
    pub budget_rhs: f64,
    pub rescale: f64,
    pub scaling: Option<f64>,
}

impl FbState {
    pub fn new(x0: Vec<f64>) -> Self {
        let d = x0.len();
        Self { n: 0, x: x0, u: vec![0.0; d], v: vec![0.0; d], p_prev: None, ell_sq_prev: 0.0, budget_rhs: 0.0, rescale: 1.0, scaling: None }
    }
}

/// Quantities produced by one step, before deviations are chosen.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub x_next: Vec<f64>,
    pub p: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub cy: Option<Vec<f64>>,
    pub ell_sq: f64,
    pub residual_bound: f64,
}

/// One step from `state`: `y = x + u`, `z = x + [(1−λ)γβ/(2−λγβ)]u + v`,
/// `p = (M + γA)⁻¹(Mz − γCy)`, `x⁺ = x + λ(p − z)`.
pub fn fb_step<P: SplittingProblem + ?Sized>(problem: &P, state: &FbState, gamma: f64, lambda: f64) -> Result<StepOutput> {
    let beta = problem.beta();
    let x = &state.x;
    let (u, v) = (&state.u, &state.v);
    let cz = (1.0 - lambda) * gamma * beta / (2.0 - lambda * gamma * beta);
    let y: Vec<f64> = x.iter().zip(u).map(|(x, u)| x + u).collect();
    let z: Vec<f64> = (0..x.len()).map(|i| x[i] + cz * u[i] + v[i]).collect();
    let cy = (beta > 0.0).then(|| {
        let mut c = vec![0.0; x.len()];
        problem.forward(&y, &mut c);
        c
    });
    let mut p = vec![0.0; x.len()];
    problem.backward(gamma, &z, cy.as_deref(), &mut p)?;
    // (x − λz) + λp is exactly p when λ = 1 and z = x
    let x_next: Vec<f64> = (0..x.len()).map(|i| (x[i] - lambda * z[i]) + lambda * p[i]).collect();
    let metric = problem.metric();
    let ell = ell_sq(x, &p, u, v, gamma, lambda, beta, metric)?;
    let res = residual_bound(x, &p, u, v, gamma, lambda, beta, metric)?;
    Ok(StepOutput { x_next, p, y, z, cy, ell_sq: ell, residual_bound: res })
}

/// `Δ_n = (z − p)/γ − (Cy − Cp)` for identity-metric problems.
pub fn delta<P: SplittingProblem + ?Sized>(problem: &P, out: &StepOutput, gamma: f64) -> Vec<f64> {
    let mut d: Vec<f64> = out.z.iter().zip(&out.p).map(|(z, p)| (z - p) / gamma).collect();
    if let Some(cy) = &out.cy {
        let mut cp = vec![0.0; d.len()];
        problem.forward(&out.p, &mut cp);
        for i in 0..d.len() {
            d[i] -= cy[i] - cp[i];
        }
    }
    d
}

fn distances_of(x: &[f64], x_star: &[f64], metric: &Metric, primal_dim: Option<usize>) -> Result<(f64, f64, Option<f64>)> {
    let diff = vector::sub(x, x_star);
    let m = metric.norm_sq(&diff)?;
    Ok(match primal_dim {
        Some(d) => (m, vector::norm(&diff[..d]), Some(vector::norm(&diff[d..]))),
        None => (m, vector::norm(&diff), None),
    })
}

/// Runs the iteration from `x0` until the residual bound drops to
/// `opts.residual_tol` or `opts.max_iter` steps have been taken.
pub fn solve<P: SplittingProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    schedules: &Schedules,
    policy: &mut dyn DeviationPolicy,
    opts: &SolveOptions,
) -> Result<Trace> {
    let dim = problem.dim();
    vector::check_len(x0, dim)?;
    let beta = problem.beta();
    if opts.validate {
        validate_schedules(schedules, beta, opts.max_iter + 1)?;
    }
    let metric = problem.metric();
    let primal_dim = problem.primal_dim();
    if opts.record_delta && !matches!(metric, Metric::Identity) {
        return Err(Error::UnsupportedMetric { op: "record_delta", kind: metric.kind() });
    }
    if let Some(r) = &opts.reference {
        vector::check_len(r, dim)?;
    }

    let mut state = FbState::new(x0.to_vec());
    let mut records = Vec::with_capacity(opts.max_iter.min(1 << 20));
    let mut dist = opts.reference.as_ref().map(|_| Distances {
        dual: primal_dim.map(|_| Vec::new()),
        ..Default::default()
    });
    let push_dist = |dist: &mut Option<Distances>, x: &[f64]| -> Result<()> {
        if let (Some(d), Some(r)) = (dist.as_mut(), opts.reference.as_ref()) {
            let (m, p, q) = distances_of(x, r, metric, primal_dim)?;
            d.m_sq.push(m);
            d.primal.push(p);
            if let (Some(dd), Some(q)) = (d.dual.as_mut(), q) {
                dd.push(q);
            }
        }
        Ok(())
    };
    push_dist(&mut dist, &state.x)?;
    let mut iterates = opts.store_iterates.then(|| vec![state.x.clone()]);
    let mut status = Status::MaxIter;

    for n in 0..opts.max_iter {
        let gamma = schedules.gamma(n);
        let lambda = schedules.lambda(n);
        let zeta = schedules.zeta(n);
        let out = fb_step(problem, &state, gamma, lambda)?;
        if !(vector::all_finite(&out.x_next) && out.ell_sq.is_finite() && out.residual_bound.is_finite()) {
            status = Status::NonFinite { iter: n };
            break;
        }
        let delta_norm = opts.record_delta.then(|| vector::norm(&delta(problem, &out, gamma)));
        let (weight_u, weight_v) = budget_weights(gamma, lambda, beta);
        records.push(IterRecord {
            n,
            gamma,
            lambda,
            zeta,
            ell_sq: out.ell_sq,
            residual_bound: out.residual_bound,
            weight_u,
            weight_v,
            u_norm_m_sq: metric.norm_sq(&state.u)?,
            v_norm_m_sq: metric.norm_sq(&state.v)?,
            budget_rhs: state.budget_rhs,
            rescale: state.rescale,
            scaling_a: state.scaling,
            delta_norm,
        });
        push_dist(&mut dist, &out.x_next)?;
        if let Some(it) = iterates.as_mut() {
            it.push(out.x_next.clone());
        }
        if out.residual_bound <= opts.residual_tol {
            state.x = out.x_next;
            status = Status::Converged;
            break;
        }

        let budget = deviation_budget(schedules.gamma(n + 1), schedules.lambda(n + 1), beta, zeta, out.ell_sq);
        let ctx = PolicyContext {
            n,
            x: &state.x,
            x_next: &out.x_next,
            p: &out.p,
            u: &state.u,
            v: &state.v,
            gamma,
            lambda,
            beta,
            metric,
            budget: &budget,
        };
        let mut prop = policy.propose(&ctx)?;
        vector::check_len(&prop.u, dim)?;
        vector::check_len(&prop.v, dim)?;
        if beta == 0.0 {
            prop.u.iter_mut().for_each(|u| *u = 0.0);
        } else {
            problem.restrict_u(&mut prop.u);
        }
        let enf = enforce_budget(&budget, &mut prop.u, &mut prop.v, metric)?;
        if !(vector::all_finite(&prop.u) && vector::all_finite(&prop.v)) {
            state.x = out.x_next;
            status = Status::NonFinite { iter: n };
            break;
        }
        state = FbState {
            n: n + 1,
            x: out.x_next,
            u: prop.u,
            v: prop.v,
            p_prev: Some(out.p),
            ell_sq_prev: out.ell_sq,
            budget_rhs: budget.rhs,
            rescale: enf.factor,
            scaling: prop.scaling.map(|a| a * enf.factor),
        };
    }

    Ok(Trace {
        records,
        distances: dist,
        iterates,
        x: state.x,
        status,
        primal_dim,
        reference_fingerprint: opts.reference.as_deref().map(fingerprint),
    })
}
