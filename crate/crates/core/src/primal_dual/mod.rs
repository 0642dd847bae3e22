//! Primal-dual splitting for `0 ∈ Ax + L*B(Lx) + Cx`.
//!
//! The stacked pair `w = (x, μ)` is run through the forward-backward core
//! under the metric `M = [[I, −τL*], [−τL, (τ/σ)I]]` with `γ ≡ τ`. The
//! resolvent `(M + τ𝒜)⁻¹` factors into a primal resolvent of `A` followed by
//! a dual resolvent of `B⁻¹`, so `M` is never assembled.

mod inertial;

use std::sync::Arc;

pub use inertial::{InertialOptions, InertialSolver, InertialStep};

use crate::error::{Error, Result};
use crate::fb::{deviation_budget, DeviationBudget, Schedules, Sequence, SplittingProblem, ZetaPolicy};
use crate::metric::Metric;
use crate::operators::{Cocoercive, ConjugateResolvent, LinearMap, Resolvent};
use crate::vector;

#[derive(Clone)]
pub struct PdProblem {
    a: Arc<dyn Resolvent>,
    b_inv: Arc<dyn Resolvent>,
    map: Arc<dyn LinearMap>,
    c: Option<Arc<dyn Cocoercive>>,
    tau: f64,
    sigma: f64,
    metric: Metric,
}

impl PdProblem {
    /// `f_prox` is the prox of `f` with `B = ∂f`; the dual resolvent is
    /// obtained from it by the Moreau decomposition. `op_norm` is an
    /// estimate of `‖L‖` used for the metric positivity check.
    pub fn new(
        a: Arc<dyn Resolvent>,
        f_prox: Arc<dyn Resolvent>,
        map: Arc<dyn LinearMap>,
        c: Option<Arc<dyn Cocoercive>>,
        tau: f64,
        sigma: f64,
        op_norm: f64,
    ) -> Result<Self> {
        Self::with_dual_resolvent(a, Arc::new(ConjugateResolvent::new(f_prox)), map, c, tau, sigma, op_norm)
    }

    /// Like [`PdProblem::new`] with the resolvent of `B⁻¹` supplied directly.
    pub fn with_dual_resolvent(
        a: Arc<dyn Resolvent>,
        b_inv: Arc<dyn Resolvent>,
        map: Arc<dyn LinearMap>,
        c: Option<Arc<dyn Cocoercive>>,
        tau: f64,
        sigma: f64,
        op_norm: f64,
    ) -> Result<Self> {
        let metric = Metric::primal_dual(tau, sigma, map.clone(), op_norm)?;
        Ok(Self { a, b_inv, map, c, tau, sigma, metric })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn map(&self) -> &Arc<dyn LinearMap> {
        &self.map
    }

    pub fn n_primal(&self) -> usize {
        self.map.in_dim()
    }

    pub fn n_dual(&self) -> usize {
        self.map.out_dim()
    }

    pub fn has_forward(&self) -> bool {
        self.c.is_some()
    }

    pub fn resolve_primal(&self, w: &[f64], out: &mut [f64]) {
        self.a.resolve(self.tau, w, out);
    }

    pub fn resolve_dual(&self, y: &[f64], out: &mut [f64]) {
        self.b_inv.resolve(self.sigma, y, out);
    }

    /// Schedules with `γ_n ≡ τ`.
    pub fn schedules(&self, epsilon: f64, lambda: Sequence, zeta: ZetaPolicy) -> Schedules {
        Schedules { epsilon, gamma: Sequence::Constant(self.tau), lambda, zeta }
    }

    /// Fixed-point residuals of the primal-dual optimality system:
    /// `‖x − J_{τA}(x − τ(L*μ + Cx))‖` and `‖μ − J_{σB⁻¹}(μ + σLx)‖`.
    pub fn kkt_residuals(&self, w: &[f64]) -> Result<(f64, f64)> {
        let d = self.map.in_dim();
        vector::check_len(w, d + self.map.out_dim())?;
        let (x, mu) = w.split_at(d);
        let mut ltmu = vec![0.0; d];
        self.map.apply_adjoint(mu, &mut ltmu);
        let mut cx = vec![0.0; d];
        if let Some(c) = &self.c {
            c.eval(x, &mut cx);
        }
        let arg: Vec<f64> = (0..d).map(|i| x[i] - self.tau * (ltmu[i] + cx[i])).collect();
        let mut px = vec![0.0; d];
        self.resolve_primal(&arg, &mut px);
        let mut lx = vec![0.0; mu.len()];
        self.map.apply(x, &mut lx);
        let arg: Vec<f64> = mu.iter().zip(&lx).map(|(m, l)| m + self.sigma * l).collect();
        let mut pm = vec![0.0; mu.len()];
        self.resolve_dual(&arg, &mut pm);
        Ok((vector::distance(x, &px), vector::distance(mu, &pm)))
    }
}

impl SplittingProblem for PdProblem {
    fn dim(&self) -> usize {
        self.map.in_dim() + self.map.out_dim()
    }

    fn beta(&self) -> f64 {
        self.c.as_ref().map_or(0.0, |c| c.beta())
    }

    fn metric(&self) -> &Metric {
        &self.metric
    }

    /// `𝒞(x, μ) = (Cx, 0)`
    fn forward(&self, y: &[f64], out: &mut [f64]) {
        let d = self.map.in_dim();
        let (ox, om) = out.split_at_mut(d);
        match &self.c {
            Some(c) => c.eval(&y[..d], ox),
            None => ox.iter_mut().for_each(|o| *o = 0.0),
        }
        om.iter_mut().for_each(|o| *o = 0.0);
    }

    /// `p_x = J_{τA}(x̂ − τL*μ̂ − τCx̃)`, `p_μ = J_{σB⁻¹}(μ̂ + σL(2p_x − x̂))`.
    fn backward(&self, gamma: f64, z: &[f64], cy: Option<&[f64]>, out: &mut [f64]) -> Result<()> {
        if gamma != self.tau {
            return Err(Error::InvalidArgument(format!("primal-dual steps need gamma = tau = {}, got {gamma}", self.tau)));
        }
        let tau = self.tau;
        let d = self.map.in_dim();
        let (xh, mh) = z.split_at(d);
        let (px, pm) = out.split_at_mut(d);
        let mut ltmu = vec![0.0; d];
        self.map.apply_adjoint(mh, &mut ltmu);
        let arg: Vec<f64> = match cy {
            Some(cy) => (0..d).map(|i| xh[i] - tau * ltmu[i] - tau * cy[i]).collect(),
            None => (0..d).map(|i| xh[i] - tau * ltmu[i]).collect(),
        };
        self.resolve_primal(&arg, px);
        let t: Vec<f64> = px.iter().zip(xh).map(|(p, x)| 2.0 * p - x).collect();
        let mut lt = vec![0.0; mh.len()];
        self.map.apply(&t, &mut lt);
        let arg: Vec<f64> = mh.iter().zip(&lt).map(|(m, l)| m + self.sigma * l).collect();
        self.resolve_dual(&arg, pm);
        Ok(())
    }

    /// The dual block of `u` is never used.
    fn restrict_u(&self, u: &mut [f64]) {
        u[self.map.in_dim()..].iter_mut().for_each(|v| *v = 0.0);
    }

    fn primal_dim(&self) -> Option<usize> {
        Some(self.map.in_dim())
    }
}

/// Budget for the primal-dual case: weights at `(τ, λ_{n+1})` on `‖u_x‖²`
/// and `‖v‖²_M`, rhs `ζ_n ℓ_n²`. Since `u` has no dual block,
/// `‖(u_x, 0)‖²_M = ‖u_x‖²`, so the generic budget applies unchanged.
pub fn pd_budget(tau: f64, lambda_next: f64, beta: f64, zeta_n: f64, ell_sq_n: f64) -> DeviationBudget {
    deviation_budget(tau, lambda_next, beta, zeta_n, ell_sq_n)
}
