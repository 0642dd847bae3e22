//! Inertial primal-dual method: deviations along the momentum direction
//! `v_n = a_n (w_n − w_{n−1})`, with `a_{n+1}` the largest value the norm
//! condition admits (capped at `a_max`).
//!
//! `M`-norms need `L` applied to primal differences. Those images are kept
//! up to date by linear recursions, so after the first step only `L p_x` and
//! `L* p_μ` are evaluated directly.

use super::PdProblem;
use crate::error::{Error, Result};
use crate::fb::{budget_weights, validate_schedules, Schedules, SplittingProblem};
use crate::metric::pd_norm_sq_from_image;
use crate::trace::{fingerprint, Distances, IterRecord, Status, Trace};
use crate::vector;

#[derive(Debug, Clone)]
pub struct InertialOptions {
    pub a_max: f64,
    pub max_iter: usize,
    pub residual_tol: f64,
    pub reference: Option<Vec<f64>>,
    pub validate: bool,
}

impl Default for InertialOptions {
    fn default() -> Self {
        Self { a_max: 10.0, max_iter: 100_000, residual_tol: 1e-10, reference: None, validate: true }
    }
}

/// What one call to [`InertialSolver::step`] produced.
#[derive(Debug, Clone, PartialEq)]
pub struct InertialStep {
    pub record: IterRecord,
    /// Set when the residual bound reached the tolerance.
    pub converged: bool,
}

pub struct InertialSolver<'a> {
    prob: &'a PdProblem,
    s: Schedules,
    opts: InertialOptions,
    n: usize,
    w: Vec<f64>,
    w_prev: Vec<f64>,
    a: f64,
    // cached images: L x_n, L x_{n−1}, L* μ_n, L* μ_{n−1}
    lx: Vec<f64>,
    lx_prev: Vec<f64>,
    ltmu: Vec<f64>,
    ltmu_prev: Vec<f64>,
    // extrapolated point of the last step and its cached images
    w_hat: Vec<f64>,
    lx_hat: Vec<f64>,
    ltmu_hat: Vec<f64>,
    // ‖v_n‖²_M and the bound it was held to
    v_norm_m_sq: f64,
    budget_rhs: f64,
    lx_star: Option<Vec<f64>>,
    expensive: usize,
    cheap: usize,
    setup: usize,
    distances: Option<Distances>,
    records: Vec<IterRecord>,
    status: Option<Status>,
}

impl<'a> InertialSolver<'a> {
    /// The problem must have `C = 0`; `schedules.gamma` is ignored (`γ ≡ τ`).
    pub fn new(prob: &'a PdProblem, w0: &[f64], schedules: &Schedules, opts: InertialOptions) -> Result<Self> {
        if prob.has_forward() {
            return Err(Error::InvalidArgument("the inertial method requires C = 0".into()));
        }
        let dim = prob.dim();
        vector::check_len(w0, dim)?;
        let s = prob.schedules(schedules.epsilon, schedules.lambda.clone(), schedules.zeta.clone());
        if opts.validate {
            validate_schedules(&s, 0.0, opts.max_iter + 1)?;
        }
        let (d, m) = (prob.n_primal(), prob.n_dual());
        let mut setup = 0;
        let lx_star = match &opts.reference {
            Some(r) => {
                vector::check_len(r, dim)?;
                let mut l = vec![0.0; m];
                prob.map().apply(&r[..d], &mut l);
                setup += 1;
                Some(l)
            }
            None => None,
        };
        let mut solver = Self {
            prob,
            s,
            n: 0,
            w: w0.to_vec(),
            w_prev: w0.to_vec(),
            a: 0.0,
            lx: vec![0.0; m],
            lx_prev: vec![0.0; m],
            ltmu: vec![0.0; d],
            ltmu_prev: vec![0.0; d],
            w_hat: w0.to_vec(),
            lx_hat: vec![0.0; m],
            ltmu_hat: vec![0.0; d],
            v_norm_m_sq: 0.0,
            budget_rhs: 0.0,
            lx_star,
            expensive: 0,
            cheap: 0,
            setup,
            distances: opts.reference.as_ref().map(|_| Distances { dual: Some(Vec::new()), ..Default::default() }),
            records: Vec::new(),
            status: None,
            opts,
        };
        solver.push_distance();
        Ok(solver)
    }

    fn tau_sigma(&self) -> (f64, f64) {
        (self.prob.tau(), self.prob.sigma())
    }

    fn m_norm_sq(&self, x: &[f64], mu: &[f64], lx: &[f64]) -> f64 {
        let (tau, sigma) = self.tau_sigma();
        pd_norm_sq_from_image(tau, sigma, x, mu, lx)
    }

    fn push_distance(&mut self) {
        let (Some(r), Some(lxs)) = (self.opts.reference.as_ref(), self.lx_star.as_ref()) else {
            return;
        };
        let d = self.prob.n_primal();
        let diff = vector::sub(&self.w, r);
        // L(x − x*) from the cache; at n = 0 the cache is not filled yet
        let m_sq = if self.n == 0 && self.records.is_empty() {
            None
        } else {
            let ldiff = vector::sub(&self.lx, lxs);
            Some(self.m_norm_sq(&diff[..d], &diff[d..], &ldiff))
        };
        let dist = self.distances.as_mut().expect("distances exist with a reference");
        if let Some(m) = m_sq {
            dist.m_sq.push(m);
        }
        dist.primal.push(vector::norm(&diff[..d]));
        if let Some(q) = dist.dual.as_mut() {
            q.push(vector::norm(&diff[d..]));
        }
    }

    /// Direct evaluations of `L` or `L*` so far (Table-1 "expensive").
    pub fn expensive_evaluations(&self) -> usize {
        self.expensive
    }

    /// Images obtained from the recursions instead of direct evaluation.
    pub fn cheap_evaluations(&self) -> usize {
        self.cheap
    }

    /// Direct evaluations spent on the reference point, outside the schedule.
    pub fn setup_evaluations(&self) -> usize {
        self.setup
    }

    pub fn iteration(&self) -> usize {
        self.n
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Extrapolated point `ŵ_n` of the last step with its cached `(L x̂, L* μ̂)`.
    pub fn extrapolated(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.w_hat, &self.lx_hat, &self.ltmu_hat)
    }

    /// Cached `(L x_n, L* μ_n)`; filled after the first step.
    pub fn cached_images(&self) -> (&[f64], &[f64]) {
        (&self.lx, &self.ltmu)
    }

    pub fn step(&mut self) -> Result<InertialStep> {
        let n = self.n;
        let prob = self.prob;
        let map = prob.map().clone();
        let (tau, sigma) = self.tau_sigma();
        let (d, m) = (prob.n_primal(), prob.n_dual());
        let lambda = self.s.lambda(n);
        let lambda_next = self.s.lambda(n + 1);
        let zeta = self.s.zeta(n);
        let a = self.a;

        if n == 0 {
            map.apply(&self.w[..d], &mut self.lx);
            map.apply_adjoint(&self.w[d..], &mut self.ltmu);
            self.expensive += 2;
            self.lx_prev.copy_from_slice(&self.lx);
            self.ltmu_prev.copy_from_slice(&self.ltmu);
            self.lx_hat.copy_from_slice(&self.lx);
            self.ltmu_hat.copy_from_slice(&self.ltmu);
            self.w_hat.copy_from_slice(&self.w);
            if let Some(dist) = self.distances.as_mut() {
                let r = self.opts.reference.as_ref().expect("reference");
                let lxs = self.lx_star.as_ref().expect("reference image");
                let diff = vector::sub(&self.w, r);
                let ldiff = vector::sub(&self.lx, lxs);
                dist.m_sq.push(pd_norm_sq_from_image(tau, sigma, &diff[..d], &diff[d..], &ldiff));
            }
        } else {
            for i in 0..self.w.len() {
                self.w_hat[i] = self.w[i] + a * (self.w[i] - self.w_prev[i]);
            }
            for i in 0..m {
                self.lx_hat[i] = self.lx[i] + a * (self.lx[i] - self.lx_prev[i]);
            }
            for i in 0..d {
                self.ltmu_hat[i] = self.ltmu[i] + a * (self.ltmu[i] - self.ltmu_prev[i]);
            }
            self.cheap += 2;
        }

        // p_x = J_{τA}(x̂ − τ L* μ̂)
        let arg: Vec<f64> = (0..d).map(|i| self.w_hat[i] - tau * self.ltmu_hat[i]).collect();
        let mut p = vec![0.0; d + m];
        prob.resolve_primal(&arg, &mut p[..d]);
        let mut lpx = vec![0.0; m];
        map.apply(&p[..d], &mut lpx);
        // p_μ = J_{σB⁻¹}(μ̂ + σ L(2p_x − x̂))
        let arg: Vec<f64> = (0..m).map(|i| self.w_hat[d + i] + sigma * (2.0 * lpx[i] - self.lx_hat[i])).collect();
        prob.resolve_dual(&arg, &mut p[d..]);
        let mut ltpm = vec![0.0; d];
        map.apply_adjoint(&p[d..], &mut ltpm);
        self.expensive += 2;

        let w_next: Vec<f64> = (0..d + m).map(|i| (self.w[i] - lambda * self.w_hat[i]) + lambda * p[i]).collect();
        let lx_next: Vec<f64> = (0..m).map(|i| (self.lx[i] - lambda * self.lx_hat[i]) + lambda * lpx[i]).collect();
        let ltmu_next: Vec<f64> = (0..d).map(|i| (self.ltmu[i] - lambda * self.ltmu_hat[i]) + lambda * ltpm[i]).collect();
        self.cheap += 2;

        // ℓ_n² = λ(2−λ)‖p − w + ((λ−1)/(2−λ)) a_n (w − w_prev)‖²_M
        let c = (lambda - 1.0) / (2.0 - lambda);
        let q: Vec<f64> = (0..d + m).map(|i| p[i] - self.w[i] + c * a * (self.w[i] - self.w_prev[i])).collect();
        let lq: Vec<f64> = (0..m).map(|i| lpx[i] - self.lx[i] + c * a * (self.lx[i] - self.lx_prev[i])).collect();
        let ell_sq = (lambda * (2.0 - lambda) * self.m_norm_sq(&q[..d], &q[d..], &lq)).max(0.0);
        // residual bound with β = 0: ‖w − p + v_n‖_M / τ
        let r: Vec<f64> = (0..d + m).map(|i| self.w[i] - p[i] + a * (self.w[i] - self.w_prev[i])).collect();
        let lr: Vec<f64> = (0..m).map(|i| self.lx[i] - lpx[i] + a * (self.lx[i] - self.lx_prev[i])).collect();
        let residual = self.m_norm_sq(&r[..d], &r[d..], &lr).max(0.0).sqrt() / tau;

        if !(vector::all_finite(&w_next) && ell_sq.is_finite() && residual.is_finite()) {
            self.status = Some(Status::NonFinite { iter: n });
            return Err(Error::NonFinite { what: "inertial step", iter: n });
        }

        let (_, weight_v) = budget_weights(tau, lambda, 0.0);
        let record = IterRecord {
            n,
            gamma: tau,
            lambda,
            zeta,
            ell_sq,
            residual_bound: residual,
            weight_u: 0.0,
            weight_v,
            u_norm_m_sq: 0.0,
            v_norm_m_sq: self.v_norm_m_sq,
            budget_rhs: self.budget_rhs,
            rescale: 1.0,
            scaling_a: Some(a),
            delta_norm: None,
        };

        // a_{n+1} saturates a² ‖w⁺ − w‖²_M ≤ ζ_n ℓ_n² (2 − λ_{n+1}) / λ_{n+1}
        let dw = vector::sub(&w_next, &self.w);
        let ldw = vector::sub(&lx_next, &self.lx);
        let dn = self.m_norm_sq(&dw[..d], &dw[d..], &ldw).max(0.0);
        let (_, wv_next) = budget_weights(tau, lambda_next, 0.0);
        let rhs = zeta * ell_sq;
        let a_next = if dn > 0.0 && wv_next > 0.0 { (rhs / (wv_next * dn)).sqrt().min(self.opts.a_max) } else { 0.0 };

        std::mem::swap(&mut self.w_prev, &mut self.w);
        self.w = w_next;
        std::mem::swap(&mut self.lx_prev, &mut self.lx);
        self.lx = lx_next;
        std::mem::swap(&mut self.ltmu_prev, &mut self.ltmu);
        self.ltmu = ltmu_next;
        self.a = a_next;
        self.v_norm_m_sq = a_next * a_next * dn;
        self.budget_rhs = rhs;
        self.n += 1;
        self.records.push(record.clone());
        self.push_distance();
        let converged = residual <= self.opts.residual_tol;
        if converged {
            self.status = Some(Status::Converged);
        }
        Ok(InertialStep { record, converged })
    }

    /// Steps until convergence or `max_iter`.
    pub fn run(mut self) -> Result<Trace> {
        while self.n < self.opts.max_iter && self.status.is_none() {
            match self.step() {
                Ok(_) => {}
                Err(Error::NonFinite { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        Ok(self.into_trace())
    }

    pub fn into_trace(self) -> Trace {
        Trace {
            records: self.records,
            distances: self.distances,
            iterates: None,
            x: self.w,
            status: self.status.unwrap_or(Status::MaxIter),
            primal_dim: Some(self.prob.n_primal()),
            reference_fingerprint: self.opts.reference.as_deref().map(fingerprint),
        }
    }
}
