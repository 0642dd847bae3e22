//! Metrics `M` inducing `<a, b>_M = <a, M b>`: the identity and the
//! primal-dual metric `[[I, -τL*], [-τL, (τ/σ)I]]`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::operators::LinearMap;
use crate::vector;

/// Safety margin on `στ‖L‖² < 1`, since `‖L‖` is only estimated.
pub const POSITIVITY_MARGIN: f64 = 1e-9;

#[derive(Clone)]
pub enum Metric {
    Identity,
    PrimalDual { tau: f64, sigma: f64, map: Arc<dyn LinearMap> },
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Identity => write!(f, "Identity"),
            Metric::PrimalDual { tau, sigma, map } => f
                .debug_struct("PrimalDual")
                .field("tau", tau)
                .field("sigma", sigma)
                .field("map", &format_args!("{}x{}", map.out_dim(), map.in_dim()))
                .finish(),
        }
    }
}

impl Metric {
    /// Builds the primal-dual metric, rejecting `στ‖L‖²(1 + margin) >= 1`.
    /// `op_norm` is an estimate of `‖L‖`, typically from [`operator_norm_estimate`].
    pub fn primal_dual(tau: f64, sigma: f64, map: Arc<dyn LinearMap>, op_norm: f64) -> Result<Self> {
        if !(tau > 0.0 && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("tau and sigma must be positive, got {tau}, {sigma}")));
        }
        let product = sigma * tau * op_norm * op_norm * (1.0 + POSITIVITY_MARGIN);
        if !(product < 1.0) {
            return Err(Error::MetricNotPositive { product });
        }
        Ok(Metric::PrimalDual { tau, sigma, map })
    }

    /// Same as [`Metric::primal_dual`] but estimates `‖L‖` itself.
    pub fn primal_dual_estimated(tau: f64, sigma: f64, map: Arc<dyn LinearMap>, seed: u64) -> Result<Self> {
        let est = operator_norm_estimate(map.as_ref(), &PowerIterOptions { seed, ..Default::default() })?;
        Self::primal_dual(tau, sigma, map, est.value)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Metric::Identity => "identity",
            Metric::PrimalDual { .. } => "primal-dual",
        }
    }

    /// Total dimension expected by the metric, if fixed.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Metric::Identity => None,
            Metric::PrimalDual { map, .. } => Some(map.in_dim() + map.out_dim()),
        }
    }

    fn check(&self, a: &[f64], b: &[f64]) -> Result<()> {
        vector::check_len(b, a.len())?;
        if let Some(d) = self.dim() {
            vector::check_len(a, d)?;
        }
        Ok(())
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check(a, b)?;
        Ok(match self {
            Metric::Identity => vector::dot(a, b),
            Metric::PrimalDual { tau, sigma, map } => {
                let d = map.in_dim();
                let (x1, m1) = a.split_at(d);
                let (x2, m2) = b.split_at(d);
                let mut l1 = vec![0.0; map.out_dim()];
                let mut l2 = vec![0.0; map.out_dim()];
                map.apply(x1, &mut l1);
                map.apply(x2, &mut l2);
                vector::dot(x1, x2) - tau * vector::dot(&l1, m2) - tau * vector::dot(&l2, m1)
                    + tau / sigma * vector::dot(m1, m2)
            }
        })
    }

    pub fn norm_sq(&self, a: &[f64]) -> Result<f64> {
        self.check(a, a)?;
        Ok(match self {
            Metric::Identity => vector::norm_sq(a),
            Metric::PrimalDual { tau, sigma, map } => {
                let (x, mu) = a.split_at(map.in_dim());
                let mut lx = vec![0.0; map.out_dim()];
                map.apply(x, &mut lx);
                pd_norm_sq_from_image(*tau, *sigma, x, mu, &lx)
            }
        })
    }

    pub fn norm(&self, a: &[f64]) -> Result<f64> {
        Ok(self.norm_sq(a)?.max(0.0).sqrt())
    }

    /// `‖a‖²_{M⁻¹}`; only the identity metric supports it.
    pub fn inv_norm_sq(&self, a: &[f64]) -> Result<f64> {
        match self {
            Metric::Identity => Ok(vector::norm_sq(a)),
            Metric::PrimalDual { .. } => Err(Error::UnsupportedMetric { op: "inv_norm_sq", kind: self.kind() }),
        }
    }

    /// `M a` for the identity metric or the primal-dual block operator.
    pub fn apply(&self, a: &[f64]) -> Result<Vec<f64>> {
        self.check(a, a)?;
        Ok(match self {
            Metric::Identity => a.to_vec(),
            Metric::PrimalDual { tau, sigma, map } => {
                let d = map.in_dim();
                let (x, mu) = a.split_at(d);
                let mut out = vec![0.0; a.len()];
                let (ox, om) = out.split_at_mut(d);
                map.apply_adjoint(mu, ox);
                for (o, xi) in ox.iter_mut().zip(x) {
                    *o = xi - tau * *o;
                }
                map.apply(x, om);
                for (o, mi) in om.iter_mut().zip(mu) {
                    *o = tau / sigma * mi - tau * *o;
                }
                out
            }
        })
    }
}

/// `‖(x, μ)‖²_M = ‖x‖² − 2τ<Lx, μ> + (τ/σ)‖μ‖²` given a precomputed `Lx`.
pub fn pd_norm_sq_from_image(tau: f64, sigma: f64, x: &[f64], mu: &[f64], lx: &[f64]) -> f64 {
    vector::norm_sq(x) - 2.0 * tau * vector::dot(lx, mu) + tau / sigma * vector::norm_sq(mu)
}

#[derive(Debug, Clone, Copy)]
pub struct PowerIterOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for PowerIterOptions {
    fn default() -> Self {
        Self { max_iters: 10_000, tol: 1e-12, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Power iteration on `L*L` from a seeded random start. Returns the square
/// root of the Rayleigh quotient once successive estimates agree to `tol`
/// (relative); `converged` is false if `max_iters` ran out first.
pub fn operator_norm_estimate(map: &dyn LinearMap, opts: &PowerIterOptions) -> Result<NormEstimate> {
    if opts.max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
    }
    let mut rng = crate::rng::stream(opts.seed, "power-iteration");
    let mut v: Vec<f64> = (0..map.in_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = vector::norm(&v);
    if n == 0.0 {
        return Err(Error::ZeroMap);
    }
    vector::scale_in_place(&mut v, 1.0 / n);
    let mut lv = vec![0.0; map.out_dim()];
    let mut w = vec![0.0; map.in_dim()];
    let mut prev = f64::NAN;
    for k in 1..=opts.max_iters {
        map.apply(&v, &mut lv);
        map.apply_adjoint(&lv, &mut w);
        // Rayleigh quotient of L*L at unit v is ‖Lv‖²
        let est = vector::norm(&lv);
        let wn = vector::norm(&w);
        if wn == 0.0 {
            if k == 1 && est == 0.0 {
                return Err(Error::ZeroMap);
            }
            return Ok(NormEstimate { value: est, converged: true, iterations: k });
        }
        if (est - prev).abs() <= opts.tol * est {
            return Ok(NormEstimate { value: est, converged: true, iterations: k });
        }
        prev = est;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
    }
    Ok(NormEstimate { value: prev, converged: false, iterations: opts.max_iters })
}
