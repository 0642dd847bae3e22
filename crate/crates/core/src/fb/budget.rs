//! The deviation budget, the quantity ℓ_n², and the computable residual bound.

use crate::error::Result;
use crate::metric::Metric;
use crate::vector;

/// Weights and right-hand side of the norm condition on `(u_{n+1}, v_{n+1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationBudget {
    pub weight_u: f64,
    pub weight_v: f64,
    /// `ζ_n ℓ_n²`
    pub rhs: f64,
}

impl DeviationBudget {
    /// `weight_u ‖u‖²_M + weight_v ‖v‖²_M`
    pub fn lhs(&self, u: &[f64], v: &[f64], metric: &Metric) -> Result<f64> {
        let mut lhs = 0.0;
        if self.weight_u != 0.0 {
            lhs += self.weight_u * metric.norm_sq(u)?;
        }
        lhs += self.weight_v * metric.norm_sq(v)?;
        Ok(lhs)
    }

    pub fn is_satisfied(&self, u: &[f64], v: &[f64], metric: &Metric, slack: f64) -> Result<bool> {
        Ok(self.lhs(u, v, metric)? <= self.rhs + slack * (1.0 + self.rhs))
    }
}

/// `(λγβ/(2−λγβ), λ(2−λγβ)/(4−2λ−γβ))`
pub fn budget_weights(gamma: f64, lambda: f64, beta: f64) -> (f64, f64) {
    let lgb = lambda * gamma * beta;
    (lgb / (2.0 - lgb), lambda * (2.0 - lgb) / (4.0 - 2.0 * lambda - gamma * beta))
}

/// `λ(4−2λ−γβ)/2 · ‖p − x + [λγβ/(2−λγβ)]u − [2(1−λ)/(4−2λ−γβ)]v‖²_M`
#[allow(clippy::too_many_arguments)]
pub fn ell_sq(x: &[f64], p: &[f64], u: &[f64], v: &[f64], gamma: f64, lambda: f64, beta: f64, metric: &Metric) -> Result<f64> {
    let lgb = lambda * gamma * beta;
    let denom = 4.0 - 2.0 * lambda - gamma * beta;
    let cu = lgb / (2.0 - lgb);
    let cv = 2.0 * (1.0 - lambda) / denom;
    let w: Vec<f64> = (0..x.len()).map(|i| p[i] - x[i] + cu * u[i] - cv * v[i]).collect();
    Ok((lambda * denom / 2.0 * metric.norm_sq(&w)?).max(0.0))
}

/// Budget for `(u_{n+1}, v_{n+1})`: weights at `(γ_{n+1}, λ_{n+1})`, rhs `ζ_n ℓ_n²`.
pub fn deviation_budget(gamma_next: f64, lambda_next: f64, beta: f64, zeta_n: f64, ell_sq_n: f64) -> DeviationBudget {
    let (weight_u, weight_v) = budget_weights(gamma_next, lambda_next, beta);
    DeviationBudget { weight_u, weight_v, rhs: zeta_n * ell_sq_n }
}

/// Upper bound on `‖Δ_n‖_{M⁻¹}` built only from iteration data:
/// `(1/2γ)‖(2−βγ)(x−p) − [λγβ(2−γβ)/(2−λγβ)]u + 2v‖_M + (β/2)‖x−p+u‖_M`.
#[allow(clippy::too_many_arguments)]
pub fn residual_bound(x: &[f64], p: &[f64], u: &[f64], v: &[f64], gamma: f64, lambda: f64, beta: f64, metric: &Metric) -> Result<f64> {
    let gb = gamma * beta;
    let cu = lambda * gb * (2.0 - gb) / (2.0 - lambda * gb);
    let a: Vec<f64> = (0..x.len()).map(|i| (2.0 - gb) * (x[i] - p[i]) - cu * u[i] + 2.0 * v[i]).collect();
    let mut bound = metric.norm(&a)? / (2.0 * gamma);
    if beta != 0.0 {
        let b: Vec<f64> = (0..x.len()).map(|i| x[i] - p[i] + u[i]).collect();
        bound += beta / 2.0 * metric.norm(&b)?;
    }
    Ok(bound)
}

/// Outcome of [`enforce_budget`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enforcement {
    /// Proposal's weighted norm before rescaling.
    pub proposed_lhs: f64,
    /// Factor applied to both vectors (1 when the proposal was admissible).
    pub factor: f64,
    /// Weighted norm after rescaling.
    pub lhs: f64,
}

/// Rescales `(u, v)` by `√(rhs / lhs)` (by 0 when `rhs = 0`) if the proposal
/// exceeds the budget.
pub fn enforce_budget(budget: &DeviationBudget, u: &mut [f64], v: &mut [f64], metric: &Metric) -> Result<Enforcement> {
    let proposed = budget.lhs(u, v, metric)?;
    if proposed <= budget.rhs {
        return Ok(Enforcement { proposed_lhs: proposed, factor: 1.0, lhs: proposed });
    }
    let factor = if budget.rhs > 0.0 { (budget.rhs / proposed).sqrt() } else { 0.0 };
    vector::scale_in_place(u, factor);
    vector::scale_in_place(v, factor);
    let lhs = budget.lhs(u, v, metric)?;
    Ok(Enforcement { proposed_lhs: proposed, factor, lhs })
}
