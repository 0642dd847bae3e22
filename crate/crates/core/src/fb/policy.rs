//! Deviation policies: how `(u_{n+1}, v_{n+1})` are proposed. The solver
//! rescales any proposal that exceeds the budget, so a policy never has to be
//! trusted.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::budget::DeviationBudget;
use crate::error::Result;
use crate::metric::Metric;
use crate::vector;

/// Everything a policy may look at after step `n`.
#[derive(Debug)]
pub struct PolicyContext<'a> {
    pub n: usize,
    pub x: &'a [f64],
    pub x_next: &'a [f64],
    pub p: &'a [f64],
    pub u: &'a [f64],
    pub v: &'a [f64],
    pub gamma: f64,
    pub lambda: f64,
    pub beta: f64,
    pub metric: &'a Metric,
    pub budget: &'a DeviationBudget,
}

/// A proposal. `scaling` is an optional scalar the policy wants recorded
/// (the momentum coefficient for inertial policies).
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub scaling: Option<f64>,
}

impl Proposal {
    pub fn zeros(dim: usize) -> Self {
        Self { u: vec![0.0; dim], v: vec![0.0; dim], scaling: None }
    }
}

pub trait DeviationPolicy {
    fn propose(&mut self, ctx: &PolicyContext<'_>) -> Result<Proposal>;
}

/// `u = v = 0`: the plain relaxed forward-backward method.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPolicy;

impl DeviationPolicy for ZeroPolicy {
    fn propose(&mut self, ctx: &PolicyContext<'_>) -> Result<Proposal> {
        Ok(Proposal::zeros(ctx.x.len()))
    }
}

/// Which deviation vectors carry the momentum direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentumMode {
    /// `u = 0`, `v = a (x_{n+1} − x_n)`.
    #[default]
    VOnly,
    /// `u = v = a (x_{n+1} − x_n)`.
    Both,
}

/// Heavy-ball direction `x_{n+1} − x_n`, scaled to saturate the budget and
/// capped at `a_max`. With `VOnly` on a primal-dual problem this is the
/// inertial rule that chooses `a_{n+1}` from the norm condition.
#[derive(Debug, Clone, Copy)]
pub struct MomentumPolicy {
    pub mode: MomentumMode,
    pub a_max: f64,
}

impl MomentumPolicy {
    pub fn new(a_max: f64) -> Self {
        Self { mode: MomentumMode::VOnly, a_max }
    }

    pub fn with_mode(mut self, mode: MomentumMode) -> Self {
        self.mode = mode;
        self
    }
}

impl Default for MomentumPolicy {
    fn default() -> Self {
        Self::new(10.0)
    }
}

impl DeviationPolicy for MomentumPolicy {
    fn propose(&mut self, ctx: &PolicyContext<'_>) -> Result<Proposal> {
        let d = vector::sub(ctx.x_next, ctx.x);
        let dn = ctx.metric.norm_sq(&d)?;
        let b = ctx.budget;
        let weight = match self.mode {
            MomentumMode::VOnly => b.weight_v,
            MomentumMode::Both => b.weight_u + b.weight_v,
        };
        let denom = weight * dn;
        let a = if denom > 0.0 { (b.rhs / denom).sqrt().min(self.a_max) } else { 0.0 };
        let v = vector::scale(&d, a);
        let u = match self.mode {
            MomentumMode::VOnly => vec![0.0; d.len()],
            MomentumMode::Both => v.clone(),
        };
        Ok(Proposal { u, v, scaling: Some(a) })
    }
}

/// Proposes vectors `factor` times larger than the saturating ones, in a
/// random direction. Exists to exercise the safeguard.
#[derive(Debug, Clone)]
pub struct HostilePolicy {
    pub factor: f64,
    rng: ChaCha8Rng,
}

impl HostilePolicy {
    pub fn new(factor: f64, seed: u64) -> Self {
        Self { factor, rng: crate::rng::stream(seed, "hostile-policy") }
    }
}

impl DeviationPolicy for HostilePolicy {
    fn propose(&mut self, ctx: &PolicyContext<'_>) -> Result<Proposal> {
        let dim = ctx.x.len();
        let mut u: Vec<f64> = (0..dim).map(|_| self.rng.random_range(-1.0..1.0)).collect();
        let mut v: Vec<f64> = (0..dim).map(|_| self.rng.random_range(-1.0..1.0)).collect();
        let lhs = ctx.budget.lhs(&u, &v, ctx.metric)?;
        // saturating size times `factor`; unit size when the budget is empty
        let s = if lhs > 0.0 && ctx.budget.rhs > 0.0 { self.factor * (ctx.budget.rhs / lhs).sqrt() } else { self.factor };
        vector::scale_in_place(&mut u, s);
        vector::scale_in_place(&mut v, s);
        Ok(Proposal { u, v, scaling: None })
    }
}

/// Adapter for closures.
pub struct FnPolicy<F>(pub F);

impl<F> DeviationPolicy for FnPolicy<F>
where
    F: FnMut(&PolicyContext<'_>) -> Proposal,
{
    fn propose(&mut self, ctx: &PolicyContext<'_>) -> Result<Proposal> {
        Ok((self.0)(ctx))
    }
}
