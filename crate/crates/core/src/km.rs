//! Krasnosel'skii-Mann iteration with deviations for `x = Tx`, `T`
//! nonexpansive.
//!
//! Runs through the forward-backward core with `C = 0`, `M = I`, `u = 0`
//! and the backward step `p = ½z + ½Tz`, which is the resolvent of the
//! maximally monotone operator whose resolvent is `½(Id + T)`.

use std::sync::Arc;

use crate::error::Result;
use crate::fb::{fb_step, FbState, SplittingProblem, StepOutput};
use crate::metric::Metric;
use crate::vector;

pub trait NonexpansiveMap: Send + Sync {
    fn apply(&self, x: &[f64], out: &mut [f64]);
}

/// Plane rotation by `theta`; the only fixed point is the origin unless
/// `theta` is a multiple of `2π`.
#[derive(Debug, Clone, Copy)]
pub struct Rotation2d {
    pub theta: f64,
}

impl NonexpansiveMap for Rotation2d {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let (s, c) = self.theta.sin_cos();
        out[0] = c * x[0] - s * x[1];
        out[1] = s * x[0] + c * x[1];
    }
}

/// Projection onto the box `[lo, hi]` (componentwise).
#[derive(Debug, Clone)]
pub struct BoxProjection {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl NonexpansiveMap for BoxProjection {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = x[i].clamp(self.lo[i], self.hi[i]);
        }
    }
}

/// Projection onto the closed ball `‖x − center‖ ≤ radius`.
#[derive(Debug, Clone)]
pub struct BallProjection {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl NonexpansiveMap for BallProjection {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let d = vector::distance(x, &self.center);
        let s = if d > self.radius { self.radius / d } else { 1.0 };
        for i in 0..x.len() {
            out[i] = self.center[i] + s * (x[i] - self.center[i]);
        }
    }
}

/// `T_k ∘ … ∘ T_1` (the first map in the list is applied first).
#[derive(Clone)]
pub struct Composition(pub Vec<Arc<dyn NonexpansiveMap>>);

impl NonexpansiveMap for Composition {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut cur = x.to_vec();
        for t in &self.0 {
            t.apply(&cur, out);
            cur.copy_from_slice(out);
        }
        out.copy_from_slice(&cur);
    }
}

/// The forward-backward operator `x ↦ J_{γA}(x − γCx)` of an identity-metric
/// problem. It is averaged, hence nonexpansive, for `γ ≤ 2/β`.
#[derive(Clone)]
pub struct ForwardBackwardMap {
    problem: crate::fb::FbProblem,
    gamma: f64,
}

impl ForwardBackwardMap {
    pub fn new(problem: crate::fb::FbProblem, gamma: f64) -> Result<Self> {
        let beta = problem.beta();
        if !(gamma > 0.0) || (beta > 0.0 && gamma > 2.0 / beta) {
            return Err(crate::Error::InvalidArgument(format!("forward-backward map needs 0 < gamma <= 2/beta, got gamma = {gamma}, beta = {beta}")));
        }
        Ok(Self { problem, gamma })
    }
}

impl NonexpansiveMap for ForwardBackwardMap {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut cx = vec![0.0; x.len()];
        self.problem.forward(x, &mut cx);
        self.problem.backward(self.gamma, x, Some(&cx), out).expect("identity-metric backward step");
    }
}

/// Fixed-point problem for `T` in the shape the core expects.
#[derive(Clone)]
pub struct KmProblem {
    t: Arc<dyn NonexpansiveMap>,
    dim: usize,
}

impl KmProblem {
    pub fn new(dim: usize, t: Arc<dyn NonexpansiveMap>) -> Self {
        Self { t, dim }
    }

    /// `‖Tx − x‖`
    pub fn fixed_point_residual(&self, x: &[f64]) -> f64 {
        let mut tx = vec![0.0; x.len()];
        self.t.apply(x, &mut tx);
        vector::distance(&tx, x)
    }
}

static IDENTITY: Metric = Metric::Identity;

impl SplittingProblem for KmProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn beta(&self) -> f64 {
        0.0
    }

    fn metric(&self) -> &Metric {
        &IDENTITY
    }

    fn forward(&self, _y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
    }

    /// `p = ½z + ½Tz`; `γ` plays no role.
    fn backward(&self, _gamma: f64, z: &[f64], _cy: Option<&[f64]>, out: &mut [f64]) -> Result<()> {
        self.t.apply(z, out);
        for (o, z) in out.iter_mut().zip(z) {
            *o = 0.5 * z + 0.5 * *o;
        }
        Ok(())
    }
}

/// One step: `z = x + v`, `p = ½(Id + T)z`, `x⁺ = (1−λ)x + λ(p − v)`.
pub fn km_step(problem: &KmProblem, state: &FbState, lambda: f64) -> Result<StepOutput> {
    fb_step(problem, state, 1.0, lambda)
}

/// Right-hand side of the deviation bound for `v_{n+1}`:
/// `ζ_n λ_n(2−λ_n)(2−λ_{n+1})/λ_{n+1} · ‖p − x + ((λ_n−1)/(2−λ_n)) v‖²`.
pub fn km_budget_rhs(x: &[f64], p: &[f64], v: &[f64], lambda: f64, lambda_next: f64, zeta: f64) -> f64 {
    let c = (lambda - 1.0) / (2.0 - lambda);
    let w: Vec<f64> = (0..x.len()).map(|i| p[i] - x[i] + c * v[i]).collect();
    zeta * lambda * (2.0 - lambda) * (2.0 - lambda_next) / lambda_next * vector::norm_sq(&w)
}
