//! Parameter sequences (γ_n, λ_n, ζ_n) and their admissibility check.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::rng;

/// Upper end of the uniform ζ distribution is `1 - ZETA_GAP`.
pub const ZETA_GAP: f64 = 1e-6;

/// A real sequence indexed by the iteration counter.
#[derive(Clone)]
pub enum Sequence {
    Constant(f64),
    /// Explicit values; the last one repeats past the end.
    Values(Vec<f64>),
    Custom(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl Sequence {
    pub fn at(&self, n: usize) -> f64 {
        match self {
            Sequence::Constant(c) => *c,
            Sequence::Values(v) => v.get(n).or(v.last()).copied().unwrap_or(f64::NAN),
            Sequence::Custom(f) => f(n),
        }
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sequence::Constant(c) => write!(f, "Constant({c})"),
            Sequence::Values(v) => write!(f, "Values(len={})", v.len()),
            Sequence::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl From<f64> for Sequence {
    fn from(c: f64) -> Self {
        Sequence::Constant(c)
    }
}

/// Policy for ζ_n.
#[derive(Debug, Clone, PartialEq)]
pub enum ZetaPolicy {
    Zero,
    Const(f64),
    /// ζ_n drawn i.i.d. from `U[0, 1 - ZETA_GAP)`, reproducible by index.
    Uniform { seed: u64 },
}

impl ZetaPolicy {
    pub fn at(&self, n: usize) -> f64 {
        match self {
            ZetaPolicy::Zero => 0.0,
            ZetaPolicy::Const(c) => *c,
            ZetaPolicy::Uniform { seed } => {
                let mut r = rng::stream_at(*seed, "zeta", n as u64);
                r.random::<f64>() * (1.0 - ZETA_GAP)
            }
        }
    }
}

impl std::str::FromStr for ZetaPolicy {
    type Err = String;

    /// `zero`, `const:<c>` or `uniform:<seed>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "zero" {
            return Ok(ZetaPolicy::Zero);
        }
        if let Some(c) = s.strip_prefix("const:") {
            return c.parse().map(ZetaPolicy::Const).map_err(|e| format!("bad zeta constant `{c}`: {e}"));
        }
        if let Some(seed) = s.strip_prefix("uniform:") {
            return seed.parse().map(|seed| ZetaPolicy::Uniform { seed }).map_err(|e| format!("bad zeta seed `{seed}`: {e}"));
        }
        Err(format!("unknown zeta policy `{s}` (expected zero, const:<c> or uniform:<seed>)"))
    }
}

impl fmt::Display for ZetaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZetaPolicy::Zero => write!(f, "zero"),
            ZetaPolicy::Const(c) => write!(f, "const:{c}"),
            ZetaPolicy::Uniform { seed } => write!(f, "uniform:{seed}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Schedules {
    pub epsilon: f64,
    pub gamma: Sequence,
    pub lambda: Sequence,
    pub zeta: ZetaPolicy,
}

impl Schedules {
    pub fn constant(epsilon: f64, gamma: f64, lambda: f64, zeta: ZetaPolicy) -> Self {
        Self { epsilon, gamma: gamma.into(), lambda: lambda.into(), zeta }
    }

    pub fn gamma(&self, n: usize) -> f64 {
        self.gamma.at(n)
    }

    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda.at(n)
    }

    pub fn zeta(&self, n: usize) -> f64 {
        self.zeta.at(n)
    }
}

/// Which admissibility clause failed. `Epsilon` is the range condition on ε
/// itself; `Zeta`, `Gamma` and `Lambda` are clauses (i), (ii) and (iii).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    Epsilon,
    Zeta,
    Gamma,
    Lambda,
}

impl Clause {
    pub fn label(self) -> &'static str {
        match self {
            Clause::Epsilon => "(eps)",
            Clause::Zeta => "(i)",
            Clause::Gamma => "(ii)",
            Clause::Lambda => "(iii)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("parameter condition {} violated{}: {detail}", .clause.label(), .index.map(|n| format!(" at n={n}")).unwrap_or_default())]
pub struct ScheduleViolation {
    pub clause: Clause,
    pub index: Option<usize>,
    pub detail: String,
}

fn violation(clause: Clause, index: Option<usize>, detail: String) -> ScheduleViolation {
    ScheduleViolation { clause, index, detail }
}

/// Checks the admissibility conditions for `n = 0..=horizon` and reports the
/// first violated clause.
pub fn validate_schedules(s: &Schedules, beta: f64, horizon: usize) -> Result<(), ScheduleViolation> {
    let eps = s.epsilon;
    let eps_hi = 1f64.min(4.0 / (3.0 + beta));
    if !(eps > 0.0 && eps < eps_hi) {
        return Err(violation(Clause::Epsilon, None, format!("epsilon = {eps} must lie in (0, min(1, 4/(3+beta))) = (0, {eps_hi})")));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(violation(Clause::Gamma, None, format!("beta = {beta} must be finite and nonnegative")));
    }
    for n in 0..=horizon {
        let zeta = s.zeta(n);
        if !(0.0..=1.0 - eps).contains(&zeta) {
            return Err(violation(Clause::Zeta, Some(n), format!("zeta_n = {zeta} must lie in [0, 1 - epsilon] = [0, {}]", 1.0 - eps)));
        }
        let gamma = s.gamma(n);
        if !(gamma >= eps) {
            return Err(violation(Clause::Gamma, Some(n), format!("gamma_n = {gamma} is below epsilon = {eps}")));
        }
        if beta > 0.0 {
            let hi = (4.0 - 3.0 * eps) / beta;
            if !(gamma <= hi) {
                return Err(violation(Clause::Gamma, Some(n), format!("gamma_n = {gamma} exceeds (4 - 3 epsilon)/beta = {hi}")));
            }
        }
        let lambda = s.lambda(n);
        let hi = 2.0 - gamma * beta / 2.0 - eps / 2.0;
        if !(lambda >= eps && lambda <= hi) {
            return Err(violation(
                Clause::Lambda,
                Some(n),
                format!("lambda_n = {lambda} must lie in [epsilon, 2 - gamma_n*beta/2 - epsilon/2] = [{eps}, {hi}]"),
            ));
        }
    }
    Ok(())
}
