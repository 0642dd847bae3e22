//! Post-hoc checks of the convergence guarantees on recorded traces, and an
//! empirical linear-rate fit.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::trace::{AuditTable, Trace};
use crate::vector;

/// Default relative slack for the Lyapunov inequalities.
pub const LYAPUNOV_SLACK: f64 = 1e-9;
/// Default relative slack for the budget condition.
pub const BUDGET_SLACK: f64 = 1e-12;

/// The columns the checks need, one entry per step (`dist_sq` has one more).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LyapunovInput {
    /// `‖x_n − x*‖²_M` for `n = 0..=K`.
    pub dist_sq: Vec<f64>,
    pub ell_sq: Vec<f64>,
    pub zeta: Vec<f64>,
    /// `w_u(n)‖u_n‖²_M + w_v(n)‖v_n‖²_M`
    pub dev_weighted_sq: Vec<f64>,
    /// `ζ_{n−1} ℓ_{n−1}²` (0 at `n = 0`)
    pub budget_rhs: Vec<f64>,
    /// `max(‖u_n‖_M, ‖v_n‖_M)`
    pub dev_norm: Vec<f64>,
}

impl LyapunovInput {
    /// From a trace that recorded distances to a reference.
    pub fn from_trace(trace: &Trace) -> Result<Self> {
        let dist = trace.distances.as_ref().ok_or(Error::MissingTraceField("distances"))?;
        Self::from_parts(trace, dist.m_sq.clone())
    }

    /// From a trace with stored iterates, measuring distances to `x_star`.
    pub fn from_iterates(trace: &Trace, x_star: &[f64], metric: &Metric) -> Result<Self> {
        let its = trace.iterates.as_ref().ok_or(Error::MissingTraceField("iterates"))?;
        let d = its.iter().map(|x| metric.norm_sq(&vector::sub(x, x_star))).collect::<Result<Vec<_>>>()?;
        Self::from_parts(trace, d)
    }

    fn from_parts(trace: &Trace, dist_sq: Vec<f64>) -> Result<Self> {
        if dist_sq.len() != trace.records.len() + 1 {
            return Err(Error::MissingTraceField("one distance per iterate"));
        }
        let r = &trace.records;
        Ok(Self {
            dist_sq,
            ell_sq: r.iter().map(|r| r.ell_sq).collect(),
            zeta: r.iter().map(|r| r.zeta).collect(),
            dev_weighted_sq: r.iter().map(|r| r.dev_weighted_sq()).collect(),
            budget_rhs: r.iter().map(|r| r.budget_rhs).collect(),
            dev_norm: r.iter().map(|r| r.u_norm_m_sq.max(r.v_norm_m_sq).sqrt()).collect(),
        })
    }

    /// From a parsed audit sidecar.
    pub fn from_audit(a: &AuditTable) -> Result<Self> {
        let dist_sq = a.dist_sq_m.iter().map(|d| d.ok_or(Error::MissingTraceField("dist_sq_m"))).collect::<Result<Vec<_>>>()?;
        if dist_sq.len() != a.ell_sq.len() + 1 {
            return Err(Error::MissingTraceField("final distance row"));
        }
        Ok(Self {
            dist_sq,
            ell_sq: a.ell_sq.clone(),
            zeta: a.zeta.clone(),
            dev_weighted_sq: a.dev_weighted_sq.clone(),
            budget_rhs: a.budget_rhs.clone(),
            dev_norm: a.u_norm_m_sq.iter().zip(&a.v_norm_m_sq).map(|(u, v)| u.max(*v).sqrt()).collect(),
        })
    }

    pub fn steps(&self) -> usize {
        self.ell_sq.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    /// `d_{n+1} + ℓ_n² ≤ d_n + w_u‖u_n‖² + w_v‖v_n‖²`
    Deviations,
    /// `d_{n+1} + ℓ_n² ≤ d_n + ζ_{n−1}ℓ_{n−1}²`
    Budgeted,
    /// `w_u‖u_n‖² + w_v‖v_n‖² ≤ ζ_{n−1}ℓ_{n−1}²`
    Budget,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub n: usize,
    pub inequality: Inequality,
    /// `lhs − rhs − slack`
    pub excess: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LyapunovReport {
    /// `d_{n+1} + ℓ_n²`
    pub lhs: Vec<f64>,
    /// `d_n + w_u‖u_n‖² + w_v‖v_n‖²`
    pub rhs_deviations: Vec<f64>,
    /// `d_n + ζ_{n−1}ℓ_{n−1}²`
    pub rhs_budgeted: Vec<f64>,
    pub violations: Vec<Violation>,
    /// Largest `lhs − rhs` over both inequalities (may be negative).
    pub max_gap: f64,
}

impl LyapunovReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// Evaluates both Lyapunov inequalities and the budget condition at every
/// step. The slack is `slack·(1 + d_n)` for the inequalities and
/// `BUDGET_SLACK·(1 + rhs)` for the budget.
pub fn check_lyapunov(input: &LyapunovInput, slack: f64) -> LyapunovReport {
    let k = input.steps();
    let mut rep = LyapunovReport { max_gap: f64::NEG_INFINITY, ..Default::default() };
    for n in 0..k {
        let d = input.dist_sq[n];
        let lhs = input.dist_sq[n + 1] + input.ell_sq[n];
        let r42 = d + input.dev_weighted_sq[n];
        let r43 = d + if n > 0 { input.zeta[n - 1] * input.ell_sq[n - 1] } else { 0.0 };
        let tol = slack * (1.0 + d);
        for (rhs, which) in [(r42, Inequality::Deviations), (r43, Inequality::Budgeted)] {
            rep.max_gap = rep.max_gap.max(lhs - rhs);
            if lhs > rhs + tol {
                rep.violations.push(Violation { n, inequality: which, excess: lhs - rhs - tol });
            }
        }
        let b = input.budget_rhs[n];
        let btol = BUDGET_SLACK * (1.0 + b);
        if input.dev_weighted_sq[n] > b + btol {
            rep.violations.push(Violation { n, inequality: Inequality::Budget, excess: input.dev_weighted_sq[n] - b - btol });
        }
        rep.lhs.push(lhs);
        rep.rhs_deviations.push(r42);
        rep.rhs_budgeted.push(r43);
    }
    rep
}

/// Convenience: check a trace that recorded distances.
pub fn check_trace(trace: &Trace) -> Result<LyapunovReport> {
    Ok(check_lyapunov(&LyapunovInput::from_trace(trace)?, LYAPUNOV_SLACK))
}

/// Convergence-theorem properties on a recorded run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceAudit {
    /// Largest `Σ_{n=1}^{N}(1−ζ_n)ℓ_n² − (d_1 + ζ_0ℓ_0²)` over `N`.
    pub summability_gap: f64,
    pub summability_ok: bool,
    /// Largest increase of `d_n + ℓ_{n−1}²`, `n ≥ 1`.
    pub fejer_max_increase: f64,
    pub fejer_ok: bool,
    /// Largest deviation norm over the last 10% of steps, relative to
    /// `√d_0`.
    pub tail_deviation_rel: f64,
    pub deviations_vanish: bool,
}

impl ConvergenceAudit {
    pub fn passed(&self) -> bool {
        self.summability_ok && self.fejer_ok && self.deviations_vanish
    }
}

/// Summability of `(1−ζ_n)ℓ_n²`, monotonicity of `d_n + ℓ_{n−1}²`, and
/// vanishing deviations (tail max ≤ `tail_tol`·initial distance).
pub fn audit_convergence(input: &LyapunovInput, slack: f64, tail_tol: f64) -> ConvergenceAudit {
    let k = input.steps();
    let d = &input.dist_sq;
    let mut gap = f64::NEG_INFINITY;
    let mut ok = true;
    if k >= 1 {
        let bound = d[1] + input.zeta[0] * input.ell_sq[0];
        let mut sum = 0.0;
        for n in 1..k {
            sum += (1.0 - input.zeta[n]) * input.ell_sq[n];
            gap = gap.max(sum - bound);
            if sum > bound + slack * (1.0 + bound) {
                ok = false;
            }
        }
    }
    let mut inc = f64::NEG_INFINITY;
    let mut fejer_ok = true;
    for n in 1..k {
        let f = d[n] + input.ell_sq[n - 1];
        let g = d[n + 1] + input.ell_sq[n];
        inc = inc.max(g - f);
        if g > f + slack * (1.0 + f) {
            fejer_ok = false;
        }
    }
    let tail_start = k - k / 10;
    let d0 = d[0].max(0.0).sqrt();
    let tail = input.dev_norm[tail_start.min(k)..].iter().copied().fold(0.0, f64::max);
    let rel = if d0 > 0.0 { tail / d0 } else { tail };
    ConvergenceAudit {
        summability_gap: gap,
        summability_ok: ok,
        fejer_max_increase: inc,
        fejer_ok,
        tail_deviation_rel: rel,
        deviations_vanish: rel <= tail_tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateFlag {
    /// Log-distances do not vary, so `r²` is undefined.
    UndefinedR2,
    /// Every distance in the window is at noise level; no fit.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// `exp(2·slope)`: per-step contraction of the squared distance.
    pub q_hat: f64,
    pub r_squared: Option<f64>,
    pub window: Range<usize>,
    pub flag: Option<RateFlag>,
}

/// Which part of the sequence to fit.
#[derive(Debug, Clone, PartialEq)]
pub enum RateWindow {
    /// Drop this leading fraction of the sequence.
    SkipFraction(f64),
    Range(Range<usize>),
}

impl Default for RateWindow {
    fn default() -> Self {
        RateWindow::SkipFraction(0.5)
    }
}

/// Distances at or below this are treated as noise.
const NOISE_FLOOR: f64 = 1e-300;

/// Least-squares fit of `log d_n` against `n` over the window.
pub fn fit_linear_rate(distances: &[f64], window: &RateWindow) -> Result<RateFit> {
    if distances.len() < 20 {
        return Err(Error::InvalidArgument(format!("rate fit needs at least 20 points, got {}", distances.len())));
    }
    if distances.iter().any(|d| !(*d >= 0.0)) {
        return Err(Error::InvalidArgument("distances must be nonnegative".into()));
    }
    let w = match window {
        RateWindow::SkipFraction(f) => {
            if !(0.0..1.0).contains(f) {
                return Err(Error::InvalidArgument(format!("skip fraction {f} outside [0, 1)")));
            }
            ((distances.len() as f64 * f).floor() as usize)..distances.len()
        }
        RateWindow::Range(r) => r.clone(),
    };
    if w.end > distances.len() || w.len() < 2 {
        return Err(Error::InvalidArgument(format!("bad fit window {w:?} for {} points", distances.len())));
    }
    let pts: Vec<(f64, f64)> = w.clone().filter(|&i| distances[i] > NOISE_FLOOR).map(|i| (i as f64, distances[i].ln())).collect();
    if pts.len() < 2 {
        return Ok(RateFit { q_hat: f64::NAN, r_squared: None, window: w, flag: Some(RateFlag::Degenerate) });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let q_hat = (2.0 * slope).exp();
    // syy at rounding level of the log values means a flat sequence
    let flat = syy <= 1e-24 * m * (1.0 + my * my);
    if flat {
        return Ok(RateFit { q_hat, r_squared: None, window: w, flag: Some(RateFlag::UndefinedR2) });
    }
    let r2 = (sxy * sxy) / (sxx * syy);
    Ok(RateFit { q_hat, r_squared: Some(r2), window: w, flag: None })
}
