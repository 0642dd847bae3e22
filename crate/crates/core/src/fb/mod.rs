//! Forward-backward splitting with deviations.

pub mod budget;
pub mod policy;
pub mod schedule;
pub mod solver;

pub use budget::{budget_weights, deviation_budget, ell_sq, enforce_budget, residual_bound, DeviationBudget, Enforcement};
pub use policy::{DeviationPolicy, FnPolicy, HostilePolicy, MomentumMode, MomentumPolicy, PolicyContext, Proposal, ZeroPolicy};
pub use schedule::{validate_schedules, Clause, ScheduleViolation, Schedules, Sequence, ZetaPolicy, ZETA_GAP};
pub use solver::{delta, fb_step, solve, FbProblem, FbState, SolveOptions, SplittingProblem, StepOutput};
