//! Forward-backward splitting with safeguarded deviation vectors.
//!
//! The core iteration ([`fb::solve`]) accepts, at every step, a pair of
//! deviation vectors proposed by a [`fb::DeviationPolicy`] and rescales them
//! into a computable norm budget, which keeps the usual convergence
//! guarantees. Special cases cover Condat-Vu / Chambolle-Pock
//! ([`primal_dual`]), Krasnosel'skii-Mann ([`km`]) and an inertial
//! primal-dual method whose momentum is sized by the budget
//! ([`primal_dual::InertialSolver`]).

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fb;
pub mod km;
pub mod metric;
pub mod operators;
pub mod primal_dual;
pub mod rng;
pub mod svm;
pub mod synthetic;
pub mod trace;
pub mod vector;

pub use error::{Error, Result};
pub use metric::Metric;
pub use vector::PdPoint;
