use std::path::PathBuf;

use thiserror::Error;

use crate::fb::ScheduleViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation `{op}` is not supported for the {kind} metric")]
    UnsupportedMetric { op: &'static str, kind: &'static str },

    #[error("primal-dual metric is not strongly positive: sigma*tau*||L||^2*(1+margin) = {product} >= 1")]
    MetricNotPositive { product: f64 },

    #[error("linear map is zero; its operator norm cannot be estimated")]
    ZeroMap,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {what} at iteration {iter}")]
    NonFinite { what: &'static str, iter: usize },

    #[error(transparent)]
    Schedule(#[from] ScheduleViolation),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("trace is missing `{0}`")]
    MissingTraceField(&'static str),

    #[error("csv schema mismatch in {path}: {msg}")]
    Schema { path: PathBuf, msg: String },

    #[error("reference run did not converge: residual {residual:e} after {iters} iterations")]
    ReferenceNotConverged { residual: f64, iters: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
