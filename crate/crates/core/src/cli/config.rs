//! Run configuration: defaults, `key = value` files, and flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fb::ZetaPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum AlgorithmKind {
    /// Forward-backward with deviations (identity metric).
    Fb,
    /// Primal-dual (Condat-Vu / Chambolle-Pock) with deviations.
    Pd,
    /// Krasnosel'skii-Mann on the forward-backward operator.
    Km,
    /// Inertial primal-dual method with cached `L` images.
    InertialPd,
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgorithmKind::Fb => "fb",
            AlgorithmKind::Pd => "pd",
            AlgorithmKind::Km => "km",
            AlgorithmKind::InertialPd => "inertial_pd",
        })
    }
}

impl FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(s, false).map_err(|_| Error::InvalidArgument(format!("unknown algorithm `{s}` (expected fb, pd, km or inertial_pd)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Svm(PathBuf),
    Synthetic { seed: u64, dim: usize },
    Toy1d,
}

impl Source {
    /// Parses `seed:dim`.
    pub fn synthetic(spec: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("synthetic spec `{spec}` must be <seed>:<dim>"));
        let (seed, dim) = spec.split_once(':').ok_or_else(bad)?;
        Ok(Source::Synthetic { seed: seed.trim().parse().map_err(|_| bad())?, dim: dim.trim().parse().map_err(|_| bad())? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    Zero,
    Momentum,
    /// Proposals this many times over budget.
    Hostile(f64),
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(PolicyKind::Zero),
            "momentum" => Ok(PolicyKind::Momentum),
            t => match t.strip_prefix("hostile:").map(str::parse::<f64>) {
                Some(Ok(f)) if f > 0.0 => Ok(PolicyKind::Hostile(f)),
                _ => Err(Error::InvalidArgument(format!("unknown policy `{s}` (expected zero, momentum or hostile:<factor>)"))),
            },
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::Zero => f.write_str("zero"),
            PolicyKind::Momentum => f.write_str("momentum"),
            PolicyKind::Hostile(x) => write!(f, "hostile:{x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: Option<AlgorithmKind>,
    pub source: Option<Source>,
    pub xi: f64,
    pub lambda: f64,
    /// `None` picks `1/β` (forward-backward) or `0.99/‖L‖` (primal-dual).
    pub gamma: Option<f64>,
    pub epsilon: f64,
    pub zeta: ZetaPolicy,
    /// `None` means zero deviations (the classical method).
    pub policy: Option<PolicyKind>,
    pub max_iter: usize,
    pub residual_tol: f64,
    pub a_max: f64,
    pub out: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    /// Seeds the power iteration and the hostile policy.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithm: None,
            source: None,
            xi: 0.1,
            lambda: 1.0,
            gamma: None,
            epsilon: 1e-6,
            zeta: ZetaPolicy::Uniform { seed: 0 },
            policy: None,
            max_iter: 100_000,
            residual_tol: 1e-10,
            a_max: 10.0,
            out: None,
            reference: None,
            seed: 0,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::InvalidArgument(format!("`{key}`: cannot parse `{v}`")))
}

impl RunConfig {
    /// Sets one field from its textual form. Keys are the flag names
    /// without dashes; `_` and `-` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let v = value.trim();
        match key.as_str() {
            "algorithm" => self.algorithm = Some(v.parse()?),
            "svm" => self.source = Some(Source::Svm(PathBuf::from(v))),
            "synthetic" => self.source = Some(Source::synthetic(v)?),
            "toy1d" => {
                if num::<bool>(&key, v)? {
                    self.source = Some(Source::Toy1d);
                }
            }
            "xi" => self.xi = num(&key, v)?,
            "lambda" => self.lambda = num(&key, v)?,
            "gamma" => self.gamma = Some(num(&key, v)?),
            "epsilon" => self.epsilon = num(&key, v)?,
            "zeta" => self.zeta = v.parse().map_err(Error::InvalidArgument)?,
            "policy" => self.policy = Some(v.parse()?),
            "max-iter" => self.max_iter = num(&key, v)?,
            "residual-tol" => self.residual_tol = num(&key, v)?,
            "a-max" => self.a_max = num(&key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "reference" => self.reference = Some(PathBuf::from(v)),
            "seed" => self.seed = num(&key, v)?,
            _ => return Err(Error::InvalidArgument(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` file. `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("{}: expected key = value", path.display()) })?;
            self.set(k, v).map_err(|e| Error::Parse { line: i + 1, msg: format!("{}: {e}", path.display()) })?;
        }
        Ok(())
    }

    pub fn algorithm(&self) -> Result<AlgorithmKind> {
        self.algorithm.ok_or_else(|| Error::InvalidArgument("no algorithm given (--algorithm fb|pd|km|inertial_pd)".into()))
    }

    pub fn source(&self) -> Result<&Source> {
        self.source.as_ref().ok_or_else(|| Error::InvalidArgument("no problem given (--svm <path>, --synthetic <seed>:<dim> or --toy1d)".into()))
    }
}
