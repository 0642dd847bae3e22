//! Command-line front end: `solve`, `verify`, `compare`, `validate-config`.
//!
//! Exit codes: `solve` returns 0 on convergence, 2 when `max_iter` ran out,
//! 1 on errors; `verify` returns 0 when every trace is clean, 3 when any
//! Lyapunov violation was found, 1 on errors.

mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

pub use config::{AlgorithmKind, PolicyKind, RunConfig, Source};

use crate::diagnostics::{audit_convergence, check_lyapunov, fit_linear_rate, LyapunovInput, RateWindow, LYAPUNOV_SLACK};
use crate::error::{Error, Result};
use crate::fb::{
    solve, validate_schedules, DeviationPolicy, FbProblem, HostilePolicy, MomentumPolicy, Schedules, Sequence, SolveOptions,
    SplittingProblem, ZeroPolicy, ZetaPolicy,
};
use crate::km::{ForwardBackwardMap, KmProblem};
use crate::primal_dual::{InertialOptions, InertialSolver};
use crate::svm::{self, Algorithm, ExperimentConfig, SvmProblem};
use crate::trace::{self, Status, Trace};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "DEVSPLIT_THREADS";

/// Reference solves stop at this residual bound.
const REFERENCE_TOL: f64 = 1e-13;
const REFERENCE_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "devsplit", version, about = "Forward-backward splitting with safeguarded deviations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solver and write its trace.
    Solve(RunArgs),
    /// Check recorded traces for Lyapunov violations and fit a tail rate.
    Verify(VerifyArgs),
    /// Run several SVM configurations against one reference.
    Compare(CompareArgs),
    /// Check a configuration without running it.
    ValidateConfig(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgorithmKind>,
    /// LIBSVM data file.
    #[arg(long, conflicts_with_all = ["synthetic", "toy1d"])]
    pub svm: Option<PathBuf>,
    /// Seeded quadratic + l1 instance, `<seed>:<dim>`.
    #[arg(long, conflicts_with = "toy1d")]
    pub synthetic: Option<String>,
    /// One-dimensional instance `0 ∈ ∂|x| + x − 1`.
    #[arg(long)]
    pub toy1d: bool,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// `zero`, `const:<c>` or `uniform:<seed>`.
    #[arg(long)]
    pub zeta: Option<String>,
    /// `zero`, `momentum` or `hostile:<factor>`.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub residual_tol: Option<f64>,
    #[arg(long)]
    pub a_max: Option<f64>,
    /// Trace CSV; the audit sidecar goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reference solution file; computed and written if it does not exist.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl RunArgs {
    pub fn to_config(&self) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        if let Some(p) = &self.config {
            c.apply_file(p)?;
        }
        if let Some(a) = self.algorithm {
            c.algorithm = Some(a);
        }
        if let Some(p) = &self.svm {
            c.source = Some(Source::Svm(p.clone()));
        }
        if let Some(s) = &self.synthetic {
            c.source = Some(Source::synthetic(s)?);
        }
        if self.toy1d {
            c.source = Some(Source::Toy1d);
        }
        let pairs: [(&str, Option<String>); 12] = [
            ("xi", self.xi.map(|v| v.to_string())),
            ("lambda", self.lambda.map(|v| v.to_string())),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("epsilon", self.epsilon.map(|v| v.to_string())),
            ("zeta", self.zeta.clone()),
            ("policy", self.policy.clone()),
            ("max-iter", self.max_iter.map(|v| v.to_string())),
            ("residual-tol", self.residual_tol.map(|v| v.to_string())),
            ("a-max", self.a_max.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("reference", self.reference.as_ref().map(|p| p.display().to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                c.set(k, &v)?;
            }
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Trace CSVs written by `solve --out`.
    #[arg(required = true)]
    pub traces: Vec<PathBuf>,
    /// Reference the traces must have been recorded against.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Leading fraction of the distance trace excluded from the rate fit.
    #[arg(long, default_value_t = 0.5)]
    pub rate_skip: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub svm: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub xi: f64,
    /// Comma-separated subset of `cp,alg4`.
    #[arg(long, value_delimiter = ',', default_value = "cp,alg4")]
    pub algorithm: Vec<Algorithm>,
    /// Comma-separated relaxation parameters; every algorithm runs with each.
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    pub lambda: Vec<f64>,
    #[arg(long, default_value = "uniform:0")]
    pub zeta: String,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub residual_tol: f64,
    #[arg(long, default_value_t = 10.0)]
    pub a_max: f64,
    /// Comparison table CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write every run's trace here.
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a.to_config()?),
        Command::ValidateConfig(a) => cmd_validate_config(&a.to_config()?),
        Command::Verify(a) => cmd_verify(&a),
        Command::Compare(a) => cmd_compare(&a),
    }
}

/// Worker thread cap from `DEVSPLIT_THREADS`, else the machine's parallelism.
pub fn thread_limit() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// A configuration resolved into a concrete problem.
pub enum Prepared {
    Fb { problem: FbProblem, source: Source, gamma: f64 },
    Km { problem: KmProblem, inner: FbProblem, source: Source, gamma: f64 },
    Pd(SvmProblem),
    Inertial(SvmProblem),
}

impl Prepared {
    pub fn beta(&self) -> f64 {
        match self {
            Prepared::Fb { problem, .. } => problem.beta(),
            _ => 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Prepared::Fb { problem, .. } => problem.dim(),
            Prepared::Km { problem, .. } => problem.dim(),
            Prepared::Pd(p) | Prepared::Inertial(p) => p.pd.dim(),
        }
    }

    pub fn x0(&self) -> Vec<f64> {
        match self {
            Prepared::Fb { source: Source::Toy1d, .. } | Prepared::Km { source: Source::Toy1d, .. } => vec![1.0],
            _ => vec![0.0; self.dim()],
        }
    }

    pub fn schedules(&self, c: &RunConfig) -> Schedules {
        match self {
            Prepared::Fb { gamma, .. } => Schedules::constant(c.epsilon, *gamma, c.lambda, c.zeta.clone()),
            Prepared::Km { .. } => Schedules::constant(c.epsilon, 1.0, c.lambda, c.zeta.clone()),
            Prepared::Pd(p) | Prepared::Inertial(p) => p.pd.schedules(c.epsilon, Sequence::Constant(c.lambda), c.zeta.clone()),
        }
    }
}

fn fb_problem(source: &Source) -> Result<FbProblem> {
    match source {
        Source::Toy1d => Ok(crate::synthetic::toy1d()),
        Source::Synthetic { seed, dim } => Ok(crate::synthetic::quadratic_l1(*seed, *dim)?.problem()),
        Source::Svm(_) => Err(Error::InvalidArgument("fb and km run on --toy1d or --synthetic; use pd or inertial_pd for --svm".into())),
    }
}

fn svm_problem(c: &RunConfig, path: &Path) -> Result<SvmProblem> {
    let data = svm::read_libsvm_file(path, svm::ParseOptions::default())?;
    let p = svm::build_svm_problem(&data, c.xi, c.seed)?;
    match c.gamma {
        Some(g) => svm::build_with_steps(&data, c.xi, g, g, p.op_norm),
        None => Ok(p),
    }
}

/// Builds the problem and validates the schedules over `max_iter + 1`.
pub fn prepare(c: &RunConfig) -> Result<Prepared> {
    let alg = c.algorithm()?;
    let source = c.source()?.clone();
    let prepared = match alg {
        AlgorithmKind::Fb | AlgorithmKind::Km => {
            let problem = fb_problem(&source)?;
            let beta = problem.beta();
            let gamma = c.gamma.unwrap_or(if beta > 0.0 { 1.0 / beta } else { 1.0 });
            if alg == AlgorithmKind::Fb {
                Prepared::Fb { problem, source, gamma }
            } else {
                let t = ForwardBackwardMap::new(problem.clone(), gamma)?;
                Prepared::Km { problem: KmProblem::new(problem.dim(), Arc::new(t)), inner: problem, source, gamma }
            }
        }
        AlgorithmKind::Pd | AlgorithmKind::InertialPd => {
            let Source::Svm(path) = &source else {
                return Err(Error::InvalidArgument(format!("{alg} runs on --svm data")));
            };
            let p = svm_problem(c, path)?;
            if alg == AlgorithmKind::Pd {
                Prepared::Pd(p)
            } else {
                if c.policy.is_some() {
                    return Err(Error::InvalidArgument("inertial_pd sizes its own momentum; --policy does not apply".into()));
                }
                Prepared::Inertial(p)
            }
        }
    };
    validate_schedules(&prepared.schedules(c), prepared.beta(), c.max_iter + 1)?;
    Ok(prepared)
}

fn compute_reference(p: &Prepared) -> Result<Vec<f64>> {
    match p {
        Prepared::Fb { source: Source::Toy1d, .. } | Prepared::Km { source: Source::Toy1d, .. } => Ok(vec![0.0]),
        Prepared::Fb { problem, .. } | Prepared::Km { inner: problem, .. } => {
            let beta = problem.beta();
            let gamma = if beta > 0.0 { 1.0 / beta } else { 1.0 };
            let s = Schedules::constant(1e-6, gamma, 1.0, ZetaPolicy::Zero);
            let t = solve(problem, &vec![0.0; problem.dim()], &s, &mut ZeroPolicy, &SolveOptions::new(REFERENCE_MAX_ITER, REFERENCE_TOL))?;
            if !t.converged() {
                return Err(Error::ReferenceNotConverged { residual: t.final_residual().unwrap_or(f64::INFINITY), iters: t.iterations() });
            }
            Ok(t.x)
        }
        Prepared::Pd(s) | Prepared::Inertial(s) => Ok(svm::compute_reference(s, &vec![0.0; s.pd.dim()], REFERENCE_TOL, REFERENCE_MAX_ITER)?.w),
    }
}

/// Loads the reference from `path` when it exists; otherwise computes it and
/// writes it there (if a path was given).
pub fn load_or_compute_reference(p: &Prepared, path: Option<&Path>) -> Result<Vec<f64>> {
    if let Some(path) = path.filter(|p| p.exists()) {
        let r = trace::read_reference(path)?;
        crate::vector::check_len(&r, p.dim())?;
        return Ok(r);
    }
    let r = compute_reference(p)?;
    if let Some(path) = path {
        trace::write_reference(path, &r)?;
    }
    Ok(r)
}

fn make_policy(c: &RunConfig) -> Box<dyn DeviationPolicy> {
    match c.policy.unwrap_or(PolicyKind::Zero) {
        PolicyKind::Zero => Box::new(ZeroPolicy),
        PolicyKind::Momentum => Box::new(MomentumPolicy::new(c.a_max)),
        PolicyKind::Hostile(f) => Box::new(HostilePolicy::new(f, c.seed)),
    }
}

/// Runs a prepared configuration with distances to `reference`.
pub fn execute(p: &Prepared, c: &RunConfig, reference: Vec<f64>) -> Result<Trace> {
    let s = p.schedules(c);
    let x0 = p.x0();
    let mut opts = SolveOptions::new(c.max_iter, c.residual_tol).with_reference(reference);
    let mut policy = make_policy(c);
    match p {
        Prepared::Fb { problem, .. } => {
            opts.record_delta = true;
            solve(problem, &x0, &s, policy.as_mut(), &opts)
        }
        Prepared::Km { problem, .. } => solve(problem, &x0, &s, policy.as_mut(), &opts),
        Prepared::Pd(svm) => solve(&svm.pd, &x0, &s, policy.as_mut(), &opts),
        Prepared::Inertial(svm) => {
            let io = InertialOptions {
                a_max: c.a_max,
                max_iter: c.max_iter,
                residual_tol: c.residual_tol,
                reference: opts.reference.take(),
                validate: true,
            };
            InertialSolver::new(&svm.pd, &x0, &s, io)?.run()
        }
    }
}

pub fn cmd_solve(c: &RunConfig) -> Result<u8> {
    let p = prepare(c)?;
    let reference = load_or_compute_reference(&p, c.reference.as_deref())?;
    let t = execute(&p, c, reference)?;
    match &c.out {
        Some(path) => t.write(path)?,
        None => std::io::stdout().write_all(t.to_csv().as_bytes())?,
    }
    let res = t.final_residual().map_or("n/a".into(), |r| format!("{r:.3e}"));
    let code = match t.status {
        Status::Converged => {
            eprintln!("converged after {} iterations (residual bound {res})", t.iterations());
            0
        }
        Status::MaxIter => {
            eprintln!("stopped at max_iter = {} without reaching residual_tol (residual bound {res})", c.max_iter);
            2
        }
        Status::NonFinite { iter } => {
            eprintln!("error: non-finite values at iteration {iter}; trace ends at the last finite iterate");
            1
        }
    };
    Ok(code)
}

pub fn cmd_validate_config(c: &RunConfig) -> Result<u8> {
    let p = prepare(c)?;
    let s = p.schedules(c);
    println!(
        "config ok: algorithm={} beta={} gamma={} lambda={} epsilon={} zeta={} horizon={}",
        c.algorithm()?,
        p.beta(),
        s.gamma(0),
        c.lambda,
        c.epsilon,
        c.zeta,
        c.max_iter + 1
    );
    Ok(0)
}

/// Outcome of verifying one trace.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub path: PathBuf,
    pub violations: usize,
    /// Rows where the trace and its audit sidecar disagree on `ℓ²`.
    pub inconsistent_rows: usize,
    pub max_gap: f64,
    pub summability_ok: bool,
    pub fejer_ok: bool,
    pub tail_deviation_rel: f64,
    pub q_hat: Option<f64>,
    pub r_squared: Option<f64>,
}

pub fn verify_trace(path: &Path, reference: Option<&[f64]>, rate_skip: f64) -> Result<VerifyReport> {
    let table = trace::read_trace(path, std::fs::File::open(path)?)?;
    let audit_file = trace::audit_path(path);
    let audit = trace::read_audit(&audit_file, std::fs::File::open(&audit_file)?)?;
    if let Some(r) = reference {
        let want = trace::fingerprint(r);
        if audit.reference_fingerprint.as_deref() != Some(want.as_str()) {
            return Err(Error::Schema { path: audit_file, msg: "trace was not recorded against the given reference".into() });
        }
    }
    let mut input = LyapunovInput::from_audit(&audit)?;
    let steps = input.steps();
    if table.ell_sq.len() < steps {
        return Err(Error::Schema { path: path.to_path_buf(), msg: format!("{} rows, audit has {steps}", table.ell_sq.len()) });
    }
    // the trace is authoritative for ℓ²; disagreement is itself a finding
    let mut inconsistent = 0;
    for n in 0..steps {
        let e = table.ell_sq[n].ok_or(Error::MissingTraceField("ell_sq"))?;
        if (e - input.ell_sq[n]).abs() > 1e-12 * (1.0 + e.abs()) {
            inconsistent += 1;
        }
        input.ell_sq[n] = e;
    }
    let rep = check_lyapunov(&input, LYAPUNOV_SLACK);
    let conv = audit_convergence(&input, LYAPUNOV_SLACK, 1e-6);
    let dist: Vec<f64> = table.primal_dist_rel.iter().flatten().copied().collect();
    let fit = fit_linear_rate(&dist, &RateWindow::SkipFraction(rate_skip)).ok();
    Ok(VerifyReport {
        path: path.to_path_buf(),
        violations: rep.violations.len() + inconsistent,
        inconsistent_rows: inconsistent,
        max_gap: rep.max_gap,
        summability_ok: conv.summability_ok,
        fejer_ok: conv.fejer_ok,
        tail_deviation_rel: conv.tail_deviation_rel,
        q_hat: fit.as_ref().map(|f| f.q_hat).filter(|q| q.is_finite()),
        r_squared: fit.and_then(|f| f.r_squared),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or("NA".into(), |v| format!("{v:.6e}"))
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<u8> {
    let reference = a.reference.as_deref().map(trace::read_reference).transpose()?;
    let mut any = false;
    for path in &a.traces {
        let r = verify_trace(path, reference.as_deref(), a.rate_skip)?;
        println!("{}:", r.path.display());
        println!("  lyapunov violations: {} (largest lhs - rhs: {:.3e})", r.violations, r.max_gap);
        if r.inconsistent_rows > 0 {
            println!("  rows disagreeing with the audit sidecar: {}", r.inconsistent_rows);
        }
        println!("  summability: {}  fejer monotone: {}", ok(r.summability_ok), ok(r.fejer_ok));
        println!("  tail deviation / initial distance: {:.3e}", r.tail_deviation_rel);
        println!("  rate fit: q_hat = {}  r^2 = {}", opt(r.q_hat), opt(r.r_squared));
        println!("summary path={} violations={} q_hat={} r2={}", r.path.display(), r.violations, opt(r.q_hat), opt(r.r_squared));
        any |= r.violations > 0;
    }
    Ok(if any { 3 } else { 0 })
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

pub const COMPARE_HEADER: &str = "algorithm,lambda,iters_to_1e-2,iters_to_1e-4,iters_to_1e-6,iterations,status,final_objective,objective_gap_rel";

pub fn cmd_compare(a: &CompareArgs) -> Result<u8> {
    let data = svm::read_libsvm_file(&a.svm, svm::ParseOptions::default())?;
    let prob = svm::build_svm_problem(&data, a.xi, a.seed)?;
    let cfg = ExperimentConfig {
        epsilon: a.epsilon,
        zeta: a.zeta.parse().map_err(Error::InvalidArgument)?,
        a_max: a.a_max,
        max_iter: a.max_iter,
        residual_tol: a.residual_tol,
        ref_tol: REFERENCE_TOL,
        ref_max_iter: REFERENCE_MAX_ITER,
        ..Default::default()
    };
    let runs: Vec<(Algorithm, f64)> = a.algorithm.iter().flat_map(|alg| a.lambda.iter().map(move |l| (*alg, *l))).collect();
    for (alg, l) in &runs {
        let s = prob.pd.schedules(cfg.epsilon, Sequence::Constant(*l), cfg.zeta.clone());
        validate_schedules(&s, 0.0, cfg.max_iter + 1).map_err(|e| Error::InvalidArgument(format!("{alg} with lambda = {l}: {e}")))?;
    }
    let result = svm::run_comparison(&prob, &runs, &cfg, thread_limit()?)?;
    let f_star = result.reference.objective;
    let mut table = String::from(COMPARE_HEADER);
    table.push('\n');
    for r in &result.runs {
        let its = r.iterations_to.map(|i| i.map_or(String::new(), |i| i.to_string()));
        let status = match r.trace.status {
            Status::Converged => "converged",
            Status::MaxIter => "max_iter",
            Status::NonFinite { .. } => "non_finite",
        };
        let gap = (r.final_objective - f_star).abs() / f_star.abs().max(1e-300);
        table.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.algorithm,
            r.lambda,
            its[0],
            its[1],
            its[2],
            r.trace.iterations(),
            status,
            trace::fmt(r.final_objective),
            trace::fmt(gap)
        ));
        if let Some(dir) = &a.trace_dir {
            std::fs::create_dir_all(dir)?;
            r.trace.write(&dir.join(format!("{}_lambda{}.csv", r.algorithm, r.lambda)))?;
        }
    }
    if let Some(out) = &a.out {
        std::fs::write(out, &table)?;
    }
    println!("reference: {} CP iterations, residual bound {:.3e}, objective {:.12}", result.reference.iterations, result.reference.residual, f_star);
    println!("{:<6} {:>6} {:>10} {:>10} {:>10}", "alg", "lambda", "1e-2", "1e-4", "1e-6");
    for r in &result.runs {
        let its = r.iterations_to.map(|i| i.map_or("-".into(), |i| i.to_string()));
        println!("{:<6} {:>6} {:>10} {:>10} {:>10}", r.algorithm, r.lambda, its[0], its[1], its[2]);
    }
    Ok(0)
}
