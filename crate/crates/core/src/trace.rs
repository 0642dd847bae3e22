//! Iteration traces and their CSV form.
//!
//! A run writes two files: the main trace with the fixed header
//! `iter,primal_dist_rel,dual_dist_rel,scaling_a,residual_bound,ell_sq`, and an
//! audit sidecar `<out>.audit.csv` holding what the Lyapunov checks need.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "iter,primal_dist_rel,dual_dist_rel,scaling_a,residual_bound,ell_sq";
pub const AUDIT_HEADER: &str = "iter,gamma,lambda,zeta,ell_sq,weight_u,weight_v,u_norm_m_sq,v_norm_m_sq,budget_rhs,dist_sq_m";

/// Per-iteration record for step `n`. Deviation fields describe `(u_n, v_n)`,
/// the vectors used in this step; `budget_rhs` is the bound they were held
/// to, `ζ_{n−1} ℓ_{n−1}²` (0 at `n = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub n: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub zeta: f64,
    pub ell_sq: f64,
    pub residual_bound: f64,
    pub weight_u: f64,
    pub weight_v: f64,
    pub u_norm_m_sq: f64,
    pub v_norm_m_sq: f64,
    pub budget_rhs: f64,
    /// Factor the safeguard applied to the proposal of `(u_n, v_n)`.
    pub rescale: f64,
    pub scaling_a: Option<f64>,
    /// Directly computed `‖Δ_n‖` (identity metric only, on request).
    pub delta_norm: Option<f64>,
}

impl IterRecord {
    /// `weight_u ‖u_n‖²_M + weight_v ‖v_n‖²_M`
    pub fn dev_weighted_sq(&self) -> f64 {
        self.weight_u * self.u_norm_m_sq + self.weight_v * self.v_norm_m_sq
    }
}

/// Distances to a reference point for `x_0, …, x_K` (one more than records).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Distances {
    pub m_sq: Vec<f64>,
    /// Euclidean distance of the primal block (the whole vector when there
    /// is no primal/dual split).
    pub primal: Vec<f64>,
    pub dual: Option<Vec<f64>>,
}

impl Distances {
    pub fn primal_rel(&self) -> Vec<f64> {
        relative(&self.primal)
    }

    pub fn dual_rel(&self) -> Option<Vec<f64>> {
        self.dual.as_deref().map(relative)
    }
}

fn relative(d: &[f64]) -> Vec<f64> {
    let d0 = d.first().copied().unwrap_or(f64::NAN);
    d.iter().map(|v| v / d0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIter,
    /// Non-finite data appeared in step `iter`; the trace stops at the last
    /// good state.
    NonFinite { iter: usize },
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<IterRecord>,
    pub distances: Option<Distances>,
    /// `x_0, …, x_K` when requested.
    pub iterates: Option<Vec<Vec<f64>>>,
    /// Last iterate.
    pub x: Vec<f64>,
    pub status: Status,
    pub primal_dim: Option<usize>,
    pub reference_fingerprint: Option<String>,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.records.last().map(|r| r.residual_bound)
    }

    /// First iteration whose relative primal distance is at most `tol`.
    pub fn iterations_to(&self, tol: f64) -> Option<usize> {
        let d = self.distances.as_ref()?;
        d.primal_rel().iter().position(|r| *r <= tol)
    }

    /// Main CSV body, header included.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.records.len() + 2));
        s.push_str(TRACE_HEADER);
        s.push('\n');
        let primal = self.distances.as_ref().map(Distances::primal_rel);
        let dual = self.distances.as_ref().and_then(Distances::dual_rel);
        let rows = self.records.len() + usize::from(self.distances.is_some());
        for i in 0..rows {
            let rec = self.records.get(i);
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                i,
                fmt_opt(primal.as_ref().and_then(|p| p.get(i).copied())),
                fmt_opt(dual.as_ref().and_then(|p| p.get(i).copied())),
                fmt_opt(rec.and_then(|r| r.scaling_a)),
                fmt_opt(rec.map(|r| r.residual_bound)),
                fmt_opt(rec.map(|r| r.ell_sq)),
            );
        }
        s
    }

    /// Audit sidecar body.
    pub fn to_audit_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# reference_sha256={}", self.reference_fingerprint.as_deref().unwrap_or("none"));
        s.push_str(AUDIT_HEADER);
        s.push('\n');
        let dist = self.distances.as_ref().map(|d| &d.m_sq);
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.n,
                fmt(r.gamma),
                fmt(r.lambda),
                fmt(r.zeta),
                fmt(r.ell_sq),
                fmt(r.weight_u),
                fmt(r.weight_v),
                fmt(r.u_norm_m_sq),
                fmt(r.v_norm_m_sq),
                fmt(r.budget_rhs),
                fmt_opt(dist.and_then(|d| d.get(r.n).copied())),
            );
        }
        if let Some(d) = dist.and_then(|d| d.get(self.records.len())) {
            let _ = writeln!(s, "{},,,,,,,,,,{}", self.records.len(), fmt(*d));
        }
        s
    }

    /// Writes `path` and `<path>.audit.csv`.
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        std::fs::write(audit_path(path), self.to_audit_csv())?;
        Ok(())
    }
}

pub fn audit_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".audit.csv");
    PathBuf::from(s)
}

/// Shortest round-trip representation in exponent form; never
/// locale-dependent.
pub fn fmt(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => fmt(v),
        _ => String::new(),
    }
}

/// SHA-256 of the little-endian bytes of `x`.
pub fn fingerprint(x: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in x {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Reference point file: one value per line, `#` comments allowed.
pub fn write_reference(path: &Path, x: &[f64]) -> Result<()> {
    let mut s = String::new();
    for v in x {
        s.push_str(&fmt(*v));
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_reference(path: &Path) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(t.parse().map_err(|e| Error::Parse { line: i + 1, msg: format!("bad reference value `{t}`: {e}") })?);
    }
    Ok(out)
}

/// Columns of a parsed main trace. Empty cells are `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceTable {
    pub iter: Vec<usize>,
    pub primal_dist_rel: Vec<Option<f64>>,
    pub dual_dist_rel: Vec<Option<f64>>,
    pub scaling_a: Vec<Option<f64>>,
    pub residual_bound: Vec<Option<f64>>,
    pub ell_sq: Vec<Option<f64>>,
}

/// Parsed audit sidecar: one row per step plus the final distance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditTable {
    pub reference_fingerprint: Option<String>,
    pub zeta: Vec<f64>,
    pub ell_sq: Vec<f64>,
    pub dev_weighted_sq: Vec<f64>,
    pub u_norm_m_sq: Vec<f64>,
    pub v_norm_m_sq: Vec<f64>,
    pub budget_rhs: Vec<f64>,
    pub dist_sq_m: Vec<Option<f64>>,
}

fn schema(path: &Path, msg: impl Into<String>) -> Error {
    Error::Schema { path: path.to_owned(), msg: msg.into() }
}

fn cell(path: &Path, line: usize, s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| schema(path, format!("line {line}: `{s}` is not a number")))
}

fn req(path: &Path, line: usize, s: &str) -> Result<f64> {
    cell(path, line, s)?.ok_or_else(|| schema(path, format!("line {line}: missing value")))
}

pub fn read_trace(path: &Path, reader: impl Read) -> Result<TraceTable> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header != TRACE_HEADER {
        return Err(schema(path, format!("expected header `{TRACE_HEADER}`, found `{header}`")));
    }
    let mut t = TraceTable::default();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(schema(path, format!("line {lineno}: expected 6 fields, found {}", f.len())));
        }
        t.iter.push(f[0].parse().map_err(|_| schema(path, format!("line {lineno}: bad iteration `{}`", f[0])))?);
        t.primal_dist_rel.push(cell(path, lineno, f[1])?);
        t.dual_dist_rel.push(cell(path, lineno, f[2])?);
        t.scaling_a.push(cell(path, lineno, f[3])?);
        t.residual_bound.push(cell(path, lineno, f[4])?);
        t.ell_sq.push(cell(path, lineno, f[5])?);
    }
    Ok(t)
}

pub fn read_audit(path: &Path, reader: impl Read) -> Result<AuditTable> {
    let mut lines = BufReader::new(reader).lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    let fp = first
        .strip_prefix("# reference_sha256=")
        .ok_or_else(|| schema(path, "missing `# reference_sha256=` line"))?;
    let mut a = AuditTable { reference_fingerprint: (fp != "none").then(|| fp.to_owned()), ..Default::default() };
    let header = lines.next().transpose()?.unwrap_or_default();
    if header != AUDIT_HEADER {
        return Err(schema(path, format!("expected header `{AUDIT_HEADER}`, found `{header}`")));
    }
    let mut rows: Vec<Vec<String>> = Vec::new();
    for line in lines {
        rows.push(line?.split(',').map(str::to_owned).collect());
    }
    for (i, f) in rows.iter().enumerate() {
        let lineno = i + 3;
        if f.len() != 11 {
            return Err(schema(path, format!("line {lineno}: expected 11 fields, found {}", f.len())));
        }
        let last = i + 1 == rows.len() && f[1].is_empty();
        if !last {
            a.zeta.push(req(path, lineno, &f[3])?);
            a.ell_sq.push(req(path, lineno, &f[4])?);
            let (wu, wv) = (req(path, lineno, &f[5])?, req(path, lineno, &f[6])?);
            let (us, vs) = (req(path, lineno, &f[7])?, req(path, lineno, &f[8])?);
            a.u_norm_m_sq.push(us);
            a.v_norm_m_sq.push(vs);
            a.dev_weighted_sq.push(wu * us + wv * vs);
            a.budget_rhs.push(req(path, lineno, &f[9])?);
        }
        a.dist_sq_m.push(cell(path, lineno, &f[10])?);
    }
    Ok(a)
}
