//! LIBSVM text format: `<label> <idx>:<val> ...`, 1-based indices.

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::operators::DenseMatrix;

/// Labeled samples with a dense feature matrix (`N × d`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DenseMatrix,
    /// Each entry is `−1.0` or `+1.0`.
    pub labels: Vec<f64>,
}

impl Dataset {
    pub fn samples(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Reject labels other than `−1`, `0`, `1`, `+1`.
    pub strict: bool,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Reads a dataset. Blank lines and lines starting with `#` are skipped; a
/// trailing `# ...` comment on a data line is ignored. Nonpositive labels
/// map to `−1`, positive ones to `+1`.
pub fn parse_libsvm(reader: impl BufRead, opts: ParseOptions) -> Result<Dataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut dim = 0;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok.parse().map_err(|_| parse_err(lineno, format!("label `{label_tok}` is not a number")))?;
        if !label.is_finite() {
            return Err(parse_err(lineno, format!("label `{label_tok}` is not finite")));
        }
        if opts.strict && ![-1.0, 0.0, 1.0].contains(&label) {
            return Err(parse_err(lineno, format!("label `{label_tok}` not in {{-1, 0, 1}} (strict mode)")));
        }
        let mut row = Vec::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| parse_err(lineno, format!("`{tok}` is not of the form index:value")))?;
            let idx: usize = idx.parse().map_err(|_| parse_err(lineno, format!("index `{idx}` is not a nonnegative integer")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "feature indices are 1-based; found 0"));
            }
            let val: f64 = val.parse().map_err(|_| parse_err(lineno, format!("value `{val}` is not a real number")))?;
            if !val.is_finite() {
                return Err(parse_err(lineno, format!("value `{val}` is not finite")));
            }
            dim = dim.max(idx);
            row.push((idx - 1, val));
        }
        rows.push(row);
        labels.push(if label > 0.0 { 1.0 } else { -1.0 });
    }
    let mut features = DenseMatrix::zeros(rows.len(), dim);
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            features.set(i, j, v);
        }
    }
    Ok(Dataset { features, labels })
}

pub fn read_libsvm_file(path: &std::path::Path, opts: ParseOptions) -> Result<Dataset> {
    let f = std::fs::File::open(path)?;
    parse_libsvm(std::io::BufReader::new(f), opts)
}
