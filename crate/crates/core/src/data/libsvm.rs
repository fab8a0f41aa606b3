use std::fmt::Write as _;
use std::io::BufRead;

use super::SparseDataset;
use crate::error::{Error, Result};

fn parse_label(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "+1" | "1" | "1.0" | "+1.0" => Ok(1.0),
        "-1" | "0" | "2" | "-1.0" | "0.0" | "2.0" => Ok(-1.0),
        other => Err(Error::Parse { line, msg: format!("unsupported label {other:?}") }),
    }
}

/// Parses LIBSVM text with `n` inferred from the largest index present.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<SparseDataset> {
    parse_libsvm_with_dim(reader, None)
}

/// Parses LIBSVM text. Labels `{+1, 1}` map to `+1` and `{-1, 0, 2}` to `-1`;
/// indices are 1-based in the file and 0-based in the result.
pub fn parse_libsvm_with_dim<R: BufRead>(reader: R, n: Option<usize>) -> Result<SparseDataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let label = parse_label(tokens.next().unwrap_or(""), lineno)?;
        let mut row: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| Error::Parse { line: lineno, msg: format!("malformed token {tok:?}") })?;
            let i: usize = i
                .parse()
                .map_err(|_| Error::Parse { line: lineno, msg: format!("bad index in {tok:?}") })?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Parse { line: lineno, msg: format!("bad value in {tok:?}") })?;
            if i == 0 {
                return Err(Error::Parse { line: lineno, msg: "index 0 in 1-based input".into() });
            }
            if !v.is_finite() {
                return Err(Error::Parse { line: lineno, msg: format!("non-finite value in {tok:?}") });
            }
            row.push((i - 1, v));
            max_index = max_index.max(i);
        }
        row.sort_by_key(|&(i, _)| i);
        if row.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Parse { line: lineno, msg: "duplicate feature index".into() });
        }
        rows.push(row);
        labels.push(label);
    }
    let dim = match n {
        Some(n) if n < max_index => {
            return Err(Error::Config(format!("dimension override {n} below max index {max_index}")))
        }
        Some(n) => n,
        None => max_index,
    };
    SparseDataset::from_rows(dim, rows, labels)
}

/// Serializes in LIBSVM text with shortest round-trip float formatting.
pub fn write_libsvm(ds: &SparseDataset) -> String {
    let mut out = String::new();
    for i in 0..ds.n_samples() {
        out.push_str(if ds.labels()[i] > 0.0 { "+1" } else { "-1" });
        let (idx, val) = ds.row(i);
        for (&j, &v) in idx.iter().zip(val) {
            let _ = write!(out, " {}:{:?}", j + 1, v);
        }
        out.push('\n');
    }
    out
}
