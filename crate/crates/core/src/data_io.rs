//! LIBSVM ingestion, CSV traces and plain vector files.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::solvers::SolverTrace;

/// One labeled example with 1-based, strictly increasing feature indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSparseRow {
    /// `+1` or `−1`.
    pub label: i8,
    pub features: Vec<(usize, f64)>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parse LIBSVM text: `label index:value ...` per line.
///
/// Labels that parse to a positive number become `+1`, everything else `−1`.
/// Zero-valued features are dropped; blank lines and `#` comments are skipped.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<Vec<LabeledSparseRow>> {
    let mut rows = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label_val: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad label {label_tok:?}")))?;
        if label_val.is_nan() {
            return Err(parse_err(line_no, "label is NaN"));
        }
        let label = if label_val > 0.0 { 1 } else { -1 };

        let mut features = Vec::new();
        let mut last: usize = 0;
        for tok in tokens {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(line_no, format!("missing colon in {tok:?}")))?;
            let idx: usize = idx_s
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad feature index {idx_s:?}")))?;
            if idx == 0 {
                return Err(parse_err(line_no, "feature indices start at 1"));
            }
            let val: f64 = val_s
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad feature value {val_s:?}")))?;
            if !val.is_finite() {
                return Err(parse_err(
                    line_no,
                    format!("non-finite feature value {val_s:?}"),
                ));
            }
            if idx <= last {
                return Err(parse_err(line_no, "non-increasing index"));
            }
            last = idx;
            if val != 0.0 {
                features.push((idx, val));
            }
        }
        rows.push(LabeledSparseRow { label, features });
    }
    Ok(rows)
}

/// Shortest representation that parses back to the same `f64`.
///
/// Plain decimal for moderate magnitudes, scientific notation otherwise.
pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Header `iteration,sfo_calls,epoch,<metrics>` then one row per checkpoint.
pub fn write_trace_csv<W: Write>(trace: &SolverTrace, sink: &mut W) -> Result<()> {
    write_trace_csv_with_meta(trace, &[], sink)
}

/// Like [`write_trace_csv`], preceded by `# key=value` comment lines.
pub fn write_trace_csv_with_meta<W: Write>(
    trace: &SolverTrace,
    meta: &[(String, String)],
    sink: &mut W,
) -> Result<()> {
    let mut out = String::new();
    for (k, v) in meta {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str("iteration,sfo_calls,epoch");
    for m in &trace.metric_names {
        out.push(',');
        out.push_str(m);
    }
    out.push('\n');
    let n = trace.n.max(1) as f64;
    for c in &trace.checkpoints {
        out.push_str(&format!(
            "{},{},{}",
            c.iteration,
            c.sfo_calls,
            format_real(c.sfo_calls as f64 / n)
        ));
        for v in &c.metrics {
            out.push(',');
            out.push_str(&format_real(*v));
        }
        out.push('\n');
    }
    sink.write_all(out.as_bytes())?;
    sink.flush()?;
    Ok(())
}

/// A CSV trace read back from text.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub meta: Vec<(String, String)>,
}

impl TraceTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Parse the output of [`write_trace_csv_with_meta`].
pub fn read_trace_csv<R: BufRead>(reader: R) -> Result<TraceTable> {
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    let mut meta = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((key, v)) = rest.trim().split_once('=') {
                meta.push((key.to_string(), v.to_string()));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(str::to_string).collect()),
            Some(cols) => {
                let row: Vec<f64> = line
                    .split(',')
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| parse_err(line_no, format!("bad number {t:?}")))
                    })
                    .collect::<Result<_>>()?;
                if row.len() != cols.len() {
                    return Err(parse_err(
                        line_no,
                        format!("expected {} fields, got {}", cols.len(), row.len()),
                    ));
                }
                rows.push(row);
            }
        }
    }
    let columns = columns.ok_or_else(|| parse_err(0, "missing header"))?;
    Ok(TraceTable {
        columns,
        rows,
        meta,
    })
}

/// One value per line after `# key=value` header comments.
pub fn write_vector_file<W: Write>(
    values: &[f64],
    header: &[(String, String)],
    sink: &mut W,
) -> Result<()> {
    let mut out = String::new();
    for (k, v) in header {
        out.push_str(&format!("# {k}={v}\n"));
    }
    for v in values {
        out.push_str(&format_real(*v));
        out.push('\n');
    }
    sink.write_all(out.as_bytes())?;
    sink.flush()?;
    Ok(())
}

pub fn read_vector_file<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(
            t.parse()
                .map_err(|_| parse_err(k + 1, format!("bad number {t:?}")))?,
        );
    }
    Ok(out)
}
