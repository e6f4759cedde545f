//! Dataset CSV reading and writing.
//!
//! Header `x0,...,x{p-1},a,t_tilde,delta_s,delta_g`; one observation per
//! line. Row numbers in errors count data lines from 1.

use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{validate_dataset, Dataset, Observation};

const TAIL: [&str; 4] = ["a", "t_tilde", "delta_s", "delta_g"];

fn csv_err(path: &Path, row: usize, reason: impl Into<String>) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        row,
        reason: reason.into(),
    }
}

fn parse_flag(path: &Path, row: usize, name: &str, v: &str) -> Result<u8> {
    match v.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(csv_err(path, row, format!("`{name}` must be 0 or 1, got `{other}`"))),
    }
}

/// Reads and validates a dataset. Without `t_max` the grid ends at the
/// largest observed time.
pub fn load_csv_dataset(path: &Path, t_max: Option<usize>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .quoting(false)
        .from_path(path)
        .map_err(|e| csv_err(path, 0, e.to_string()))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_err(path, 0, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    for name in TAIL {
        if !header.iter().any(|h| h == name) {
            return Err(csv_err(path, 0, format!("missing column `{name}`")));
        }
    }
    let p = header.len().saturating_sub(TAIL.len());
    let expected: Vec<String> = (0..p).map(|j| format!("x{j}")).chain(TAIL.iter().map(|s| s.to_string())).collect();
    if header != expected {
        let missing = expected.iter().find(|e| !header.contains(e));
        let reason = match missing {
            Some(m) => format!("missing column `{m}`"),
            None => format!("header must be `{}`", expected.join(",")),
        };
        return Err(csv_err(path, 0, reason));
    }
    if p == 0 {
        return Err(csv_err(path, 0, "no covariate columns"));
    }

    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 1;
        let rec = rec.map_err(|e| csv_err(path, row, e.to_string()))?;
        if rec.len() != p + 4 {
            return Err(csv_err(path, row, format!("expected {} fields, got {}", p + 4, rec.len())));
        }
        let x = (0..p)
            .map(|j| {
                rec[j]
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| csv_err(path, row, format!("`x{j}` is not a finite number: `{}`", &rec[j])))
            })
            .collect::<Result<Vec<_>>>()?;
        let a = parse_flag(path, row, "a", &rec[p])?;
        let t_tilde = rec[p + 1]
            .trim()
            .parse::<usize>()
            .map_err(|_| csv_err(path, row, format!("`t_tilde` must be a non-negative integer, got `{}`", &rec[p + 1])))?;
        let ds = parse_flag(path, row, "delta_s", &rec[p + 2])?;
        let dg = parse_flag(path, row, "delta_g", &rec[p + 3])?;
        rows.push(Observation::new(x, a, t_tilde, ds, dg));
    }
    if rows.is_empty() {
        return Err(Error::InvalidDataset("empty dataset".into()));
    }
    let t_max = t_max.unwrap_or_else(|| rows.iter().map(|r| r.t_tilde).max().unwrap_or(0));
    let d = Dataset::new_unchecked(rows, t_max, p);
    let bad = validate_dataset(&d);
    if !bad.is_empty() {
        let msg = bad
            .iter()
            .take(20)
            .map(|v| format!("row {}: {}", v.row + 1, v.kind))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::InvalidDataset(msg));
    }
    Ok(d)
}

pub fn write_csv_dataset(d: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Never)
        .from_path(path)
        .map_err(|e| csv_err(path, 0, e.to_string()))?;
    let mut header: Vec<String> = (0..d.p()).map(|j| format!("x{j}")).collect();
    header.extend(TAIL.iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(|e| csv_err(path, 0, e.to_string()))?;
    for (i, r) in d.rows().iter().enumerate() {
        let mut rec: Vec<String> = r.x.iter().map(|v| v.to_string()).collect();
        rec.extend([r.a.to_string(), r.t_tilde.to_string(), r.delta_s.to_string(), r.delta_g.to_string()]);
        w.write_record(&rec).map_err(|e| csv_err(path, i + 1, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
