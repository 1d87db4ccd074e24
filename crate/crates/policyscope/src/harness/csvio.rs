//! One CSV schema across all optimizers:
//! `iteration, x_1..x_d, y, best_so_far, w_exploitation, w_informativeness,
//! w_diversity, w_representativeness, parse_outcome, wall_time_ms`.
//! Weight and parse columns are empty for baselines and initial samples.
//! Floats are written in Rust's shortest round-trip form so rows re-parse
//! exactly and deterministic runs diff byte-for-byte.

use std::path::Path;

use crate::core::{Criterion, RunRecord};
use crate::{Error, Result};

pub(crate) fn write_records_csv(path: &Path, records: &[RunRecord], dim: usize) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header: Vec<String> = vec!["iteration".into()];
    header.extend((1..=dim).map(|j| format!("x_{j}")));
    header.extend(["y", "best_so_far"].map(String::from));
    header.extend(Criterion::ALL.iter().map(|c| format!("w_{}", c.name())));
    header.extend(["parse_outcome", "wall_time_ms"].map(String::from));
    writer.write_record(&header).map_err(|e| csv_err(path, e))?;

    for r in records {
        let mut row: Vec<String> = vec![r.iteration.to_string()];
        row.extend(r.point.iter().map(|v| v.to_string()));
        row.push(r.value.to_string());
        row.push(r.best_so_far.to_string());
        match &r.weights {
            Some(w) => row.extend(Criterion::ALL.iter().map(|&c| w.weight(c).to_string())),
            None => row.extend(std::iter::repeat_n(String::new(), 4)),
        }
        row.push(r.parse_outcome.map(|o| o.to_string()).unwrap_or_default());
        row.push(r.wall_time_ms.to_string());
        writer.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub iteration: usize,
    pub point: Vec<f64>,
    pub value: f64,
    pub best_so_far: f64,
    /// Weights in canonical criterion order, when the row carries a policy.
    pub weights: Option<[f64; 4]>,
    pub parse_outcome: Option<String>,
    pub wall_time_ms: u64,
}

/// Read a run CSV produced by this harness.
pub fn read_records_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let dim = headers.iter().filter(|h| h.starts_with("x_")).count();
    if dim == 0 {
        return Err(Error::file_format(path, "no x_<i> columns in header"));
    }
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::file_format(path, format!("missing column `{name}`")))
    };
    let c_iter = col("iteration")?;
    let c_y = col("y")?;
    let c_best = col("best_so_far")?;
    let c_w: Vec<usize> = Criterion::ALL
        .iter()
        .map(|c| col(&format!("w_{}", c.name())))
        .collect::<Result<_>>()?;
    let c_outcome = col("parse_outcome")?;
    let c_wall = col("wall_time_ms")?;
    let x_cols: Vec<usize> = (1..=dim)
        .map(|j| col(&format!("x_{j}")))
        .collect::<Result<_>>()?;

    let parse_f64 = |field: &str, what: &str| -> Result<f64> {
        field
            .parse()
            .map_err(|_| Error::file_format(path, format!("bad {what} value `{field}`")))
    };

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let weights_raw: Vec<&str> = c_w.iter().map(|&i| field(i)).collect();
        let weights = if weights_raw.iter().all(|w| w.is_empty()) {
            None
        } else {
            let mut arr = [0.0; 4];
            for (slot, raw) in arr.iter_mut().zip(&weights_raw) {
                *slot = parse_f64(raw, "weight")?;
            }
            Some(arr)
        };
        rows.push(CsvRow {
            iteration: field(c_iter)
                .parse()
                .map_err(|_| Error::file_format(path, "bad iteration value"))?,
            point: x_cols
                .iter()
                .map(|&i| parse_f64(field(i), "coordinate"))
                .collect::<Result<_>>()?,
            value: parse_f64(field(c_y), "objective")?,
            best_so_far: parse_f64(field(c_best), "best_so_far")?,
            weights,
            parse_outcome: match field(c_outcome) {
                "" => None,
                s => Some(s.to_string()),
            },
            wall_time_ms: field(c_wall)
                .parse()
                .map_err(|_| Error::file_format(path, "bad wall_time_ms value"))?,
        });
    }
    Ok(rows)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::file_format(path, e.to_string())
}
