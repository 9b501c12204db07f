// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;

use crate::energy::TimeSeries;
use crate::error::{Error, Result};

/// Options for [`ingest_csv`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub has_header: bool,
    pub delimiter: u8,
    /// Columns to keep: 1-based positions or header names. `None` keeps all.
    pub columns: Option<Vec<String>>,
    /// Replace missing or non-finite cells by the mean of the nearest valid
    /// values above and below in the same column.
    pub impute: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: false,
            delimiter: b',',
            columns: None,
            impute: false,
        }
    }
}

const MISSING: &[&str] = &["", "na", "nan", "null", "-nan"];

fn resolve_columns(
    path: &Path,
    selectors: &[String],
    header: Option<&csv::StringRecord>,
    width: usize,
) -> Result<Vec<usize>> {
    selectors
        .iter()
        .map(|sel| {
            let sel = sel.trim();
            if let Ok(pos) = sel.parse::<usize>() {
                if pos == 0 || pos > width {
                    return Err(Error::invalid(format!(
                        "{}: column {pos} out of range 1..={width}",
                        path.display()
                    )));
                }
                return Ok(pos - 1);
            }
            header
                .and_then(|h| h.iter().position(|name| name.trim() == sel))
                .ok_or_else(|| Error::invalid(format!("{}: no column named {sel:?}", path.display())))
        })
        .collect()
}

/// Reads a CSV file into a time series, one row per observation.
pub fn ingest_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<TimeSeries> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .delimiter(opts.delimiter)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = if opts.has_header {
        Some(reader.headers().map_err(|e| csv_error(path, e))?.clone())
    } else {
        None
    };

    let mut selected: Option<Vec<usize>> = None;
    // cells[t][c]; None marks a missing value
    let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
    let mut lines: Vec<u64> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let cols = match &selected {
            Some(c) => c,
            None => {
                let c = match &opts.columns {
                    Some(sel) => resolve_columns(path, sel, header.as_ref(), rec.len())?,
                    None => (0..rec.len()).collect(),
                };
                selected.insert(c)
            }
        };
        let mut row = Vec::with_capacity(cols.len());
        for &c in cols.iter() {
            let raw = rec.get(c).unwrap_or("");
            let value = if MISSING.contains(&raw.to_ascii_lowercase().as_str()) {
                None
            } else {
                let v: f64 = raw.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    column: c + 1,
                    message: format!("not a number: {raw:?}"),
                })?;
                v.is_finite().then_some(v)
            };
            if value.is_none() && !opts.impute {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    column: c + 1,
                    message: format!("missing or non-finite value {raw:?}"),
                });
            }
            row.push(value);
        }
        cells.push(row);
        lines.push(line);
    }

    let Some(cols) = selected else {
        return Err(Error::EmptyInput(path.to_path_buf()));
    };
    if cols.is_empty() {
        return Err(Error::EmptyInput(path.to_path_buf()));
    }
    if opts.impute {
        impute_columns(path, &mut cells, &cols)?;
    }
    let (len, dim) = (cells.len(), cols.len());
    let data = cells.into_iter().flatten().map(|v| v.expect("imputed")).collect();
    TimeSeries::new(data, len, dim)
}

/// Fills each gap with the mean of the nearest valid neighbours above and
/// below (or the single available one at either end of the column).
fn impute_columns(path: &Path, cells: &mut [Vec<Option<f64>>], cols: &[usize]) -> Result<()> {
    let len = cells.len();
    for c in 0..cols.len() {
        let mut prev: Option<f64> = None;
        let mut t = 0;
        while t < len {
            if let Some(v) = cells[t][c] {
                prev = Some(v);
                t += 1;
                continue;
            }
            let gap_end = (t..len).find(|&u| cells[u][c].is_some()).unwrap_or(len);
            let next = cells.get(gap_end).and_then(|r| r[c]);
            let fill = match (prev, next) {
                (Some(a), Some(b)) => (a + b) / 2.0,
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => {
                    return Err(Error::invalid(format!(
                        "{}: column {} has no valid values to impute from",
                        path.display(),
                        cols[c] + 1
                    )))
                }
            };
            for row in &mut cells[t..gap_end] {
                row[c] = Some(fill);
            }
            t = gap_end;
        }
    }
    Ok(())
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let (line, column) = match e.position() {
        Some(p) => (p.line(), 0),
        None => (0, 0),
    };
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message: format!("{kind:?}"),
        },
    }
}
