//! Diagnostic time series as CSV with a fixed column order.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::DiagRecord;
use crate::error::{Error, Result};

pub fn header() -> String {
    DiagRecord::COLUMNS.join(",")
}

/// One row per record; floats are written with 17 significant digits.
pub fn csv_string(records: &[DiagRecord]) -> String {
    let mut s = header();
    s.push('\n');
    for r in records {
        let f = |v: f64| format!("{v:.16e}");
        let row = [
            f(r.t),
            r.k.to_string(),
            f(r.energy),
            f(r.l2_u),
            f(r.h1_u),
            f(r.l2_c),
            f(r.h1_c),
            f(r.h1_phi),
            f(r.min_u),
            f(r.max_u),
            f(r.min_c),
            f(r.max_c),
            f(r.dtu_l2),
            f(r.dtc_l2),
            f(r.tau_bound),
            r.phase_iterations.to_string(),
            r.poisson_iterations.to_string(),
            r.concentration_iterations.to_string(),
        ];
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

pub fn write_csv(path: &Path, records: &[DiagRecord]) -> Result<()> {
    std::fs::write(path, csv_string(records)).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<DiagRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == header() => {}
        _ => return Err(Error::invalid("CSV header does not match the diagnostic columns")),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != DiagRecord::COLUMNS.len() {
            return Err(Error::invalid(format!("CSV row {} has {} columns", i + 2, cols.len())));
        }
        let bad = |j: usize| Error::invalid(format!("CSV row {} column {}: `{}`", i + 2, DiagRecord::COLUMNS[j], cols[j]));
        let f = |j: usize| cols[j].parse::<f64>().map_err(|_| bad(j));
        let n = |j: usize| cols[j].parse::<usize>().map_err(|_| bad(j));
        out.push(DiagRecord {
            t: f(0)?,
            k: n(1)?,
            energy: f(2)?,
            l2_u: f(3)?,
            h1_u: f(4)?,
            l2_c: f(5)?,
            h1_c: f(6)?,
            h1_phi: f(7)?,
            min_u: f(8)?,
            max_u: f(9)?,
            min_c: f(10)?,
            max_c: f(11)?,
            dtu_l2: f(12)?,
            dtc_l2: f(13)?,
            tau_bound: f(14)?,
            phase_iterations: n(15)?,
            poisson_iterations: n(16)?,
            concentration_iterations: n(17)?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<DiagRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}
