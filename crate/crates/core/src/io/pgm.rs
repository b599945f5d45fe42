//! Grayscale snapshots as plain (P2) PGM images.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem;
use crate::mesh::Mesh;

/// One pixel per node, top row at `y = L2`. Values are mapped linearly from
/// `[lo, hi]` onto `0..=255` and clamped.
pub fn pgm_string(mesh: &Mesh, field: &[f64], range: (f64, f64)) -> Result<String> {
    if !mesh.is_structured() {
        return Err(Error::invalid("PGM output needs a structured mesh"));
    }
    fem::check_len(mesh, field)?;
    let (lo, hi) = range;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(format!("PGM range ({lo}, {hi}) is empty")));
    }
    let (w, h) = (mesh.nx() + 1, mesh.ny() + 1);
    let mut s = format!("P2\n{w} {h}\n255\n");
    for j in (0..h).rev() {
        let row: Vec<String> = (0..w)
            .map(|i| {
                let v = field[j * w + i];
                let level = ((v - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0);
                (level as u8).to_string()
            })
            .collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    Ok(s)
}

pub fn write_pgm(path: &Path, mesh: &Mesh, field: &[f64], range: (f64, f64)) -> Result<()> {
    let text = pgm_string(mesh, field, range)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
