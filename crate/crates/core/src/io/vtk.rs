//! Legacy ASCII VTK output (`DATASET UNSTRUCTURED_GRID`).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem;
use crate::mesh::Mesh;

/// VTK cell type of a linear triangle.
pub const VTK_TRIANGLE: u8 = 5;

/// Renders nodal fields as a legacy VTK document. Output depends only on the
/// inputs, so identical states give identical bytes.
pub fn vtk_string(mesh: &Mesh, title: &str, fields: &[(&str, &[f64])]) -> Result<String> {
    for (_, values) in fields {
        fem::check_len(mesh, values)?;
    }
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "{title}");
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.num_nodes());
    for p in mesh.nodes() {
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    let nt = mesh.num_triangles();
    let _ = writeln!(s, "CELLS {} {}", nt, 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        let _ = writeln!(s, "{VTK_TRIANGLE}");
    }
    if !fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", mesh.num_nodes());
    }
    for (name, values) in fields {
        let _ = writeln!(s, "SCALARS {name} double 1");
        s.push_str("LOOKUP_TABLE default\n");
        for v in values.iter() {
            let _ = writeln!(s, "{v}");
        }
    }
    Ok(s)
}

/// Writes `u`, `c` and the full potential `phi` as point data.
pub fn write_vtk(path: &Path, mesh: &Mesh, t: f64, u: &[f64], c: &[f64], phi: &[f64]) -> Result<()> {
    let text = vtk_string(mesh, &format!("nppac t={t}"), &[("u", u), ("c", c), ("phi", phi)])?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
