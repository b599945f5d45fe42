//! P1 finite-element operators on triangle meshes.
//!
//! Coefficients inside stiffness terms are averaged over the three vertices
//! of each element. Reaction and source terms use the lumped (row-sum) mass
//! unless the consistent mass is requested explicitly.

use std::ops::{Deref, DerefMut};

use crate::anisotropy::AnisotropyParams;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sparse::CsrMatrix;

/// Nodal coefficient vector of a P1 function.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field(values)
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        Field(vec![value; mesh.num_nodes()])
    }

    pub fn from_fn(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        Field(mesh.nodes().iter().map(|p| f(p[0], p[1])).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn check(&self, mesh: &Mesh) -> Result<()> {
        check_len(mesh, &self.0)
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field(v)
    }
}

pub(crate) fn check_len(mesh: &Mesh, w: &[f64]) -> Result<()> {
    if w.len() != mesh.num_nodes() {
        return Err(Error::SizeMismatch {
            expected: mesh.num_nodes(),
            actual: w.len(),
        });
    }
    Ok(())
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Node-to-node sparsity pattern of a mesh together with, for each element,
/// the value slots of its 3x3 block. Reused across time steps so that
/// re-assembly is a pure accumulation.
#[derive(Debug, Clone)]
pub struct Assembler {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    slots: Vec<[usize; 9]>,
}

impl Assembler {
    pub fn new(mesh: &Mesh) -> Self {
        let n = mesh.num_nodes();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for tri in mesh.triangles() {
            for &a in tri {
                adj[a].extend_from_slice(tri);
            }
        }
        for (i, row) in adj.iter_mut().enumerate() {
            row.push(i);
            row.sort_unstable();
            row.dedup();
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for row in &adj {
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let slots = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let mut s = [0usize; 9];
                for (a, &i) in tri.iter().enumerate() {
                    let cols = &col_idx[row_ptr[i]..row_ptr[i + 1]];
                    for (b, &j) in tri.iter().enumerate() {
                        s[3 * a + b] = row_ptr[i] + cols.binary_search(&j).expect("pattern covers element");
                    }
                }
                s
            })
            .collect();
        Assembler { n, row_ptr, col_idx, slots }
    }

    pub fn zero_matrix(&self) -> CsrMatrix {
        CsrMatrix::from_pattern(self.n, self.row_ptr.clone(), self.col_idx.clone())
    }

    /// Adds element blocks `block(t)[a][b]` (row `a` = test function) into `m`.
    pub fn accumulate(&self, m: &mut CsrMatrix, mut block: impl FnMut(usize) -> [[f64; 3]; 3]) {
        let vals = m.values_mut();
        for (t, s) in self.slots.iter().enumerate() {
            let blk = block(t);
            for a in 0..3 {
                for b in 0..3 {
                    vals[s[3 * a + b]] += blk[a][b];
                }
            }
        }
    }

    pub fn assemble(&self, block: impl FnMut(usize) -> [[f64; 3]; 3]) -> CsrMatrix {
        let mut m = self.zero_matrix();
        self.accumulate(&mut m, block);
        m
    }

    pub fn stiffness_scalar(&self, mesh: &Mesh, coeff: &[f64]) -> Result<CsrMatrix> {
        check_len(mesh, coeff)?;
        let tris = mesh.triangles();
        let geo = mesh.geometries();
        Ok(self.assemble(|t| {
            let [i, j, k] = tris[t];
            let kappa = (coeff[i] + coeff[j] + coeff[k]) / 3.0;
            scalar_block(geo[t].area * kappa, &geo[t].grad_basis)
        }))
    }

    pub fn stiffness_tensor(&self, mesh: &Mesh, u_prev: &[f64], aniso: &AnisotropyParams) -> Result<CsrMatrix> {
        check_len(mesh, u_prev)?;
        let geo = mesh.geometries();
        Ok(self.assemble(|t| {
            let g = &geo[t].grad_basis;
            let tensor = aniso.tensor(mesh.element_gradient(t, u_prev));
            let mut blk = [[0.0; 3]; 3];
            for b in 0..3 {
                let ag = tensor.apply(g[b]);
                for a in 0..3 {
                    blk[a][b] = geo[t].area * dot(ag, g[a]);
                }
            }
            blk
        }))
    }
}

fn scalar_block(scale: f64, g: &[[f64; 2]; 3]) -> [[f64; 3]; 3] {
    let mut blk = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            blk[a][b] = scale * dot(g[a], g[b]);
        }
    }
    blk
}

/// Consistent mass `(area / 12) [[2,1,1],[1,2,1],[1,1,2]]` per element or
/// its lumped diagonal.
pub fn assemble_mass(mesh: &Mesh, lumped: bool) -> CsrMatrix {
    if lumped {
        return CsrMatrix::from_diagonal(&lumped_mass(mesh));
    }
    let geo = mesh.geometries();
    Assembler::new(mesh).assemble(|t| {
        let d = geo[t].area / 6.0;
        let o = geo[t].area / 12.0;
        [[d, o, o], [o, d, o], [o, o, d]]
    })
}

/// Diagonal of the lumped mass matrix: one third of the adjacent element
/// areas per node.
pub fn lumped_mass(mesh: &Mesh) -> Vec<f64> {
    let mut d = vec![0.0; mesh.num_nodes()];
    for (tri, geo) in mesh.triangles().iter().zip(mesh.geometries()) {
        for &i in tri {
            d[i] += geo.area / 3.0;
        }
    }
    d
}

pub fn assemble_stiffness_scalar(mesh: &Mesh, coeff: &[f64]) -> Result<CsrMatrix> {
    Assembler::new(mesh).stiffness_scalar(mesh, coeff)
}

/// Linearised anisotropic stiffness `(A(grad u_prev) grad phi_j, grad phi_i)`.
/// Not symmetric for `delta > 0`.
pub fn assemble_stiffness_tensor(mesh: &Mesh, u_prev: &[f64], aniso: &AnisotropyParams) -> Result<CsrMatrix> {
    Assembler::new(mesh).stiffness_tensor(mesh, u_prev, aniso)
}

pub fn assemble_load(mesh: &Mesh, nodal_values: &[f64], lumped: bool) -> Result<Vec<f64>> {
    check_len(mesh, nodal_values)?;
    if lumped {
        Ok(lumped_mass(mesh)
            .iter()
            .zip(nodal_values)
            .map(|(m, f)| m * f)
            .collect())
    } else {
        Ok(assemble_mass(mesh, false).mul_vec(nodal_values))
    }
}

/// `b_i = sum_T area_T F_T . grad phi_i` for one constant vector per element.
pub fn assemble_flux_load(mesh: &Mesh, elem_vectors: &[[f64; 2]]) -> Result<Vec<f64>> {
    if elem_vectors.len() != mesh.num_triangles() {
        return Err(Error::SizeMismatch {
            expected: mesh.num_triangles(),
            actual: elem_vectors.len(),
        });
    }
    let mut b = vec![0.0; mesh.num_nodes()];
    for ((tri, geo), f) in mesh.triangles().iter().zip(mesh.geometries()).zip(elem_vectors) {
        for (a, &i) in tri.iter().enumerate() {
            b[i] += geo.area * dot(*f, geo.grad_basis[a]);
        }
    }
    Ok(b)
}

/// Symmetric elimination of Dirichlet constraints, in place: constrained
/// rows and columns are zeroed with a unit diagonal, and the right-hand side
/// absorbs the eliminated column contributions.
pub fn apply_dirichlet(a: &mut CsrMatrix, b: &mut [f64], nodes: &[usize], values: &[f64]) -> Result<()> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::SizeMismatch { expected: n, actual: b.len() });
    }
    if nodes.len() != values.len() {
        return Err(Error::SizeMismatch {
            expected: nodes.len(),
            actual: values.len(),
        });
    }
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for (&i, &v) in nodes.iter().zip(values) {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        if fixed[i].replace(v).is_some() {
            return Err(Error::DuplicateNode(i));
        }
    }
    for &i in nodes {
        if a.slot(i, i).is_none() {
            return Err(Error::ZeroDiagonal(i));
        }
    }
    let row_ptr = a.row_ptr().to_vec();
    let col_idx = a.col_idx().to_vec();
    let vals = a.values_mut();
    for i in 0..n {
        let range = row_ptr[i]..row_ptr[i + 1];
        if let Some(v) = fixed[i] {
            for k in range {
                vals[k] = if col_idx[k] == i { 1.0 } else { 0.0 };
            }
            b[i] = v;
        } else {
            for k in range {
                if let Some(vj) = fixed[col_idx[k]] {
                    b[i] -= vals[k] * vj;
                    vals[k] = 0.0;
                }
            }
        }
    }
    Ok(())
}

/// `sqrt(w^T M w)` with the consistent mass.
pub fn l2_norm(mesh: &Mesh, w: &[f64]) -> Result<f64> {
    check_len(mesh, w)?;
    Ok(l2_norm_sq(mesh, w).sqrt())
}

/// `sqrt(w^T K w)` with the unit-coefficient stiffness.
pub fn h1_seminorm(mesh: &Mesh, w: &[f64]) -> Result<f64> {
    check_len(mesh, w)?;
    Ok(h1_seminorm_sq(mesh, w).sqrt())
}

/// Elementwise `w^T M w`, exact for P1 functions.
pub(crate) fn l2_norm_sq(mesh: &Mesh, w: &[f64]) -> f64 {
    mesh.triangles()
        .iter()
        .zip(mesh.geometries())
        .map(|(&[i, j, k], geo)| {
            let (a, b, c) = (w[i], w[j], w[k]);
            geo.area / 6.0 * (a * a + b * b + c * c + a * b + b * c + a * c)
        })
        .sum()
}

pub(crate) fn h1_seminorm_sq(mesh: &Mesh, w: &[f64]) -> f64 {
    (0..mesh.num_triangles())
        .map(|t| {
            let g = mesh.element_gradient(t, w);
            mesh.geometries()[t].area * dot(g, g)
        })
        .sum()
}

/// Per-element P1 derivative `d/dx`, averaged to nodes with area weights.
pub fn nodal_x_derivative(mesh: &Mesh, w: &[f64]) -> Result<Vec<f64>> {
    check_len(mesh, w)?;
    let mut acc = vec![0.0; mesh.num_nodes()];
    let mut weight = vec![0.0; mesh.num_nodes()];
    for (t, (tri, geo)) in mesh.triangles().iter().zip(mesh.geometries()).enumerate() {
        let dx = mesh.element_gradient(t, w)[0];
        for &i in tri {
            acc[i] += geo.area * dx;
            weight[i] += geo.area;
        }
    }
    Ok(acc
        .iter()
        .zip(&weight)
        .map(|(a, w)| if *w > 0.0 { a / w } else { 0.0 })
        .collect())
}
