//! Structured triangulations of the rectangular cell `[0, L1] x [0, L2]`.
//!
//! The anode sits on the left edge (`x = 0`, tagged [`NodeTag::Gamma1`]), the
//! counter electrode on the right edge (`x = L1`, [`NodeTag::Gamma2`]). The
//! top and bottom edges carry natural (zero-flux) conditions and are tagged
//! [`NodeTag::GammaPrime`]. Corners belong to the Dirichlet edges.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeTag {
    Interior,
    Gamma1,
    Gamma2,
    GammaPrime,
}

impl NodeTag {
    pub fn is_dirichlet(self) -> bool {
        matches!(self, NodeTag::Gamma1 | NodeTag::Gamma2)
    }
}

/// Area and constant barycentric gradients of one P1 element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub grad_basis: [[f64; 2]; 3],
}

impl ElementGeometry {
    fn from_vertices(p: [[f64; 2]; 3]) -> Self {
        let [[x0, y0], [x1, y1], [x2, y2]] = p;
        let det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
        let inv = 1.0 / det;
        ElementGeometry {
            area: 0.5 * det,
            grad_basis: [
                [(y1 - y2) * inv, (x2 - x1) * inv],
                [(y2 - y0) * inv, (x0 - x2) * inv],
                [(y0 - y1) * inv, (x1 - x0) * inv],
            ],
        }
    }

    /// Gradient of the P1 interpolant with the given vertex values.
    #[inline]
    pub fn gradient(&self, vals: [f64; 3]) -> [f64; 2] {
        let g = &self.grad_basis;
        [
            vals[0] * g[0][0] + vals[1] * g[1][0] + vals[2] * g[2][0],
            vals[0] * g[0][1] + vals[1] * g[1][1] + vals[2] * g[2][1],
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    tags: Vec<NodeTag>,
    geometry: Vec<ElementGeometry>,
    l1: f64,
    l2: f64,
    nx: usize,
    ny: usize,
}

impl Mesh {
    /// Uniform grid of `nx * ny` cells, each cut along its bottom-left to
    /// top-right diagonal.
    pub fn build_rectangle(l1: f64, l2: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(l1 > 0.0 && l1.is_finite()) || !(l2 > 0.0 && l2.is_finite()) {
            return Err(Error::invalid(format!(
                "domain extents must be positive, got L1 = {l1}, L2 = {l2}"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::invalid(format!(
                "cell counts must be at least 1, got nx = {nx}, ny = {ny}"
            )));
        }
        let hx = l1 / nx as f64;
        let hy = l2 / ny as f64;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut tags = Vec::with_capacity(nodes.capacity());
        for j in 0..=ny {
            for i in 0..=nx {
                // Exact endpoints so tags and lift boundary values are bit-exact.
                let x = if i == nx { l1 } else { i as f64 * hx };
                let y = if j == ny { l2 } else { j as f64 * hy };
                nodes.push([x, y]);
                tags.push(if i == 0 {
                    NodeTag::Gamma1
                } else if i == nx {
                    NodeTag::Gamma2
                } else if j == 0 || j == ny {
                    NodeTag::GammaPrime
                } else {
                    NodeTag::Interior
                });
            }
        }
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        let geometry = compute_geometry(&nodes, &triangles);
        Ok(Mesh {
            nodes,
            triangles,
            tags,
            geometry,
            l1,
            l2,
            nx,
            ny,
        })
    }

    /// Unstructured mesh from raw parts. All nodes are tagged interior and
    /// the grid queries (`point_value`, raster output) are unavailable.
    pub fn from_parts(nodes: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("mesh needs at least one node"));
        }
        for tri in &triangles {
            for &v in tri {
                if v >= nodes.len() {
                    return Err(Error::IndexOutOfRange {
                        index: v,
                        len: nodes.len(),
                    });
                }
            }
        }
        let geometry = compute_geometry(&nodes, &triangles);
        if let Some(t) = geometry.iter().position(|g| !(g.area > 0.0)) {
            return Err(Error::invalid(format!(
                "triangle {t} is degenerate or clockwise"
            )));
        }
        let (mut xmax, mut ymax) = (f64::MIN, f64::MIN);
        for p in &nodes {
            xmax = xmax.max(p[0]);
            ymax = ymax.max(p[1]);
        }
        let tags = vec![NodeTag::Interior; nodes.len()];
        Ok(Mesh {
            nodes,
            triangles,
            tags,
            geometry,
            l1: xmax,
            l2: ymax,
            nx: 0,
            ny: 0,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn tags(&self) -> &[NodeTag] {
        &self.tags
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn is_structured(&self) -> bool {
        self.nx > 0 && self.ny > 0
    }

    /// Smallest cell edge length of the structured grid.
    pub fn cell_size(&self) -> f64 {
        if self.is_structured() {
            (self.l1 / self.nx as f64).min(self.l2 / self.ny as f64)
        } else {
            self.geometry
                .iter()
                .map(|g| (2.0 * g.area).sqrt())
                .fold(f64::INFINITY, f64::min)
        }
    }

    pub fn element_geometry(&self, t: usize) -> Result<ElementGeometry> {
        self.geometry
            .get(t)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index: t,
                len: self.geometry.len(),
            })
    }

    pub fn geometries(&self) -> &[ElementGeometry] {
        &self.geometry
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Nodes on `x = 0` or `x = L1`, ascending.
    pub fn dirichlet_nodes(&self) -> Vec<usize> {
        self.tags
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_dirichlet())
            .map(|(i, _)| i)
            .collect()
    }

    /// Per-element gradient of a nodal field.
    #[inline]
    pub fn element_gradient(&self, t: usize, values: &[f64]) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        self.geometry[t].gradient([values[a], values[b], values[c]])
    }

    /// Evaluates the P1 interpolant at a point inside the structured grid.
    /// Points outside are clamped onto the boundary.
    pub fn point_value(&self, values: &[f64], x: f64, y: f64) -> Result<f64> {
        if !self.is_structured() {
            return Err(Error::invalid("point evaluation needs a structured mesh"));
        }
        if values.len() != self.num_nodes() {
            return Err(Error::SizeMismatch {
                expected: self.num_nodes(),
                actual: values.len(),
            });
        }
        let sx = (x / self.l1).clamp(0.0, 1.0) * self.nx as f64;
        let sy = (y / self.l2).clamp(0.0, 1.0) * self.ny as f64;
        let i = (sx.floor() as usize).min(self.nx - 1);
        let j = (sy.floor() as usize).min(self.ny - 1);
        let xi = sx - i as f64;
        let eta = sy - j as f64;
        let stride = self.nx + 1;
        let u00 = values[j * stride + i];
        let u10 = values[j * stride + i + 1];
        let u01 = values[(j + 1) * stride + i];
        let u11 = values[(j + 1) * stride + i + 1];
        Ok(if xi >= eta {
            u00 + xi * (u10 - u00) + eta * (u11 - u10)
        } else {
            u00 + eta * (u01 - u00) + xi * (u11 - u01)
        })
    }
}

fn compute_geometry(nodes: &[[f64; 2]], triangles: &[[usize; 3]]) -> Vec<ElementGeometry> {
    triangles
        .iter()
        .map(|&[a, b, c]| ElementGeometry::from_vertices([nodes[a], nodes[b], nodes[c]]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_cell() {
        let m = Mesh::build_rectangle(1.0, 1.0, 1, 1).unwrap();
        assert_eq!(m.num_nodes(), 4);
        assert_eq!(m.num_triangles(), 2);
        assert_relative_eq!(m.total_area(), 1.0, max_relative = 1e-12);
        assert_eq!(m.dirichlet_nodes(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn counts_128() {
        let m = Mesh::build_rectangle(1.0, 1.0, 128, 128).unwrap();
        assert_eq!(m.num_nodes(), 16641);
        assert_eq!(m.num_triangles(), 32768);
    }

    #[test]
    fn tags_on_wide_domain() {
        let m = Mesh::build_rectangle(2.0, 1.0, 2, 1).unwrap();
        let find = |p: [f64; 2]| m.nodes().iter().position(|&q| q == p).unwrap();
        assert_eq!(m.tags()[find([2.0, 0.0])], NodeTag::Gamma2);
        assert_eq!(m.tags()[find([1.0, 0.0])], NodeTag::GammaPrime);
        assert_eq!(m.tags()[find([0.0, 1.0])], NodeTag::Gamma1);
    }

    #[test]
    fn dirichlet_counts() {
        let m = Mesh::build_rectangle(1.0, 1.0, 2, 2).unwrap();
        assert_eq!(m.dirichlet_nodes().len(), 6);
        let m = Mesh::build_rectangle(1.0, 1.0, 4, 2).unwrap();
        assert_eq!(m.dirichlet_nodes(), vec![0, 4, 5, 9, 10, 14]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            Mesh::build_rectangle(0.0, 1.0, 1, 1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(Mesh::build_rectangle(1.0, -1.0, 1, 1).is_err());
        assert!(Mesh::build_rectangle(1.0, 1.0, 0, 3).is_err());
        let m = Mesh::build_rectangle(1.0, 1.0, 1, 1).unwrap();
        assert!(matches!(
            m.element_geometry(2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn unit_right_triangle_geometry() {
        let m = Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap();
        let g = m.element_geometry(0).unwrap();
        assert_eq!(g.area, 0.5);
        assert_eq!(g.grad_basis, [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn clockwise_triangle_rejected() {
        let r = Mesh::from_parts(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], vec![[0, 1, 2]]);
        assert!(r.is_err());
    }

    #[test]
    fn equal_element_areas() {
        let m = Mesh::build_rectangle(1.0, 1.0, 2, 2).unwrap();
        for g in m.geometries() {
            assert_relative_eq!(g.area, 0.125, max_relative = 1e-14);
            let s0 = g.grad_basis.iter().map(|v| v[0]).sum::<f64>();
            let s1 = g.grad_basis.iter().map(|v| v[1]).sum::<f64>();
            assert!(s0.abs() < 1e-12 && s1.abs() < 1e-12);
        }
    }

    #[test]
    fn point_value_reproduces_affine() {
        let m = Mesh::build_rectangle(2.0, 1.0, 5, 3).unwrap();
        let f = |x: f64, y: f64| 0.3 * x - 1.7 * y + 0.25;
        let vals: Vec<f64> = m.nodes().iter().map(|p| f(p[0], p[1])).collect();
        for &(x, y) in &[(0.1, 0.2), (1.99, 0.99), (0.77, 0.51), (0.0, 0.0)] {
            assert_relative_eq!(m.point_value(&vals, x, y).unwrap(), f(x, y), epsilon = 1e-12);
        }
    }
}
