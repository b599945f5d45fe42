//! Fourfold interface anisotropy.
//!
//! The anisotropy function is
//! `a(p) = a0 (1 - 3 delta) + 4 a0 delta (p_x^4 + p_y^4) / |p|^4`, which in
//! polar form reads `a0 (1 + delta cos 4 theta)`. The diffusion tensor of the
//! phase equation is `A(p) = a(p) grad a(p) p^T + a(p)^2 I`, so that
//! `A(p) p` is the gradient of the energy density `a(p)^2 |p|^2 / 2`.
//!
//! Below `|p|^2 < p_tol` the direction is undefined and every quantity takes
//! its isotropic value (`a = a0`, `grad a = 0`).

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Convexity limit of the anisotropic Dirichlet energy for mode 4.
pub const DELTA_0: f64 = 1.0 / 15.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropyParams {
    pub a0: f64,
    pub delta: f64,
    pub p_tol: f64,
}

impl Default for AnisotropyParams {
    fn default() -> Self {
        AnisotropyParams {
            a0: 0.1,
            delta: 0.05,
            p_tol: 1e-12,
        }
    }
}

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor2(pub [[f64; 2]; 2]);

impl Tensor2 {
    pub fn scaled_identity(s: f64) -> Self {
        Tensor2([[s, 0.0], [0.0, s]])
    }

    #[inline]
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn symmetric_part(&self) -> Tensor2 {
        let m = &self.0;
        let off = 0.5 * (m[0][1] + m[1][0]);
        Tensor2([[m[0][0], off], [off, m[1][1]]])
    }

    /// Eigenvalues `(min, max)` of the symmetric part.
    pub fn symmetric_eigenvalues(&self) -> (f64, f64) {
        let s = self.symmetric_part().0;
        let mean = 0.5 * (s[0][0] + s[1][1]);
        let half_diff = 0.5 * (s[0][0] - s[1][1]);
        let r = half_diff.hypot(s[0][1]);
        (mean - r, mean + r)
    }
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl AnisotropyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return Err(Error::invalid(format!("a0 must be positive, got {}", self.a0)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid(format!("delta must be >= 0, got {}", self.delta)));
        }
        if !(self.p_tol > 0.0) {
            return Err(Error::invalid(format!("p_tol must be positive, got {}", self.p_tol)));
        }
        Ok(())
    }

    /// True when `delta` is at or beyond the convexity limit.
    pub fn exceeds_convexity_limit(&self) -> bool {
        self.delta >= DELTA_0
    }

    #[inline]
    fn is_regular(&self, p: [f64; 2]) -> bool {
        dot(p, p) >= self.p_tol
    }

    pub fn a_of(&self, p: [f64; 2]) -> f64 {
        if !self.is_regular(p) {
            return self.a0;
        }
        let n2 = dot(p, p);
        let quartic = p[0].powi(4) + p[1].powi(4);
        self.a0 * (1.0 - 3.0 * self.delta) + 4.0 * self.a0 * self.delta * quartic / (n2 * n2)
    }

    pub fn grad_a(&self, p: [f64; 2]) -> [f64; 2] {
        if !self.is_regular(p) {
            return [0.0, 0.0];
        }
        let n2 = dot(p, p);
        let quartic = p[0].powi(4) + p[1].powi(4);
        let scale = 16.0 * self.a0 * self.delta / (n2 * n2 * n2);
        [
            scale * p[0] * (p[0] * p[0] * n2 - quartic),
            scale * p[1] * (p[1] * p[1] * n2 - quartic),
        ]
    }

    pub fn tensor(&self, p: [f64; 2]) -> Tensor2 {
        if !self.is_regular(p) {
            return Tensor2::scaled_identity(self.a0 * self.a0);
        }
        let a = self.a_of(p);
        let ga = self.grad_a(p);
        let a2 = a * a;
        Tensor2([
            [a * ga[0] * p[0] + a2, a * ga[0] * p[1]],
            [a * ga[1] * p[0], a * ga[1] * p[1] + a2],
        ])
    }

    /// `A(p) p`.
    #[inline]
    pub fn flux(&self, p: [f64; 2]) -> [f64; 2] {
        self.tensor(p).apply(p)
    }

    /// Energy density `a(p)^2 |p|^2 / 2`.
    #[inline]
    pub fn density(&self, p: [f64; 2]) -> f64 {
        let a = self.a_of(p);
        0.5 * a * a * dot(p, p)
    }

    /// Jacobian of the flux, i.e. the Hessian of the energy density.
    ///
    /// Written in the frame of `p_hat` and its left normal `t_hat`, with
    /// `a(theta) = a0 (1 + delta cos 4 theta)`:
    /// `[[a^2, a a'], [a a', a'^2 + a (a + a'')]]`. The lower-right entry
    /// changes sign for `delta > 1/15`.
    pub fn tangent_tensor(&self, p: [f64; 2]) -> Tensor2 {
        if !self.is_regular(p) {
            return Tensor2::scaled_identity(self.a0 * self.a0);
        }
        let theta = p[1].atan2(p[0]);
        let (s4, c4) = (4.0 * theta).sin_cos();
        let a = self.a0 * (1.0 + self.delta * c4);
        let a_t = -4.0 * self.a0 * self.delta * s4;
        let a_tt = -16.0 * self.a0 * self.delta * c4;
        let h_pp = a * a;
        let h_pt = a * a_t;
        let h_tt = a_t * a_t + a * (a + a_tt);
        let (s, c) = theta.sin_cos();
        let (ph, th) = ([c, s], [-s, c]);
        let mut m = [[0.0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = h_pp * ph[i] * ph[j]
                    + h_pt * (ph[i] * th[j] + th[i] * ph[j])
                    + h_tt * th[i] * th[j];
            }
        }
        Tensor2(m)
    }

    /// Sampled coercivity and continuity constants `(c_A, C_A)` of the
    /// linearised anisotropic operator: extreme values of
    /// `q^T DF(p) q` over `n_samples` equally spaced unit directions `p`,
    /// with the extremum over unit `q` taken exactly per direction.
    pub fn estimate_bounds(&self, n_samples: usize) -> Result<(f64, f64)> {
        if n_samples < 100 {
            return Err(Error::invalid(format!(
                "bounds estimate needs at least 100 samples, got {n_samples}"
            )));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..n_samples {
            let theta = std::f64::consts::TAU * (k as f64 + 0.5) / n_samples as f64;
            let (s, c) = theta.sin_cos();
            let (emin, emax) = self.tangent_tensor([c, s]).symmetric_eigenvalues();
            lo = lo.min(emin);
            hi = hi.max(emax);
        }
        Ok((lo, hi))
    }

    /// Anisotropic Dirichlet energy of a P1 field.
    pub fn dirichlet_energy(&self, mesh: &Mesh, w: &[f64]) -> Result<f64> {
        check_len(mesh, w)?;
        Ok(mesh
            .geometries()
            .iter()
            .enumerate()
            .map(|(t, geo)| geo.area * self.density(mesh.element_gradient(t, w)))
            .sum())
    }

    /// `J_a'(w)[v]`.
    pub fn dirichlet_energy_derivative(&self, mesh: &Mesh, w: &[f64], v: &[f64]) -> Result<f64> {
        check_len(mesh, w)?;
        check_len(mesh, v)?;
        Ok(mesh
            .geometries()
            .iter()
            .enumerate()
            .map(|(t, geo)| {
                let f = self.flux(mesh.element_gradient(t, w));
                geo.area * dot(f, mesh.element_gradient(t, v))
            })
            .sum())
    }
}

fn check_len(mesh: &Mesh, w: &[f64]) -> Result<()> {
    if w.len() != mesh.num_nodes() {
        return Err(Error::SizeMismatch {
            expected: mesh.num_nodes(),
            actual: w.len(),
        });
    }
    Ok(())
}
