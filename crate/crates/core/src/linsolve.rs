//! Jacobi-preconditioned Krylov solvers: CG for the symmetric positive
//! definite potential and concentration systems, BiCGSTAB for the
//! nonsymmetric anisotropic phase system.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

const RESIDUAL_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// Defaults to `10 n` when `None`.
    pub max_iter: Option<usize>,
    pub jacobi: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: None,
            jacobi: true,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions { tol, ..Self::default() }
    }

    fn max_iter(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||b - A x||_2` recomputed from the returned iterate.
    pub final_residual: f64,
    pub converged: bool,
}

/// Diagonal (Jacobi) scaling `1 / diag(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let inv_diag = a
            .diagonal()
            .into_iter()
            .enumerate()
            .map(|(i, d)| if d == 0.0 { Err(Error::ZeroDiagonal(i)) } else { Ok(1.0 / d) })
            .collect::<Result<Vec<_>>>()?;
        Ok(Jacobi { inv_diag })
    }

    fn identity(n: usize) -> Self {
        Jacobi { inv_diag: vec![1.0; n] }
    }

    pub fn scaling(&self) -> &[f64] {
        &self.inv_diag
    }

    #[inline]
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
    }

    /// `D^{-1} A`, the left-scaled matrix.
    pub fn scaled_matrix(&self, a: &CsrMatrix) -> CsrMatrix {
        let mut m = a.clone();
        let row_ptr = m.row_ptr().to_vec();
        let vals = m.values_mut();
        for (i, d) in self.inv_diag.iter().enumerate() {
            for v in &mut vals[row_ptr[i]..row_ptr[i + 1]] {
                *v *= d;
            }
        }
        m
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(a: &CsrMatrix, b: &[f64], x: &[f64], r: &mut [f64]) {
    a.mul_vec_into(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

fn check_dims(a: &CsrMatrix, b: &[f64], x0: &[f64]) -> Result<()> {
    for len in [b.len(), x0.len()] {
        if len != a.dim() {
            return Err(Error::SizeMismatch { expected: a.dim(), actual: len });
        }
    }
    Ok(())
}

fn preconditioner(a: &CsrMatrix, opts: &SolverOptions) -> Result<Jacobi> {
    if opts.jacobi {
        Jacobi::new(a)
    } else {
        Ok(Jacobi::identity(a.dim()))
    }
}

/// Preconditioned conjugate gradients. Running out of iterations is
/// reported through `converged = false`, not as an error.
pub fn cg(a: &CsrMatrix, b: &[f64], x0: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    check_dims(a, b, x0)?;
    let n = a.dim();
    let pre = preconditioner(a, opts)?;
    let target = opts.tol * norm(b).max(RESIDUAL_FLOOR);
    let max_iter = opts.max_iter(n);

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    residual(a, b, &x, &mut r);
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut rnorm = norm(&r);
    let mut iterations = 0;
    let mut rz = 0.0;
    let mut fresh = true;

    while iterations < max_iter {
        if !rnorm.is_finite() {
            return Err(Error::NotFinite("cg"));
        }
        if rnorm <= target {
            // Confirm against the true residual before accepting.
            residual(a, b, &x, &mut r);
            rnorm = norm(&r);
            if rnorm <= target {
                break;
            }
            fresh = true;
        }
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        if fresh {
            p.copy_from_slice(&z);
            fresh = false;
        } else {
            let beta = rz_new / rz;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = zi + beta * *pi;
            }
        }
        rz = rz_new;
        a.mul_vec_into(&p, &mut q);
        let pq = dot(&p, &q);
        if pq == 0.0 || !pq.is_finite() {
            if !pq.is_finite() {
                return Err(Error::NotFinite("cg"));
            }
            break;
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rnorm = norm(&r);
        iterations += 1;
    }
    residual(a, b, &x, &mut r);
    let final_residual = norm(&r);
    if !final_residual.is_finite() {
        return Err(Error::NotFinite("cg"));
    }
    Ok((
        x,
        SolveReport {
            iterations,
            final_residual,
            converged: final_residual <= target,
        },
    ))
}

/// Right-preconditioned BiCGSTAB. A breakdown restarts once from the
/// current iterate; a second breakdown is an error.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], x0: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, SolveReport)> {
    check_dims(a, b, x0)?;
    let n = a.dim();
    let pre = preconditioner(a, opts)?;
    let target = opts.tol * norm(b).max(RESIDUAL_FLOOR);
    let max_iter = opts.max_iter(n);

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    residual(a, b, &x, &mut r);
    let mut r_hat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut iterations = 0;
    let mut restarted = false;
    let mut rnorm = norm(&r);

    'outer: while iterations < max_iter {
        if !rnorm.is_finite() {
            return Err(Error::NotFinite("bicgstab"));
        }
        if rnorm <= target {
            residual(a, b, &x, &mut r);
            rnorm = norm(&r);
            if rnorm <= target {
                break;
            }
        }
        let rho_new = dot(&r_hat, &r);
        let mut breakdown = rho_new.abs() < 1e-300 * norm(&r_hat).max(1e-300);
        if !breakdown {
            let beta = (rho_new / rho) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            pre.apply(&p, &mut p_hat);
            a.mul_vec_into(&p_hat, &mut v);
            let rv = dot(&r_hat, &v);
            if rv == 0.0 {
                breakdown = true;
            } else {
                alpha = rho_new / rv;
                for i in 0..n {
                    s[i] = r[i] - alpha * v[i];
                }
                let snorm = norm(&s);
                if snorm <= target {
                    for i in 0..n {
                        x[i] += alpha * p_hat[i];
                    }
                    r.copy_from_slice(&s);
                    rnorm = snorm;
                    iterations += 1;
                    rho = rho_new;
                    continue 'outer;
                }
                pre.apply(&s, &mut s_hat);
                a.mul_vec_into(&s_hat, &mut t);
                let tt = dot(&t, &t);
                if tt == 0.0 {
                    breakdown = true;
                } else {
                    omega = dot(&t, &s) / tt;
                    for i in 0..n {
                        x[i] += alpha * p_hat[i] + omega * s_hat[i];
                        r[i] = s[i] - omega * t[i];
                    }
                    rnorm = norm(&r);
                    iterations += 1;
                    rho = rho_new;
                    if omega == 0.0 {
                        breakdown = true;
                    }
                }
            }
        }
        if breakdown {
            if !x.iter().all(|v| v.is_finite()) {
                return Err(Error::NotFinite("bicgstab"));
            }
            residual(a, b, &x, &mut r);
            rnorm = norm(&r);
            if rnorm <= target {
                break;
            }
            if restarted {
                return Err(Error::Breakdown { solver: "bicgstab", iterations });
            }
            restarted = true;
            r_hat.copy_from_slice(&r);
            p.iter_mut().for_each(|e| *e = 0.0);
            v.iter_mut().for_each(|e| *e = 0.0);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
        }
    }
    residual(a, b, &x, &mut r);
    let final_residual = norm(&r);
    if !final_residual.is_finite() {
        return Err(Error::NotFinite("bicgstab"));
    }
    Ok((
        x,
        SolveReport {
            iterations,
            final_residual,
            converged: final_residual <= target,
        },
    ))
}

/// Turns a non-converged report into an error.
pub fn require_converged(solver: &'static str, report: SolveReport) -> Result<SolveReport> {
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NotConverged {
            solver,
            iterations: report.iterations,
            residual: report.final_residual,
        })
    }
}
