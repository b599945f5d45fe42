//! Property checks and refinement studies behind `nppac verify` and
//! `nppac convergence`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::anisotropy::{AnisotropyParams, DELTA_0};
use crate::diagnostics::{self, DiagRecord};
use crate::error::{Error, Result};
use crate::fem::{self, Field};
use crate::io::config;
use crate::mesh::Mesh;
use crate::params::Params;
use crate::stepper::{State, Stepper};

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Check { name, passed, detail }
    }

    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Check::new(name, passed, detail),
            Err(e) => Check::new(name, false, format!("error: {e}")),
        }
    }
}

fn random_field(mesh: &Mesh, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..mesh.num_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Largest relative gap between `J_a'(w)[v]` and a central difference of
/// `J_a` over `n_pairs` random fields on an `n x n` unit-square mesh.
pub fn energy_derivative_gap(aniso: &AnisotropyParams, n: usize, n_pairs: usize, seed: u64) -> Result<f64> {
    let mesh = Mesh::build_rectangle(1.0, 1.0, n, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..n_pairs {
        let w = random_field(&mesh, &mut rng);
        let v = random_field(&mesh, &mut rng);
        let eps = 1e-6;
        let shifted = |s: f64| -> Vec<f64> { w.iter().zip(&v).map(|(a, b)| a + s * b).collect() };
        let fd = (aniso.dirichlet_energy(&mesh, &shifted(eps))? - aniso.dirichlet_energy(&mesh, &shifted(-eps))?)
            / (2.0 * eps);
        let exact = aniso.dirichlet_energy_derivative(&mesh, &w, &v)?;
        worst = worst.max(rel_err(exact, fd));
    }
    Ok(worst)
}

/// Worst relative gaps `(flux vs. gradient of the density, homogeneity)`
/// over `n` random gradients with `|p|` in `[0.1, 10]`.
pub fn flux_consistency_gaps(aniso: &AnisotropyParams, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grad_gap = 0.0_f64;
    let mut hom_gap = 0.0_f64;
    for _ in 0..n {
        let r = 10f64.powf(rng.gen_range(-1.0..1.0));
        let th = rng.gen_range(0.0..2.0 * PI);
        let p = [r * th.cos(), r * th.sin()];
        let f = aniso.flux(p);
        let fd: Vec<f64> = (0..2)
            .map(|i| {
                let e = 1e-6 * r;
                let (mut a, mut b) = (p, p);
                a[i] += e;
                b[i] -= e;
                (aniso.density(a) - aniso.density(b)) / (2.0 * e)
            })
            .collect();
        let norm = f[0].hypot(f[1]);
        grad_gap = grad_gap.max((f[0] - fd[0]).hypot(f[1] - fd[1]) / norm);
        let t = aniso.tensor(p).0;
        for lambda in [0.5, 2.0, 10.0] {
            let s = aniso.tensor([lambda * p[0], lambda * p[1]]).0;
            let scale = t.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
            for i in 0..2 {
                for j in 0..2 {
                    hom_gap = hom_gap.max((s[i][j] - t[i][j]).abs() / scale);
                }
            }
        }
    }
    (grad_gap, hom_gap)
}

/// Random pair `(w, v)`: `w` is a ramp of random direction and slope, `v`
/// adds a ramp across it; both carry small nodal noise. Transverse
/// perturbations of a steep ramp probe the directions in which the
/// anisotropic density first loses convexity.
pub fn random_ramp_pair(mesh: &Mesh, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let th = rng.gen_range(0.0..2.0 * PI);
    let slope = 10f64.powf(rng.gen_range(-1.0..1.0));
    let cross = slope * 10f64.powf(rng.gen_range(-3.0..0.0));
    let noise = 0.01 * mesh.cell_size() * slope;
    let (s, c) = th.sin_cos();
    let mut w = Vec::with_capacity(mesh.num_nodes());
    let mut v = Vec::with_capacity(mesh.num_nodes());
    for p in mesh.nodes() {
        let along = slope * (c * p[0] + s * p[1]) + noise * rng.gen_range(-1.0..1.0);
        w.push(along);
        v.push(along + cross * (c * p[1] - s * p[0]) + noise * rng.gen_range(-1.0..1.0));
    }
    (w, v)
}

/// Largest value of `J(w) - J(v) - J'(w)[w - v]` over `n_pairs` pairs from
/// [`random_ramp_pair`]; non-positive when `J_a` is convex.
pub fn convexity_violation(aniso: &AnisotropyParams, n: usize, n_pairs: usize, seed: u64) -> Result<f64> {
    let mesh = Mesh::build_rectangle(1.0, 1.0, n, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..n_pairs {
        let (w, v) = random_ramp_pair(&mesh, &mut rng);
        let diff: Vec<f64> = w.iter().zip(&v).map(|(a, b)| a - b).collect();
        let lhs = aniso.dirichlet_energy(&mesh, &w)? - aniso.dirichlet_energy(&mesh, &v)?;
        let rhs = aniso.dirichlet_energy_derivative(&mesh, &w, &diff)?;
        worst = worst.max(lhs - rhs);
    }
    Ok(worst)
}

/// `L^2` error of the potential solver for `phi = sin(pi x) cos(pi y)` on an
/// `n x n` unit square with unit conductivity: zero on both electrodes and
/// no flux through the insulating walls.
pub fn poisson_mms_error(n: usize) -> Result<f64> {
    let mut p = Params {
        nx: n,
        ny: n,
        ..Params::default()
    };
    p.material.sigma_e = 1.0;
    p.material.sigma_s = 1.0;
    let stepper = Stepper::new(p)?;
    let mesh = stepper.mesh();
    let exact = Field::from_fn(mesh, |x, y| (PI * x).sin() * (PI * y).cos());
    let source: Vec<f64> = exact.iter().map(|v| 2.0 * PI * PI * v).collect();
    let zeros = vec![0.0; mesh.num_nodes()];
    let (phi, _) = stepper.solve_potential(&zeros, &source, &zeros)?;
    let err: Vec<f64> = phi.iter().zip(exact.iter()).map(|(a, b)| a - b).collect();
    fem::l2_norm(mesh, &err)
}

/// Successive error ratios `e(n) / e(2n)`.
pub fn ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

/// Runs `params` to its end time and returns the final state and records.
pub fn run_to_end(params: Params) -> Result<(State, Vec<DiagRecord>)> {
    let stepper = Stepper::new(params)?;
    let init = stepper.initial_state()?;
    let steps = stepper.params().num_steps();
    diagnostics::run_recorded(&stepper, init, steps, |_, _| Ok(()))
}

/// Self-convergence study: the finest level is the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    /// Step size or cell size of each level, coarsest first.
    pub sizes: Vec<f64>,
    /// `L^2` distance of `u(T)` on each level to the finest level.
    pub errors: Vec<f64>,
    /// `log2(e_i / e_{i+1})`, from consecutive differences
    /// `||u_i - u_{i+1}||` of the levels.
    pub orders: Vec<f64>,
}

fn orders_from_increments(increments: &[f64]) -> Vec<f64> {
    increments.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Halves the time step `refinements` times on a fixed mesh.
pub fn time_refinement(params: &Params, refinements: usize) -> Result<Refinement> {
    if refinements < 2 {
        return Err(Error::invalid("time refinement needs at least two refinements"));
    }
    let mut finals = Vec::new();
    let mut sizes = Vec::new();
    for l in 0..=refinements {
        let mut p = params.clone();
        p.scheme.tau = params.scheme.tau / f64::powi(2.0, l as i32);
        p.record_every = usize::MAX;
        sizes.push(p.scheme.tau);
        let (state, _) = run_to_end(p)?;
        finals.push(state.u);
    }
    let mesh = params.build_mesh()?;
    let dist = |a: &Field, b: &Field| -> Result<f64> {
        let d: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
        fem::l2_norm(&mesh, &d)
    };
    let last = finals.last().expect("at least one level");
    let errors = finals.iter().map(|f| dist(f, last)).collect::<Result<Vec<_>>>()?;
    let increments = finals.windows(2).map(|w| dist(&w[0], &w[1])).collect::<Result<Vec<_>>>()?;
    Ok(Refinement {
        sizes,
        errors,
        orders: orders_from_increments(&increments),
    })
}

/// Halves the cell size `refinements` times, comparing on the coarsest
/// nodes (the meshes are nested).
pub fn space_refinement(params: &Params, refinements: usize) -> Result<Refinement> {
    if refinements < 2 {
        return Err(Error::invalid("space refinement needs at least two refinements"));
    }
    let coarse = params.build_mesh()?;
    let mut samples: Vec<Field> = Vec::new();
    let mut sizes = Vec::new();
    for l in 0..=refinements {
        let f = 1usize << l;
        let mut p = params.clone();
        p.nx = params.nx * f;
        p.ny = params.ny * f;
        p.record_every = usize::MAX;
        let (state, _) = run_to_end(p.clone())?;
        let mesh = p.build_mesh()?;
        sizes.push(mesh.cell_size());
        let w = mesh.nx() + 1;
        let cw = coarse.nx() + 1;
        let restricted: Vec<f64> = (0..coarse.num_nodes())
            .map(|n| state.u[(n / cw) * f * w + (n % cw) * f])
            .collect();
        samples.push(Field::new(restricted));
    }
    let dist = |a: &Field, b: &Field| -> Result<f64> {
        let d: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
        fem::l2_norm(&coarse, &d)
    };
    let last = samples.last().expect("at least one level");
    let errors = samples.iter().map(|f| dist(f, last)).collect::<Result<Vec<_>>>()?;
    let increments = samples.windows(2).map(|w| dist(&w[0], &w[1])).collect::<Result<Vec<_>>>()?;
    Ok(Refinement {
        sizes,
        errors,
        orders: orders_from_increments(&increments),
    })
}

fn check_short_run(params: &Params) -> Result<(bool, String)> {
    let mut p = params.clone();
    let (nx, ny) = (p.nx.min(32), p.ny.min(32));
    p.nx = nx;
    p.ny = ny;
    p.record_every = 1;
    let stepper = Stepper::new(p)?;
    let init = stepper.initial_state()?;
    let tau = stepper.params().scheme.tau;
    let bound = stepper.max_principle_tau_bound(&init);
    let mass = stepper.lumped_mass().to_vec();
    let mut tele = 0.0_f64;
    let (_, records) = diagnostics::run_recorded(&stepper, init, 20, |old, new| {
        let r = diagnostics::telescoping_check(&new.u, &old.u, &mass, tau)?;
        tele = tele.max(r / diagnostics::telescoping_scale(&new.u, &old.u, &mass, tau).max(1e-300));
        Ok(())
    })?;
    let lo = records.iter().map(|r| r.min_u).fold(f64::INFINITY, f64::min);
    let hi = records.iter().map(|r| r.max_u).fold(f64::NEG_INFINITY, f64::max);
    let ok = tau <= bound && lo >= -1e-2 && hi <= 1.0 + 1e-2 && tele <= 1e-12 && records.len() == 21;
    Ok((
        ok,
        format!(
            "20 steps on {nx}x{ny}: tau {tau:e} <= bound {bound:.3e}, u in [{lo:.4}, {hi:.4}], telescoping {tele:.1e}"
        ),
    ))
}

fn check_interface_analysis() -> Result<(bool, String)> {
    let mesh = Mesh::build_rectangle(1.0, 1.0, 64, 64)?;
    let c = [0.5, 0.5];
    let circle = diagnostics::tanh_bump(&mesh, c, |_| 0.25, 0.02);
    let m = diagnostics::interface_radius_modes(&mesh, &circle, c, 6, 360)?;
    let side = m[1..].iter().fold(0.0_f64, |a, &b| a.max(b));
    let four = diagnostics::tanh_bump(&mesh, c, |t| 0.25 + 0.02 * (4.0 * t).cos(), 0.02);
    let m4 = diagnostics::interface_radius_modes(&mesh, &four, c, 6, 360)?;
    let dominant = (1..=6).all(|n| n == 4 || m4[n] < m4[4]);
    let ok = (m[0] - 0.25).abs() <= mesh.cell_size() && side <= 0.02 * m[0] && dominant && rel_err(m4[4], 0.02) <= 0.1;
    Ok((
        ok,
        format!("circle r = {:.4}, side modes <= {side:.1e}; injected mode 4 = {:.4}", m[0], m4[4]),
    ))
}

/// Runs the property suite for `params`. Sampling checks use fixed seeds.
pub fn run_checks(params: &Params) -> Vec<Check> {
    let aniso = params.aniso.clone();
    let mut checks = Vec::new();

    checks.push(Check::from_result(
        "anisotropic energy derivative",
        energy_derivative_gap(&aniso, 16, 5, 1).map(|g| (g <= 1e-6, format!("max rel. gap {g:.1e}"))),
    ));

    let (grad_gap, hom_gap) = flux_consistency_gaps(&aniso, 200, 2);
    checks.push(Check::new(
        "flux is the density gradient",
        grad_gap <= 1e-6 && hom_gap <= 1e-12,
        format!("gradient gap {grad_gap:.1e}, homogeneity gap {hom_gap:.1e}"),
    ));

    let signs: Result<Vec<(f64, f64)>> = [0.01, 0.05, 0.065, 0.1]
        .iter()
        .map(|&delta| {
            let a = AnisotropyParams { delta, ..aniso.clone() };
            a.estimate_bounds(10_000).map(|(lo, _)| (delta, lo))
        })
        .collect();
    checks.push(Check::from_result(
        "convexity threshold",
        signs.map(|s| {
            let ok = s.iter().all(|&(d, c)| (d < DELTA_0) == (c > 0.0));
            let txt: Vec<String> = s.iter().map(|(d, c)| format!("c_A({d}) = {c:.3e}")).collect();
            (ok, txt.join(", "))
        }),
    ));

    if aniso.delta < DELTA_0 {
        checks.push(Check::from_result(
            "convexity inequality",
            convexity_violation(&aniso, 16, 20, 3).map(|v| (v <= 1e-10, format!("max violation {v:.1e}"))),
        ));
    }

    let errs: Result<Vec<f64>> = [8, 16, 32, 64].iter().map(|&n| poisson_mms_error(n)).collect();
    checks.push(Check::from_result(
        "potential manufactured solution",
        errs.map(|e| {
            let r = ratios(&e);
            let ok = r.iter().all(|&x| x >= 3.6);
            (ok, format!("error ratios {r:.3?}"))
        }),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 200;
    let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let m: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let tau = params.scheme.tau;
    checks.push(Check::from_result(
        "telescoping identity",
        diagnostics::telescoping_check(&a, &b, &m, tau).map(|r| {
            let rel = r / diagnostics::telescoping_scale(&a, &b, &m, tau);
            (rel <= 1e-12, format!("relative residual {rel:.1e}"))
        }),
    ));

    checks.push(Check::from_result("interface analysis", check_interface_analysis()));
    checks.push(Check::from_result("short run", check_short_run(params)));

    let text = config::serialize_config(params);
    checks.push(Check::from_result(
        "config round trip",
        config::parse_config(&text).map(|q| (q == *params, format!("{} keys", text.lines().count()))),
    ));
    checks
}
