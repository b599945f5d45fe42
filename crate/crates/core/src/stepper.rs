//! Sequential semi-implicit time stepping.
//!
//! Each step solves, in order,
//!
//! 1. the phase equation with the anisotropic tensor, the double well and
//!    the forcing all evaluated at the previous step,
//! 2. the potential equation for the homogenised potential `phi_bar`
//!    (zero on both electrodes) with the new phase,
//! 3. the concentration equation with the new phase, the new potential and
//!    the electromigration coefficient lagged in `c`.
//!
//! The physical potential is `phi = phi_bar + phi_minus (1 - x / L1)`.

use crate::error::{Error, Result};
use crate::fem::{self, Assembler, Field};
use crate::linsolve::{bicgstab, cg, require_converged, SolveReport, SolverOptions};
use crate::materials::{g_prime, h_prime};
use crate::mesh::Mesh;
use crate::params::{InitialConcentration, Params, TransportPotential};
use crate::sparse::CsrMatrix;

/// Returned by [`Stepper::max_principle_tau_bound`] when the reaction terms
/// vanish identically.
pub const UNBOUNDED_TAU: f64 = 1e30;

const PICARD_MAX: usize = 50;
const PICARD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Field,
    pub c: Field,
    pub phi_bar: Field,
    pub t: f64,
    pub k: usize,
}

/// Linear-solver iteration counts of one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    pub phase_iterations: usize,
    pub poisson_iterations: usize,
    pub concentration_iterations: usize,
}

/// Owns the mesh-dependent operators that do not change between steps.
#[derive(Debug, Clone)]
pub struct Stepper {
    mesh: Mesh,
    params: Params,
    assembler: Assembler,
    lumped: Vec<f64>,
    consistent: Option<CsrMatrix>,
    dirichlet: Vec<usize>,
    lift: Vec<f64>,
}

impl Stepper {
    pub fn new(params: Params) -> Result<Self> {
        params.validate()?;
        let mesh = params.build_mesh()?;
        Self::with_mesh(mesh, params)
    }

    pub fn with_mesh(mesh: Mesh, params: Params) -> Result<Self> {
        params.validate()?;
        let assembler = Assembler::new(&mesh);
        let lumped = fem::lumped_mass(&mesh);
        let consistent = (!params.scheme.lumped_mass).then(|| fem::assemble_mass(&mesh, false));
        let dirichlet = mesh.dirichlet_nodes();
        let phi_minus = params.material.phi_minus;
        let l1 = mesh.l1();
        let lift = mesh
            .nodes()
            .iter()
            .map(|p| phi_minus * (1.0 - p[0] / l1))
            .collect();
        Ok(Stepper {
            mesh,
            params,
            assembler,
            lumped,
            consistent,
            dirichlet,
            lift,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions::with_tol(self.params.scheme.linear_tol)
    }

    fn mass_apply(&self, v: &[f64]) -> Vec<f64> {
        match &self.consistent {
            Some(m) => m.mul_vec(v),
            None => self.lumped.iter().zip(v).map(|(m, x)| m * x).collect(),
        }
    }

    fn add_mass(&self, k: &mut CsrMatrix, scale: f64) -> Result<()> {
        match &self.consistent {
            Some(m) => {
                // Same pattern as every assembled operator.
                for (a, b) in k.values_mut().iter_mut().zip(m.values()) {
                    *a += scale * b;
                }
                Ok(())
            }
            None => k.add_diagonal(&self.lumped, scale),
        }
    }

    /// Tanh nucleus centred on the anode: `u0 = (1 - tanh((d - r0) / w0)) / 2`.
    pub fn initial_state(&self) -> Result<State> {
        let init = &self.params.initial;
        if !(init.r0 > 0.0) || !(init.w0 > 0.0) {
            return Err(Error::invalid("seed radius and width must be positive"));
        }
        let u = Field::from_fn(&self.mesh, |x, y| {
            let d = (x - init.seed_x).hypot(y - init.seed_y);
            0.5 * (1.0 - ((d - init.r0) / init.w0).tanh())
        });
        let c = match init.concentration {
            InitialConcentration::Complement => Field::new(u.iter().map(|v| 1.0 - v).collect()),
            InitialConcentration::Uniform => Field::constant(&self.mesh, 1.0),
        };
        Ok(State {
            u,
            c,
            phi_bar: Field::constant(&self.mesh, 0.0),
            t: 0.0,
            k: 0,
        })
    }

    fn phase_rhs(&self, base: &[f64], u_eval: &[f64], c_prev: &[f64]) -> Vec<f64> {
        let mat = &self.params.material;
        let eps2_tau = mat.eps * mat.eps / self.params.scheme.tau;
        let sign = self.params.scheme.forcing_sign.factor();
        let nodal: Vec<f64> = base
            .iter()
            .zip(u_eval)
            .zip(c_prev)
            .map(|((&ub, &ue), &c)| {
                eps2_tau * ub - mat.gamma * g_prime(ue) + sign * mat.forcing(c) * h_prime(ue)
            })
            .collect();
        self.mass_apply(&nodal)
    }

    /// New phase from `(u^{k-1}, c^{k-1})`.
    pub fn step_phase(&self, state: &State) -> Result<(Field, SolveReport)> {
        state.u.check(&self.mesh)?;
        state.c.check(&self.mesh)?;
        let mat = &self.params.material;
        let eps2_tau = mat.eps * mat.eps / self.params.scheme.tau;
        let mut k = self
            .assembler
            .stiffness_tensor(&self.mesh, &state.u, &self.params.aniso)?;
        self.add_mass(&mut k, eps2_tau)?;
        let opts = self.solver_options();

        let rhs = self.phase_rhs(&state.u, &state.u, &state.c);
        let (mut u, mut report) = bicgstab(&k, &rhs, &state.u, &opts)?;
        require_converged("bicgstab (phase)", report)?;
        if self.params.scheme.implicit_reaction {
            let mut converged = false;
            for _ in 0..PICARD_MAX {
                let rhs = self.phase_rhs(&state.u, &u, &state.c);
                let (next, rep) = bicgstab(&k, &rhs, &u, &opts)?;
                require_converged("bicgstab (phase)", rep)?;
                report.iterations += rep.iterations;
                report.final_residual = rep.final_residual;
                let change = next
                    .iter()
                    .zip(&u)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                u = next;
                if change < PICARD_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NotConverged {
                    solver: "picard (phase reaction)",
                    iterations: PICARD_MAX,
                    residual: f64::NAN,
                });
            }
        }
        if self.params.scheme.clamp {
            u.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        }
        Ok((Field::new(u), report))
    }

    /// Right-hand side density of the homogenised potential equation,
    /// `-nu1 d_tau u - nu2 sigma'(u) d_x u`.
    pub fn poisson_source(&self, u_new: &[f64], u_old: &[f64]) -> Result<Vec<f64>> {
        fem::check_len(&self.mesh, u_new)?;
        fem::check_len(&self.mesh, u_old)?;
        let mat = &self.params.material;
        let tau = self.params.scheme.tau;
        let nu2 = self.params.nu2();
        let dx = fem::nodal_x_derivative(&self.mesh, u_new)?;
        Ok(u_new
            .iter()
            .zip(u_old)
            .zip(&dx)
            .map(|((&un, &uo), &d)| -mat.nu1 * (un - uo) / tau - nu2 * mat.conductivity_prime(un) * d)
            .collect())
    }

    /// Solves `(sigma(u) grad phi_bar, grad eta) = (source, eta)` with
    /// `phi_bar = 0` on both electrodes.
    pub fn solve_potential(&self, u: &[f64], source: &[f64], guess: &[f64]) -> Result<(Field, SolveReport)> {
        let mat = &self.params.material;
        let sigma: Vec<f64> = u.iter().map(|&s| mat.conductivity(s)).collect();
        let mut k = self.assembler.stiffness_scalar(&self.mesh, &sigma)?;
        let mut b = self.mass_apply(source);
        let zeros = vec![0.0; self.dirichlet.len()];
        fem::apply_dirichlet(&mut k, &mut b, &self.dirichlet, &zeros)?;
        let mut x0 = guess.to_vec();
        for &i in &self.dirichlet {
            x0[i] = 0.0;
        }
        let (mut x, report) = cg(&k, &b, &x0, &self.solver_options())?;
        require_converged("cg (potential)", report)?;
        for &i in &self.dirichlet {
            x[i] = 0.0;
        }
        Ok((Field::new(x), report))
    }

    pub fn step_poisson(&self, u_new: &Field, u_old: &Field, guess: &Field) -> Result<(Field, SolveReport)> {
        let source = self.poisson_source(u_new, u_old)?;
        self.solve_potential(u_new, &source, guess)
    }

    /// `phi_bar + phi_minus (1 - x / L1)`.
    pub fn full_potential(&self, phi_bar: &[f64]) -> Result<Field> {
        fem::check_len(&self.mesh, phi_bar)?;
        Ok(Field::new(phi_bar.iter().zip(&self.lift).map(|(a, b)| a + b).collect()))
    }

    pub fn lift(&self) -> &[f64] {
        &self.lift
    }

    /// New concentration; `phi` is the potential that drives migration.
    pub fn step_concentration(
        &self,
        u_new: &Field,
        u_old: &Field,
        c_old: &Field,
        phi: &Field,
    ) -> Result<(Field, SolveReport)> {
        for f in [u_new, u_old, c_old, phi] {
            f.check(&self.mesh)?;
        }
        let mat = &self.params.material;
        let tau = self.params.scheme.tau;
        let d: Vec<f64> = u_new.iter().map(|&s| mat.diffusivity(s)).collect();
        let mut k = self.assembler.stiffness_scalar(&self.mesh, &d)?;
        self.add_mass(&mut k, 1.0 / tau)?;

        let nodal: Vec<f64> = c_old
            .iter()
            .zip(u_new.iter().zip(u_old.iter()))
            .map(|(&c, (&un, &uo))| c / tau - mat.mu * (un - uo) / tau)
            .collect();
        let mut b = self.mass_apply(&nodal);
        let fluxes = self.migration_fluxes(u_new, c_old, phi);
        let f = fem::assemble_flux_load(&self.mesh, &fluxes)?;
        for (bi, fi) in b.iter_mut().zip(&f) {
            *bi -= fi;
        }
        let (c, report) = cg(&k, &b, c_old, &self.solver_options())?;
        require_converged("cg (concentration)", report)?;
        Ok((Field::new(c), report))
    }

    /// Per-element `D1(u, c) grad phi` with vertex-averaged `u` and `c`.
    pub fn migration_fluxes(&self, u: &[f64], c: &[f64], phi: &[f64]) -> Vec<[f64; 2]> {
        let mat = &self.params.material;
        self.mesh
            .triangles()
            .iter()
            .enumerate()
            .map(|(t, &[i, j, k])| {
                let ub = (u[i] + u[j] + u[k]) / 3.0;
                let cb = (c[i] + c[j] + c[k]) / 3.0;
                let d1 = mat.transport(ub, cb);
                let g = self.mesh.element_gradient(t, phi);
                [d1 * g[0], d1 * g[1]]
            })
            .collect()
    }

    /// One full step: phase, then potential, then concentration.
    pub fn advance(&self, state: &State) -> Result<(State, StepReport)> {
        let (u, rp) = self.step_phase(state)?;
        let (phi_bar, rq) = self.step_poisson(&u, &state.u, &state.phi_bar)?;
        let drive = match self.params.scheme.transport_potential {
            TransportPotential::Full => self.full_potential(&phi_bar)?,
            TransportPotential::Homogenized => phi_bar.clone(),
        };
        let (c, rc) = self.step_concentration(&u, &state.u, &state.c, &drive)?;
        let k = state.k + 1;
        Ok((
            State {
                u,
                c,
                phi_bar,
                t: k as f64 * self.params.scheme.tau,
                k,
            },
            StepReport {
                phase_iterations: rp.iterations,
                poisson_iterations: rq.iterations,
                concentration_iterations: rc.iterations,
            },
        ))
    }

    /// Largest step keeping the explicit reaction terms sign-preserving:
    /// `1 / max_i (gamma |g'(u_i)| + |m(c_i)| h'(u_i))`.
    pub fn max_principle_tau_bound(&self, state: &State) -> f64 {
        let mat = &self.params.material;
        let worst = state
            .u
            .iter()
            .zip(state.c.iter())
            .map(|(&u, &c)| mat.gamma * g_prime(u).abs() + mat.forcing(c).abs() * h_prime(u))
            .fold(0.0, f64::max);
        if worst > 0.0 {
            (1.0 / worst).min(UNBOUNDED_TAU)
        } else {
            UNBOUNDED_TAU
        }
    }
}
