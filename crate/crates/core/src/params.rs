//! Complete nondimensional parameter set of a run.

use crate::anisotropy::AnisotropyParams;
use crate::error::{Error, Result};
use crate::materials::MaterialParams;
use crate::mesh::Mesh;

/// Sign convention for the electrochemical forcing in the phase equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingSign {
    /// `+ m(c) h'(u)`.
    Plus,
    /// `- m(c) h'(u)`: deposition where the ion concentration is high.
    Minus,
}

impl ForcingSign {
    pub fn factor(self) -> f64 {
        match self {
            ForcingSign::Plus => 1.0,
            ForcingSign::Minus => -1.0,
        }
    }
}

/// Which potential drives electromigration in the concentration step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportPotential {
    /// `phi_bar + lift`.
    Full,
    /// The homogenised `phi_bar` alone.
    Homogenized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialConcentration {
    /// `c0 = 1 - u0`.
    Complement,
    /// `c0 = 1`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub tau: f64,
    pub linear_tol: f64,
    /// Clamp `u` to `[0, 1]` after each phase solve.
    pub clamp: bool,
    /// Lumped mass for time derivatives and nodal reaction terms.
    pub lumped_mass: bool,
    /// Evaluate `g'` and `h'` at the new phase via fixed-point iteration
    /// instead of lagging them.
    pub implicit_reaction: bool,
    pub forcing_sign: ForcingSign,
    pub transport_potential: TransportPotential,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            tau: 6.1e-4,
            linear_tol: 1e-10,
            clamp: false,
            lumped_mass: true,
            implicit_reaction: false,
            forcing_sign: ForcingSign::Minus,
            transport_potential: TransportPotential::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialParams {
    pub seed_x: f64,
    pub seed_y: f64,
    pub r0: f64,
    pub w0: f64,
    pub concentration: InitialConcentration,
}

impl Default for InitialParams {
    fn default() -> Self {
        InitialParams {
            seed_x: 0.0,
            seed_y: 0.5,
            r0: 0.15,
            w0: 0.03,
            concentration: InitialConcentration::Complement,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub l1: f64,
    pub l2: f64,
    pub nx: usize,
    pub ny: usize,
    /// Simulate `[0, L1] x [0, L2/2]` and mirror through `y = L2/2`.
    pub half_domain: bool,
    pub material: MaterialParams,
    pub aniso: AnisotropyParams,
    pub scheme: SchemeParams,
    pub initial: InitialParams,
    pub end_time: f64,
    pub snapshot_times: Vec<f64>,
    /// Diagnostics are recorded every this many steps.
    pub record_every: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            l1: 1.0,
            l2: 1.0,
            nx: 128,
            ny: 128,
            half_domain: false,
            material: MaterialParams::default(),
            aniso: AnisotropyParams::default(),
            scheme: SchemeParams::default(),
            initial: InitialParams::default(),
            end_time: 0.427,
            snapshot_times: vec![0.061, 0.244, 0.427],
            record_every: 1,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.aniso.validate()?;
        if !(self.l1 > 0.0) || !(self.l2 > 0.0) {
            return Err(Error::invalid("L1 and L2 must be positive"));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("nx and ny must be at least 1"));
        }
        if !(self.scheme.tau > 0.0 && self.scheme.tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be positive, got {}", self.scheme.tau)));
        }
        if !(self.scheme.linear_tol > 0.0) {
            return Err(Error::invalid("linear_tol must be positive"));
        }
        if !(self.end_time > 0.0 && self.end_time.is_finite()) {
            return Err(Error::invalid(format!("end_time must be positive, got {}", self.end_time)));
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|t| !(0.0..=self.end_time).contains(*t))
        {
            return Err(Error::invalid(format!(
                "snapshot time {t} outside [0, {}]",
                self.end_time
            )));
        }
        if !(self.initial.r0 > 0.0) || !(self.initial.w0 > 0.0) {
            return Err(Error::invalid("seed radius r0 and width w0 must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        Ok(())
    }

    /// Height of the simulated domain.
    pub fn domain_height(&self) -> f64 {
        if self.half_domain {
            0.5 * self.l2
        } else {
            self.l2
        }
    }

    pub fn cells_y(&self) -> usize {
        if self.half_domain {
            (self.ny / 2).max(1)
        } else {
            self.ny
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        Mesh::build_rectangle(self.l1, self.domain_height(), self.nx, self.cells_y())
    }

    /// Number of steps to reach `end_time` (rounded to the nearest step).
    pub fn num_steps(&self) -> usize {
        steps_to(self.end_time, self.scheme.tau)
    }

    /// Step indices at which snapshots are written.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .snapshot_times
            .iter()
            .map(|&t| steps_to(t, self.scheme.tau))
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn nu2(&self) -> f64 {
        self.material.nu2(self.l1)
    }
}

pub fn steps_to(t: f64, tau: f64) -> usize {
    (t / tau).round() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_snapshots_land_on_steps() {
        let p = Params::default();
        assert_eq!(p.snapshot_steps(), vec![100, 400, 700]);
        assert_eq!(p.num_steps(), 700);
        assert_eq!(steps_to(0.122, p.scheme.tau), 200);
        assert_eq!(steps_to(0.366, p.scheme.tau), 600);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn half_domain_mesh() {
        let p = Params {
            half_domain: true,
            nx: 8,
            ny: 8,
            ..Params::default()
        };
        let m = p.build_mesh().unwrap();
        assert_eq!(m.ny(), 4);
        assert_eq!(m.l2(), 0.5);
    }

    #[test]
    fn rejects_snapshot_past_end() {
        let p = Params {
            snapshot_times: vec![1.0],
            ..Params::default()
        };
        assert!(p.validate().is_err());
    }
}
