//! Finite-element simulation of anisotropic dendritic electrodeposition:
//! an Allen-Cahn phase field coupled to Nernst-Planck ion transport and a
//! Poisson equation for the electric potential.

pub mod anisotropy;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod io;
pub mod linsolve;
pub mod materials;
pub mod mesh;
pub mod params;
pub mod sparse;
pub mod stepper;
pub mod verify;

pub use anisotropy::AnisotropyParams;
pub use error::{Error, Result};
pub use fem::Field;
pub use materials::MaterialParams;
pub use mesh::{Mesh, NodeTag};
pub use params::{ForcingSign, Params, SchemeParams};
pub use sparse::CsrMatrix;
pub use stepper::{State, StepReport, Stepper};
