//! Configuration files and result serialisation.

pub mod config;
pub mod csv;
pub mod pgm;
pub mod vtk;

pub use config::{load_config, parse_config, serialize_config};
pub use csv::{read_csv, write_csv};
pub use pgm::write_pgm;
pub use vtk::write_vtk;
