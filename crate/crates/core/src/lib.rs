pub mod acoustics;
pub mod cli;
pub mod compressible;
pub mod error;
pub mod harness;
pub mod incompressible;
pub mod io;
pub mod model;
pub mod relative_energy;
pub mod selftest;
pub mod spectral;

pub use error::{Error, Result};
