pub mod config;
pub mod error;
pub mod evolve;
mod fft;
pub mod functionals;
pub mod grid;
pub mod ground_state;
pub mod harness;
pub mod initial;
pub mod io;
pub mod model;
pub mod potentials;
pub mod riesz;
pub mod spectral;
pub mod suites;
pub mod threshold;

pub use error::{Error, Result};
pub use grid::{Field, Grid, Point, RealField};
pub use model::Model;
pub use potentials::PotentialSpec;
