pub mod bayes;
pub mod cli;
pub mod ds_limits;
pub mod error;
pub mod evalharness;
pub mod poisson_dsm;
pub mod sampling;
pub mod specfun;

pub use error::{Error, Result};
