//! Pseudo-spectral solver for the Boussinesq system in characteristic
//! variables, plus first-order (KdV) and second-order (transport +
//! linearized-KdV) long-wave approximations and the error-scaling
//! experiment harness that compares them.

pub mod assemble;
pub mod boussinesq;
pub mod config;
pub mod error;
pub mod fitting;
pub mod grid;
pub mod harness;
pub mod kdv;
pub mod linkdv;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
