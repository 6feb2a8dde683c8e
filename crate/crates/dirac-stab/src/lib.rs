//! Numerical laboratory for the spectral stability of solitary waves of the
//! nonlinear Dirac equation.

pub mod clifford;
pub mod continuation;
pub mod error;
pub mod evans;
pub mod exec;
pub mod grid;
pub mod linearize;
pub mod ode;
pub mod profiles;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
