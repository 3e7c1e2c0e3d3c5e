//! Uniformly accurate two-scale Fourier spectral solvers for the nonlinear
//! Dirac equation in the nonrelativistic limit regime.

pub mod error;
pub mod cli;
pub mod diagnostics;
pub mod field;
pub mod initdata;
pub mod model;
pub mod limit;
pub mod spectral;
pub mod steppers;
pub mod tau_ops;
pub mod toy;

pub use error::{Error, Result};
pub use field::{SpinorField, TwoScaleField};
pub use model::{DiracModel, Example, InitialCondition, Potential, Problem};
pub use spectral::{SpaceGrid, TauGrid, C64};
