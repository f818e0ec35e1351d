//! Numerical verification toolkit for the Obata equation
//! ∇²f + f·g = 0 with Robin (∂f/∂ν + a·f = 0) and non-vanishing Neumann
//! (∂f/∂ν = 1) boundary conditions.
//!
//! The crate builds the model geometries on the round sphere (caps,
//! generalized Clifford-torus domains, the a < 0 ball and warped
//! products), integrates the gradient flows and curvature ODEs the theory
//! rests on, solves the reduced radial eigenproblem whose first eigenvalue
//! pins ξ₁ = n on the model caps, and implements the boundary Taylor-jet
//! recursion with the smooth-gluing criterion.  Every stated identity is
//! measured as a defect with an explicit tolerance; `verify::run_acceptance`
//! runs the whole battery.

pub mod error;
pub mod flow;
pub mod geometry;
pub mod jets;
pub mod ode;
pub mod report;
pub mod spectral;
pub mod verify;

pub use error::{CoreError, Result};
