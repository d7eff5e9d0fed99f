//! Hand-rolled numerical kernels: adaptive quadrature, an embedded 8(5,3)
//! Runge-Kutta integrator with dense output, monotone Hermite interpolation
//! and least-squares line fits.

pub mod dop853;
mod dop853_tableau;
pub mod fit;
pub mod hermite;
pub mod quadrature;

pub use dop853::{Dop853, OdeFailure, OdeStats};
pub use fit::{linear_fit, LinearFit};
pub use hermite::MonotoneCubic;
pub use quadrature::{integrate, integrate_with_breaks, QuadOptions, QuadResult};
