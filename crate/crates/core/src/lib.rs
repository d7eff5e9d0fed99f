//! Adiabatic Grover search under engineered dephasing.
//!
//! The crate models the two-level reduction of the Grover Hamiltonian
//! `H(q) = (1 - q)(I - |psi0><psi0|) + q(I - |m><m|)`, builds interpolation
//! schedules (linear, Roland-Cerf and the dephasing-optimal one), integrates
//! the dephasing Lindblad equation along them, and evaluates runtime bounds.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod grover_model;
pub mod lindblad_sim;
pub mod numeric;
pub mod schedules;

pub use error::{Error, Result};
pub use grover_model::{GroverInstance, SpectralSample};
pub use lindblad_sim::{DensityMatrix, DephasingModel, SimConfig, Trajectory};
pub use schedules::{Schedule, ScheduleKind, SchedulePath};
