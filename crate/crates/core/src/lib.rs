//! Numerics for a nonlocal Burgers-type balance law on the unit torus,
//! `u_t + u u_x + (1 - ∂x²)⁻¹ u_x = 0`.

pub mod diagnostics;
pub mod error;
pub mod godunov;
pub mod grid;
pub mod helmholtz;
pub mod io;
pub mod phase;
pub mod trajectory;
pub mod tridiag;
pub mod viscous;
pub mod waves;

pub use error::{Error, Result};
pub use godunov::{run, GodunovConfig};
pub use grid::{InitialData, PeriodicGrid, PresetId, StateField};
pub use helmholtz::HelmholtzSolver;
pub use trajectory::{StepDiagnostics, Trajectory};
pub use viscous::{run_viscous, EnergyLedger, ViscousConfig};
pub use waves::WaveProfile;
