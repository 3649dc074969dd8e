//! Brake orbits on convex symmetric energy surfaces: gauge Hamiltonians, a
//! structure-preserving integrator, shooting, enumeration with geometric dedup, and
//! the linearized paths that feed the index machinery.

mod config;
mod enumerate;
mod hamiltonian;
pub mod integrator;
mod linearized;
mod shooting;

pub use config::{HamiltonianConfig, SolverConfig};
pub use enumerate::{
    classify_symmetry, direction_grid, enumerate_brake_orbits, EnumerateOptions, Enumeration, FailedShot, OrbitClass, OrbitImage, Symmetry,
    SymmetryReport,
};
pub use hamiltonian::{gauge_hamiltonian, is_resonant, linear_frequencies, GaugeFn, GaugeHamiltonian, HamiltonianSummary, Surface, Vector};
pub use linearized::{linearized_path, orbit_checks, orbit_indices, OrbitChecks, OrbitIndices};
pub use shooting::{half_period_guess, shoot_brake_orbit, shoot_from_direction, BrakeOrbit, OrbitResiduals, ShootOptions};
