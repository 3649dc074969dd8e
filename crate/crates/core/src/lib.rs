//! Maslov-type index theory for symplectic paths with Lagrangian boundary
//! conditions, the (ε, L0, L1)-signature calculus, brake-orbit iteration, and a
//! shooting solver for brake orbits on convex symmetric energy surfaces.

pub mod corpus;
pub mod error;
pub mod index;
pub mod linalg;
pub mod orbits;
pub mod path;
pub mod signature;
pub mod suites;
pub mod symplectic;
pub mod tol;

pub use error::{Error, Result};
pub use tol::Tolerances;
