//! Maslov-type indices of symplectic paths: `ω`-indices, `L0`/`L1` indices,
//! splitting numbers and the brake-iteration machinery built on them.

pub mod flow;
mod iteration;
mod lagrangian;
mod omega;
mod splitting;

pub use iteration::{
    common_index_jump_search, iteration_monotonicity_check, mean_index_l0, mixed_concavity, CommonJumpTuple, MeanIndex,
    MixedConcavity, MonotonicityReport, MonotonicityViolation,
};
pub use lagrangian::{definite_generator, index_lagrangian, interior_degeneracy_sum};
pub use omega::index_omega;
pub use splitting::{loop_witness, polar_witness, splitting_from_table, splitting_numbers, splitting_numbers_auto, splitting_table_checked, SplittingPair};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Which index an [`IndexPair`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Flavor {
    Omega { re: f64, im: f64 },
    L0,
    L1,
}

impl Flavor {
    pub fn omega(w: Complex64) -> Self {
        Flavor::Omega { re: w.re, im: w.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexPair {
    pub i: i64,
    pub nu: usize,
    pub flavor: Flavor,
}

/// Value produced by one evaluation route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteValue {
    pub route: String,
    pub value: i64,
}

impl RouteValue {
    pub(crate) fn new(route: &str, value: i64) -> Self {
        RouteValue { route: route.to_string(), value }
    }
}

/// An index pair together with every route that agreed on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub pair: IndexPair,
    pub routes: Vec<RouteValue>,
    /// Perturbation sizes used at a degenerate endpoint.
    pub perturbation_eps: Vec<f64>,
}

/// `e^{iθ}`.
pub fn unit(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// `ω = 1`.
pub fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[cfg(test)]
mod tests;
