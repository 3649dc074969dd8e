use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::hamiltonian::GaugeHamiltonian;
use super::integrator::interpolate;
use super::shooting::BrakeOrbit;
use crate::error::Result;
use crate::index::{index_lagrangian, index_omega, mean_index_l0, mixed_concavity, one, splitting_numbers_auto, IndexPair, MeanIndex};
use crate::path::{brake_iterate, MatFn, SymplecticPath};
use crate::symplectic::Lagrangian;
use crate::tol::Tolerances;

/// `γ_x` on `[0, τ/2]`: the fundamental solution of `ẏ = J H''(x(t)) y`.
pub fn linearized_path(orbit: &BrakeOrbit, ham: &GaugeHamiltonian) -> Result<SymplecticPath> {
    let n = ham.dim_half();
    let half = orbit.period / 2.0;
    let steps = orbit.steps_half;
    if let Some(q) = ham.linear_form() {
        return SymplecticPath::constant_generator(&(q * 2.0), half, steps);
    }
    let states = Arc::new(orbit.half_states());
    let times: Arc<Vec<f64>> = Arc::new(orbit.times[..=steps].to_vec());
    // fail early on the singular point of the gauge
    for x in states.iter() {
        ham.hessian(x)?;
    }
    let h = ham.clone();
    let b: MatFn = Arc::new(move |t: f64| {
        let x = interpolate(&h, &times, &states, t).expect("interpolation on a validated orbit");
        h.hessian(&x).expect("Hessian away from the origin")
    });
    SymplecticPath::fundamental_solution(b, n, half, steps)
}

/// Index data of the `m`-th brake iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitIndices {
    pub m: usize,
    /// `(i_L0, ν_L0)(γ^m)`.
    pub l0: IndexPair,
    /// `(i_L1, ν_L1)(γ^m)`.
    pub l1: IndexPair,
    /// `(i, ν)(γ^{2m})`.
    pub omega: IndexPair,
    /// `i_L0 + i_L1 = i − n`.
    pub bott_holds: bool,
}

pub fn orbit_indices(path: &SymplecticPath, m: usize, tol: &Tolerances) -> Result<OrbitIndices> {
    let n = path.dim_half() as i64;
    let gm = brake_iterate(path, m)?;
    let g2m = brake_iterate(path, 2 * m)?;
    let l0 = index_lagrangian(&gm, Lagrangian::L0, tol)?.pair;
    let l1 = index_lagrangian(&gm, Lagrangian::L1, tol)?.pair;
    let omega = index_omega(&g2m, one(), tol)?.pair;
    Ok(OrbitIndices { m, l0, l1, omega, bott_holds: l0.i + l1.i == omega.i - n })
}

/// The inequalities an orbit feeds into the counting argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitChecks {
    /// `S⁺_M(1)` with `M = γ²(τ)`.
    pub s_plus: usize,
    pub mu_01: i64,
    pub mu_10: i64,
    /// `i_L1(x) + S⁺_M(1) − ν_L0(x)`.
    pub mixed_bound_l1: i64,
    /// `i_L0(x) + S⁺_M(1) − ν_L1(x)`.
    pub mixed_bound_l0: i64,
    pub mean_index: MeanIndex,
    pub holds: bool,
}

pub fn orbit_checks(path: &SymplecticPath, tol: &Tolerances) -> Result<OrbitChecks> {
    let mc = mixed_concavity(path, tol)?;
    let m = brake_iterate(path, 2)?.endpoint();
    let s_plus = splitting_numbers_auto(&m, one(), tol)?.s_plus;
    let mean_index = mean_index_l0(path, 16, tol)?;
    let b1 = mc.mu_10 + s_plus as i64;
    let b0 = mc.mu_01 + s_plus as i64;
    Ok(OrbitChecks {
        s_plus,
        mu_01: mc.mu_01,
        mu_10: mc.mu_10,
        mixed_bound_l1: b1,
        mixed_bound_l0: b0,
        mean_index,
        holds: b1 >= 0 && b0 >= 0 && mean_index.estimate > 0.0,
    })
}
