use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{nu_omega_checked, unit_clusters, SymplecticMatrix};
use crate::error::{Error, Result};
use crate::index::splitting_numbers_auto;
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitEigen {
    /// Angle in `[0, 2π)`.
    pub arg: f64,
    pub nu: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingEntry {
    pub arg: f64,
    pub s_plus: usize,
    pub s_minus: usize,
}

/// Invariant list of the `≈` relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxInvariants {
    pub dim_half: usize,
    pub unit_spectrum: Vec<UnitEigen>,
    pub splitting: Vec<SplittingEntry>,
    /// Parity of the number of eigenvalues in `(−1, 0)`; `None` when `−1` is on the
    /// unit spectrum, where the parity can change inside the class.
    pub negative_hyperbolic_parity: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum Equivalence {
    Equivalent,
    NotEquivalent(String),
    Indeterminate(String),
}

pub fn approx_invariants(m: &SymplecticMatrix, tol: &Tolerances) -> Result<ApproxInvariants> {
    let clusters = unit_clusters(m, tol);
    if let Some(c) = clusters.iter().find(|c| c.ambiguous) {
        return Err(Error::Indeterminate(format!(
            "eigenvalue {} sits in the band around the unit circle",
            c.center()
        )));
    }
    let mut unit_spectrum = Vec::new();
    let mut splitting = Vec::new();
    for c in clusters.iter().filter(|c| c.on_unit) {
        let w = Complex64::from_polar(1.0, c.arg);
        let nu = nu_omega_checked(m, w, tol)?;
        if nu == 0 {
            return Err(Error::Indeterminate(format!("unit eigenvalue {w} with empty numerical kernel")));
        }
        let s = splitting_numbers_auto(m, w, tol)?;
        unit_spectrum.push(UnitEigen { arg: c.arg, nu });
        splitting.push(SplittingEntry { arg: c.arg, s_plus: s.s_plus, s_minus: s.s_minus });
    }
    let minus_one = unit_spectrum.iter().any(|u| (u.arg - std::f64::consts::PI).abs() < 1e-6);
    let negative_hyperbolic_parity = (!minus_one).then(|| {
        clusters
            .iter()
            .filter(|c| !c.on_unit && c.re < 0.0 && c.im.abs() < tol.cluster && c.center().norm() < 1.0)
            .map(|c| c.alg_mult)
            .sum::<usize>()
            % 2
    });
    Ok(ApproxInvariants { dim_half: m.dim_half(), unit_spectrum, splitting, negative_hyperbolic_parity })
}

/// Decides `M1 ≈ M2` by comparing invariant lists. Numerical trouble on either side
/// gives [`Equivalence::Indeterminate`], never a verdict.
pub fn approx_equivalent(m1: &SymplecticMatrix, m2: &SymplecticMatrix, tol: &Tolerances) -> Equivalence {
    let (a, b) = match (approx_invariants(m1, tol), approx_invariants(m2, tol)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Equivalence::Indeterminate(e.to_string()),
    };
    if a.dim_half != b.dim_half {
        return Equivalence::NotEquivalent(format!("dimensions {} and {}", a.dim_half, b.dim_half));
    }
    if a.unit_spectrum.len() != b.unit_spectrum.len() {
        return Equivalence::NotEquivalent("different unit spectra".into());
    }
    let arg_tol = 10.0 * tol.cluster;
    for (u, v) in a.unit_spectrum.iter().zip(&b.unit_spectrum) {
        if (u.arg - v.arg).abs() > arg_tol {
            return Equivalence::NotEquivalent(format!("unit eigenvalue angles {} and {}", u.arg, v.arg));
        }
        if u.nu != v.nu {
            return Equivalence::NotEquivalent(format!("ν = {} and {} at angle {}", u.nu, v.nu, u.arg));
        }
    }
    for (s, t) in a.splitting.iter().zip(&b.splitting) {
        if (s.s_plus, s.s_minus) != (t.s_plus, t.s_minus) {
            return Equivalence::NotEquivalent(format!(
                "splitting numbers ({}, {}) and ({}, {}) at angle {}",
                s.s_plus, s.s_minus, t.s_plus, t.s_minus, s.arg
            ));
        }
    }
    if a.negative_hyperbolic_parity != b.negative_hyperbolic_parity {
        return Equivalence::NotEquivalent("parity of negative hyperbolic eigenvalues".into());
    }
    Equivalence::Equivalent
}
