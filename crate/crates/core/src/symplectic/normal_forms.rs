use serde::{Deserialize, Serialize};

use super::SymplecticMatrix;
use crate::error::{Error, Result};
use crate::linalg::{diamond_raw, eigenvalues_r, Mat};

/// The basic normal forms `D(λ)`, `N1(λ, b)`, `R(θ)`, `N2(ω, b)` with `ω = e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormalForm {
    D { lambda: f64 },
    N1 { lambda: f64, b: f64 },
    R { theta: f64 },
    N2 { theta: f64, b: [f64; 4] },
}

fn theta_ok(theta: f64) -> bool {
    let pi = std::f64::consts::PI;
    theta > 0.0 && theta < 2.0 * pi && (theta - pi).abs() > 1e-12
}

fn rot(theta: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

impl NormalForm {
    pub fn matrix(&self) -> Result<SymplecticMatrix> {
        basic_normal_form(*self)
    }

    /// `(S⁺(ω), S⁻(ω))` read off the splitting table, for `ω` given by its angle in `[0, 2π)`.
    pub fn splitting_table(&self, omega_arg: f64) -> Result<(usize, usize)> {
        let near = |a: f64| {
            let d = (omega_arg - a).rem_euclid(2.0 * std::f64::consts::PI);
            d.min(2.0 * std::f64::consts::PI - d) < 1e-9
        };
        let pi = std::f64::consts::PI;
        Ok(match *self {
            NormalForm::D { .. } => (0, 0),
            NormalForm::N1 { lambda, b } => {
                let at = if lambda > 0.0 { 0.0 } else { pi };
                // N1(−1, b) = −N1(1, −b)
                let b_eff = if lambda > 0.0 { b } else { -b };
                if !near(at) {
                    (0, 0)
                } else if b_eff < -0.5 {
                    (0, 0)
                } else {
                    (1, 1)
                }
            }
            NormalForm::R { theta } => {
                if near(theta) {
                    (0, 1)
                } else if near(2.0 * pi - theta) {
                    (1, 0)
                } else {
                    (0, 0)
                }
            }
            NormalForm::N2 { theta, b } => {
                if near(theta) || near(2.0 * pi - theta) {
                    if n2_is_trivial(theta, &b)? {
                        (0, 0)
                    } else {
                        (1, 1)
                    }
                } else {
                    (0, 0)
                }
            }
        })
    }

    /// Angles in `[0, 2π)` of the unit eigenvalues.
    pub fn unit_angles(&self) -> Vec<f64> {
        let pi = std::f64::consts::PI;
        match *self {
            NormalForm::D { .. } => vec![],
            NormalForm::N1 { lambda, .. } => vec![if lambda > 0.0 { 0.0 } else { pi }],
            NormalForm::R { theta } | NormalForm::N2 { theta, .. } => vec![theta, 2.0 * pi - theta],
        }
    }
}

/// Builds the exact matrix of a basic normal form.
pub fn basic_normal_form(nf: NormalForm) -> Result<SymplecticMatrix> {
    match nf {
        NormalForm::D { lambda } => {
            if lambda != 2.0 && lambda != -2.0 {
                return Err(Error::Domain(format!("D(λ) needs λ = ±2, got {lambda}")));
            }
            Ok(SymplecticMatrix::from_trusted(Mat::from_row_slice(2, 2, &[lambda, 0.0, 0.0, 1.0 / lambda])))
        }
        NormalForm::N1 { lambda, b } => {
            if lambda != 1.0 && lambda != -1.0 {
                return Err(Error::Domain(format!("N1(λ, b) needs λ = ±1, got {lambda}")));
            }
            if b != 1.0 && b != -1.0 && b != 0.0 {
                return Err(Error::Domain(format!("N1(λ, b) needs b ∈ {{-1, 0, 1}}, got {b}")));
            }
            Ok(SymplecticMatrix::from_trusted(Mat::from_row_slice(2, 2, &[lambda, b, 0.0, lambda])))
        }
        NormalForm::R { theta } => {
            if !theta_ok(theta) {
                return Err(Error::Domain(format!("R(θ) needs θ ∈ (0, π) ∪ (π, 2π), got {theta}")));
            }
            Ok(SymplecticMatrix::from_trusted(rot(theta)))
        }
        NormalForm::N2 { theta, b } => {
            if !theta_ok(theta) {
                return Err(Error::Domain(format!("N2(ω, b) needs θ ∈ (0, π) ∪ (π, 2π), got {theta}")));
            }
            if b[1] == b[2] {
                return Err(Error::Domain("N2(ω, b) needs b2 ≠ b3".into()));
            }
            let r = rot(theta);
            let bm = Mat::from_row_slice(2, 2, &b);
            let mut m = Mat::zeros(4, 4);
            m.view_mut((0, 0), (2, 2)).copy_from(&r);
            m.view_mut((0, 2), (2, 2)).copy_from(&bm);
            m.view_mut((2, 2), (2, 2)).copy_from(&r);
            SymplecticMatrix::with_tol(m, 1e-9)
                .map_err(|_| Error::Domain("N2(ω, b) needs Rᵀb symmetric, i.e. cos θ (b2 − b3) + sin θ (b1 + b4) = 0".into()))
        }
    }
}

/// A symplectic `b` for `N2`: prescribed `b2 − b3` and free `b1 − b4`, `b2 + b3`.
pub fn n2_block(theta: f64, skew: f64, diff: f64, sum: f64) -> [f64; 4] {
    let (s, c) = theta.sin_cos();
    // c·skew + s·(b1 + b4) = 0
    let trace = -c * skew / s;
    [(trace + diff) / 2.0, (sum + skew) / 2.0, (sum - skew) / 2.0, (trace - diff) / 2.0]
}

/// Trivial means `M·R(−α)^{⋄2}` has no unit eigenvalue for small `α > 0`.
pub fn n2_is_trivial(theta: f64, b: &[f64; 4]) -> Result<bool> {
    let m = basic_normal_form(NormalForm::N2 { theta, b: *b })?.into_matrix();
    let mut verdicts = Vec::new();
    for alpha in [1e-3, 1e-4] {
        let r = rot(-alpha);
        let p = &m * diamond_raw(&r, &r);
        let off = eigenvalues_r(&p).iter().map(|z| (z.norm() - 1.0).abs()).fold(f64::INFINITY, f64::min);
        // hyperbolic splitting is of order √α, elliptic motion keeps |λ| = 1 to rounding
        verdicts.push(off > 1e-3 * alpha.sqrt());
    }
    if verdicts[0] != verdicts[1] {
        return Err(Error::Indeterminate("N2 triviality test not stable in α".into()));
    }
    Ok(verdicts[0])
}
