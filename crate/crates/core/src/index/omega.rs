use num_complex::Complex64;

use super::flow::{min_abs_angle, passes, phase_change, relative_angles, Reference, ORIENTATION};
use super::{Flavor, IndexPair, IndexReport, RouteValue};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::path::{special_path_xi, SymplecticPath};
use crate::symplectic::{nu_omega, nu_omega_checked};
use crate::tol::Tolerances;

fn is_one(w: Complex64) -> bool {
    (w - Complex64::new(1.0, 0.0)).norm() < 1e-12
}

pub(crate) fn check_start(path: &SymplecticPath) -> Result<()> {
    if !path.starts_at_identity(1e-10) {
        return Err(Error::Precondition("path must start at the identity".into()));
    }
    Ok(())
}

const DEGENERATE_ANGLE: f64 = 1e-12;

/// `Gr(M)` meets `Gr(ωI)` up to rounding.
pub(crate) fn endpoint_degenerate(m: &Mat, omega: Complex64) -> Result<bool> {
    Ok(min_abs_angle(&relative_angles(m, Reference::Graph(omega))?) < DEGENERATE_ANGLE)
}

/// Intersection number of `γ ∗ ξ_n` with `{det(M − ωI) = 0}`; the endpoint of `γ`
/// must be non-degenerate at `ω`.
pub(crate) fn route_joint(path: &SymplecticPath, omega: Complex64, tol: &Tolerances) -> Result<i64> {
    let k = path.dim_half();
    let xi = special_path_xi(k, 1.0, 16)?;
    let dxi = phase_change(&xi, tol.max_phase_step)?;
    let dg = phase_change(path, tol.max_phase_step)?;
    let start = relative_angles(xi.start(), Reference::Graph(omega))?;
    let end = relative_angles(path.end(), Reference::Graph(omega))?;
    if min_abs_angle(&end) < DEGENERATE_ANGLE {
        return Err(Error::Unstable(format!("endpoint is numerically degenerate at ω = {omega}")));
    }
    let n = passes(dxi + dg, &start, &end, 0.0)?;
    Ok((ORIENTATION * n as f64) as i64)
}

/// Crossings of `Gr(γ)` with `Gr(ωI)` counted on `γ` alone, with the start
/// contributing `m⁺` and the end `−m⁻` of the crossing form; `n` is subtracted at
/// `ω = 1`. `None` when an endpoint is too close to degenerate for the angular shift.
pub(crate) fn route_shift(path: &SymplecticPath, omega: Complex64, degenerate_end: bool, tol: &Tolerances) -> Result<Option<i64>> {
    let k = path.dim_half();
    let d = tol.flow_shift;
    let start = relative_angles(&Mat::identity(2 * k, 2 * k), Reference::Graph(omega))?;
    let end = relative_angles(path.end(), Reference::Graph(omega))?;
    if !degenerate_end && min_abs_angle(&end) < 100.0 * d {
        return Ok(None);
    }
    if !is_one(omega) && min_abs_angle(&start) < 100.0 * d {
        return Ok(None);
    }
    let dg = phase_change(path, tol.max_phase_step)?;
    let shift = if is_one(omega) { k as i64 } else { 0 };
    let mut vals = Vec::new();
    for s in [d, d / 10.0, d * 10.0] {
        let n = passes(dg, &start, &end, ORIENTATION * s)?;
        vals.push((ORIENTATION * n as f64) as i64 - shift);
    }
    if vals.iter().any(|&v| v != vals[0]) {
        return Err(Error::Unstable(format!("ω-index changes with the angular shift: {vals:?}")));
    }
    Ok(Some(vals[0]))
}

/// `(i_ω(γ), ν_ω(γ))`.
pub fn index_omega(path: &SymplecticPath, omega: Complex64, tol: &Tolerances) -> Result<IndexReport> {
    check_start(path)?;
    let nu = nu_omega_checked(&path.endpoint(), omega, tol)?;
    let mut routes = Vec::new();
    let mut eps_used = Vec::new();
    let joint = if nu == 0 {
        let v = route_joint(path, omega, tol)?;
        routes.push(RouteValue::new("joint", v));
        v
    } else {
        let mut vals = Vec::new();
        for &eps in &tol.omega_eps {
            let pe = path.perturbed(eps);
            if nu_omega(&pe.endpoint(), omega, tol.kernel) != 0 {
                return Err(Error::Unstable(format!("perturbation ε = {eps} leaves the endpoint degenerate")));
            }
            let v = route_joint(&pe, omega, tol)?;
            routes.push(RouteValue::new(&format!("joint_perturbed_{eps:e}"), v));
            eps_used.push(eps);
            vals.push(v);
        }
        if vals.iter().any(|&v| v != vals[0]) {
            return Err(Error::Unstable(format!("perturbed ω-index depends on ε: {vals:?}")));
        }
        vals[0]
    };
    if let Some(v) = route_shift(path, omega, nu > 0, tol)? {
        routes.push(RouteValue::new("shift", v));
        if v != joint {
            return Err(Error::Unstable(format!("ω-index routes disagree: joint {joint}, shift {v}")));
        }
    }
    Ok(IndexReport {
        pair: IndexPair { i: joint, nu, flavor: Flavor::omega(omega) },
        routes,
        perturbation_eps: eps_used,
    })
}
