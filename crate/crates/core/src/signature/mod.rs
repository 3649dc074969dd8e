//! The (ε, L0, L1)-signature calculus: the symmetrization `M_ε`, stabilized inertia,
//! concavity of paths and the signature bounds built on them, plus the
//! (L0, L1)-normal form of matrices with a degenerate `B` block.

mod normal_form;

pub use normal_form::{normal_form_l0l1, ApproxCheck, FactorTag, NormalFormCase, NormalFormReport, TaggedFactor, ZeroCoreData};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::index_lagrangian;
use crate::linalg::{diamond_raw, eigenvalues_r, from_blocks, max_abs, rank, singular_values, sym_eigenvalues, symmetrize, Mat};
use crate::path::SymplecticPath;
use crate::symplectic::{elliptic_height, n_transform, nu_lagrangian, InertiaTriple, Lagrangian, SymplecticMatrix};
use crate::tol::Tolerances;

/// `M_ε(P)` together with the `ε` it was evaluated at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsSymmetrization {
    pub eps: f64,
    pub matrix: Mat,
}

/// `M_ε(P) = Pᵀ [[s I, −c I], [−c I, −s I]] P + [[s I, c I], [c I, −s I]]` with
/// `s = sin 2ε`, `c = cos 2ε`.
pub fn m_epsilon(p: &SymplecticMatrix, eps: f64) -> EpsSymmetrization {
    EpsSymmetrization { eps, matrix: m_epsilon_raw(p.matrix(), eps) }
}

pub(crate) fn m_epsilon_raw(p: &Mat, eps: f64) -> Mat {
    let k = p.nrows() / 2;
    let (s, c) = ((2.0 * eps).sin(), (2.0 * eps).cos());
    let i = Mat::identity(k, k);
    let inner = from_blocks(&(&i * s), &(&i * -c), &(&i * -c), &(&i * -s));
    let outer = from_blocks(&(&i * s), &(&i * c), &(&i * c), &(&i * -s));
    symmetrize(&(p.transpose() * inner * p + outer))
}

fn inertia_at(eig: &[f64], thr: f64) -> InertiaTriple {
    let mut t = InertiaTriple::default();
    for &x in eig {
        if x > thr {
            t.m_plus += 1;
        } else if x < -thr {
            t.m_minus += 1;
        } else {
            t.m_zero += 1;
        }
    }
    t
}

/// Inertia with zero band `|λ| < tol · max(1, max|λ|)`, re-evaluated at `tol/10` and
/// `tol·10`; a change is reported as unstable.
pub fn inertia(s: &Mat, tol: f64) -> Result<InertiaTriple> {
    if s.nrows() != s.ncols() {
        return Err(Error::Dimension(format!("inertia of a {}×{} matrix", s.nrows(), s.ncols())));
    }
    if s.nrows() == 0 {
        return Ok(InertiaTriple::default());
    }
    let asym = max_abs(&(s - s.transpose()));
    if asym > 1e-9 * (1.0 + max_abs(s)) {
        return Err(Error::Domain(format!("matrix is not symmetric (defect {asym:.2e})")));
    }
    let eig = sym_eigenvalues(s);
    let scale = eig.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let t = inertia_at(&eig, tol * scale);
    let lo = inertia_at(&eig, tol * scale / 10.0);
    let hi = inertia_at(&eig, tol * scale * 10.0);
    if t != lo || t != hi {
        return Err(Error::Unstable(format!("inertia changes inside the zero band: {lo:?}, {t:?}, {hi:?}")));
    }
    Ok(t)
}

/// `sgn M_ε(P)` for `0 < ±ε ≪ 1`: evaluated at every `ε` of `tol.sig_eps` with the
/// given sign, which must agree.
pub fn signature_small_eps(p: &SymplecticMatrix, sign: f64, tol: &Tolerances) -> Result<i64> {
    let mut vals = Vec::new();
    for &e in &tol.sig_eps {
        vals.push(inertia(&m_epsilon_raw(p.matrix(), sign * e), tol.inertia)?.signature());
    }
    if vals.iter().any(|&v| v != vals[0]) {
        return Err(Error::Unstable(format!("sgn M_ε depends on ε in the small-ε regime: {vals:?}")));
    }
    Ok(vals[0])
}

fn half(s: i64) -> Result<i64> {
    if s % 2 != 0 {
        return Err(Error::Unstable(format!("odd signature {s} of a symmetrization")));
    }
    Ok(s / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcavityReport {
    /// `i_L0 − i_L1`.
    pub concav: i64,
    /// `(i_L0 + ν_L0) − (i_L1 + ν_L1)`.
    pub concav_star: i64,
    /// `½ sgn M_ε(γ(τ))` for `0 < ε ≪ 1`.
    pub half_sgn_pos: i64,
    /// `½ sgn M_ε(γ(τ))` for `0 < −ε ≪ 1`.
    pub half_sgn_neg: i64,
}

/// Concavities from the `L`-indices and from the endpoint signature; the two must agree.
pub fn concavity(path: &SymplecticPath, tol: &Tolerances) -> Result<ConcavityReport> {
    let l0 = index_lagrangian(path, Lagrangian::L0, tol)?.pair;
    let l1 = index_lagrangian(path, Lagrangian::L1, tol)?.pair;
    let concav = l0.i - l1.i;
    let concav_star = (l0.i + l0.nu as i64) - (l1.i + l1.nu as i64);
    let p = path.endpoint();
    let half_sgn_pos = half(signature_small_eps(&p, 1.0, tol)?)?;
    let half_sgn_neg = half(signature_small_eps(&p, -1.0, tol)?)?;
    if concav != half_sgn_pos || concav_star != half_sgn_neg {
        return Err(Error::Unstable(format!(
            "concavity routes disagree: indices give ({concav}, {concav_star}), signatures give ({half_sgn_pos}, {half_sgn_neg})"
        )));
    }
    Ok(ConcavityReport { concav, concav_star, half_sgn_pos, half_sgn_neg })
}

/// Upper bounds for `½ sgn M_ε(P)` in terms of `q = max{m⁺(AᵀC), m⁺(BᵀD)}`, and
/// `ε`-independence of the signature when `B` and `C` are invertible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureBounds {
    pub q: usize,
    pub half_sgn_neg: i64,
    pub half_sgn_pos: i64,
    /// `k − q − ν_L1(P)`, bounding the `ε < 0` side.
    pub bound_neg: i64,
    /// `k − q − ν_L0(P)`, bounding the `ε > 0` side.
    pub bound_pos: i64,
    /// `Some(sgn M_ε = sgn M_0 for small |ε|)` when `B`, `C` are invertible.
    pub eps_independent: Option<bool>,
    pub holds: bool,
}

pub fn signature_bounds(p: &SymplecticMatrix, tol: &Tolerances) -> Result<SignatureBounds> {
    let k = p.dim_half();
    let (a, b, c, d) = p.blocks();
    let ac = inertia(&symmetrize(&(a.transpose() * &c)), tol.inertia)?;
    let bd = inertia(&symmetrize(&(b.transpose() * &d)), tol.inertia)?;
    let q = ac.m_plus.max(bd.m_plus);
    let half_sgn_neg = half(signature_small_eps(p, -1.0, tol)?)?;
    let half_sgn_pos = half(signature_small_eps(p, 1.0, tol)?)?;
    let nu0 = nu_lagrangian(p, Lagrangian::L0, tol.kernel) as i64;
    let nu1 = nu_lagrangian(p, Lagrangian::L1, tol.kernel) as i64;
    let bound_neg = k as i64 - q as i64 - nu1;
    let bound_pos = k as i64 - q as i64 - nu0;
    let eps_independent = if rank(&b, tol.rank) == k && rank(&c, tol.rank) == k {
        let (s0, others) = signatures_near_zero(p.matrix(), tol)?;
        Some(others.iter().all(|&s| s == s0))
    } else {
        None
    };
    let holds = half_sgn_neg <= bound_neg && half_sgn_pos <= bound_pos && eps_independent.unwrap_or(true);
    Ok(SignatureBounds { q, half_sgn_neg, half_sgn_pos, bound_neg, bound_pos, eps_independent, holds })
}

/// `sgn M_0(P)` and `sgn M_{±ε}(P)` for each `ε` of `tol.sig_eps`, shrunk below the
/// radius where an eigenvalue of `M_ε` could first reach 0.
fn signatures_near_zero(p: &Mat, tol: &Tolerances) -> Result<(i64, Vec<i64>)> {
    let m0 = m_epsilon_raw(p, 0.0);
    let s0 = inertia(&m0, tol.inertia)?.signature();
    // ‖dM_ε/dε‖ ≤ 2‖P‖² + 2
    let gap = sym_eigenvalues(&m0).iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
    let norm = singular_values(p).iter().fold(0.0f64, |a, &x| a.max(x));
    let radius = gap / (2.0 * norm * norm + 2.0);
    let mut out = Vec::new();
    for e in tol.sig_eps.map(|e| e.min(radius / 2.0)) {
        for sign in [1.0, -1.0] {
            out.push(inertia(&m_epsilon_raw(p, sign * e), tol.inertia)?.signature());
        }
    }
    Ok((s0, out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCancellation {
    /// `sgn A1 + sgn(A1 A3)`.
    pub sum: i64,
    pub holds: bool,
}

/// `sgn A1 + sgn(A1 A3)` for symmetric `A1`, symmetric `A1 A3` and `σ(A3) ⊂ (−∞, −margin)`.
pub fn sign_cancellation_check(a1: &Mat, a3: &Mat, spec_margin: f64, tol: &Tolerances) -> Result<SignCancellation> {
    let k = a1.nrows();
    if a1.ncols() != k || a3.shape() != (k, k) {
        return Err(Error::Dimension("A1 and A3 must be square of the same order".into()));
    }
    let sc = 1.0 + max_abs(a1);
    if max_abs(&(a1 - a1.transpose())) > 1e-9 * sc {
        return Err(Error::Precondition("A1 is not symmetric".into()));
    }
    let p = a1 * a3;
    if max_abs(&(&p - p.transpose())) > 1e-9 * (1.0 + max_abs(&p)) {
        return Err(Error::Precondition("A1·A3 is not symmetric".into()));
    }
    for z in eigenvalues_r(a3) {
        if z.im.abs() > 1e-8 * (1.0 + z.norm()) {
            return Err(Error::Precondition(format!("A3 has a non-real eigenvalue {z}")));
        }
        if z.re >= -spec_margin {
            return Err(Error::Precondition(format!("A3 has eigenvalue {} ≥ −{spec_margin}", z.re)));
        }
    }
    let sum = inertia(&symmetrize(a1), tol.inertia)?.signature() + inertia(&symmetrize(&p), tol.inertia)?.signature();
    Ok(SignCancellation { sum, holds: sum == 0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightBound {
    /// Half the elliptic height of `N R⁻¹ N R`.
    pub m: usize,
    /// `½ sgn M_ε(R)`, the same for every `ε` short of the first degeneracy of `M_ε`.
    pub half_sgn: i64,
    pub holds: bool,
    /// Largest relative gap between `det(λI − N R⁻¹ N R)` and `Π (λ² − (2 + 4uᵢ)λ + 1)`
    /// over the test points, `uᵢ` the eigenvalues of `A3`.
    pub charpoly_residual: f64,
}

fn det_c(m: &crate::linalg::CMat) -> Complex64 {
    m.clone().determinant()
}

/// `m − k ≤ ½ sgn M_ε(R) ≤ k − m` for `R = [[A1, I], [A3, A2]]` with invertible `A3`,
/// where `2m` is the elliptic height of `N R⁻¹ N R`.
pub fn elliptic_height_bound(r: &SymplecticMatrix, det_tol: f64, tol: &Tolerances) -> Result<HeightBound> {
    let k = r.dim_half();
    let (_, b, c, _) = r.blocks();
    if max_abs(&(&b - Mat::identity(k, k))) > 1e-9 {
        return Err(Error::Precondition("upper right block is not the identity".into()));
    }
    let det = c.determinant();
    if det.abs() <= det_tol {
        return Err(Error::Precondition(format!("A3 is near singular (det {det:.2e})")));
    }
    let nt = n_transform(r)?;
    let h = elliptic_height(&nt, tol);
    if h.ambiguous {
        return Err(Error::Unstable("an eigenvalue of N R⁻¹ N R sits in the unit-circle band".into()));
    }
    let m = h.value / 2;
    let (s0, others) = signatures_near_zero(r.matrix(), tol)?;
    if let Some(s) = others.iter().find(|&&s| s != s0) {
        return Err(Error::Unstable(format!("sgn M_ε(R) changes near ε = 0: {s0} vs {s}")));
    }
    let half_sgn = half(s0)?;
    let u = eigenvalues_r(&c);
    let ntc = crate::linalg::to_complex(nt.matrix());
    let id = crate::linalg::CMat::identity(2 * k, 2 * k);
    let mut residual = 0.0f64;
    for lam in [Complex64::new(0.3, 0.7), Complex64::new(1.7, 0.0), Complex64::new(0.0, -0.5), Complex64::new(-2.2, 1.1)] {
        let lhs = det_c(&(&id * lam - &ntc));
        let rhs = u.iter().fold(Complex64::new(1.0, 0.0), |acc, &ui| acc * (lam * lam - (2.0 + 4.0 * ui) * lam + 1.0));
        let scale = 1.0f64.max(lhs.norm()).max(rhs.norm());
        residual = residual.max((lhs - rhs).norm() / scale);
    }
    let (mi, ki) = (m as i64, k as i64);
    Ok(HeightBound { m, half_sgn, holds: mi - ki <= half_sgn && half_sgn <= ki - mi, charpoly_residual: residual })
}

/// `M_ε(P1 ⋄ P2) = M_ε(P1) ⋄ M_ε(P2)`, max-entry gap.
pub fn m_epsilon_diamond_gap(p1: &SymplecticMatrix, p2: &SymplecticMatrix, eps: f64) -> f64 {
    let lhs = m_epsilon_raw(&diamond_raw(p1.matrix(), p2.matrix()), eps);
    let rhs = diamond_raw(&m_epsilon_raw(p1.matrix(), eps), &m_epsilon_raw(p2.matrix(), eps));
    max_abs(&(lhs - rhs))
}

/// `m^±([[0, E1], [E1ᵀ, E2]]) ≥ rank E1`.
pub fn off_diagonal_rank_bound(e1: &Mat, e2: &Mat, tol: &Tolerances) -> Result<(InertiaTriple, usize, bool)> {
    let k = e1.nrows();
    let z = Mat::zeros(k, k);
    let e = from_blocks(&z, e1, &e1.transpose(), e2);
    let t = inertia(&e, tol.inertia)?;
    let r = rank(e1, tol.rank);
    Ok((t, r, t.m_plus >= r && t.m_minus >= r))
}

#[cfg(test)]
mod tests;
