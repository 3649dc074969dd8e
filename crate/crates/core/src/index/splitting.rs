use std::sync::Arc;

use nalgebra::Schur;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::omega::{endpoint_degenerate, index_omega, route_joint, route_shift};
use crate::error::{Error, Result};
use crate::linalg::{diamond_all, max_abs, symmetrize, CMat, Mat};
use crate::path::{joint_path, MatFn, SymplecticPath};
use crate::symplectic::{nu_omega, unit_clusters, NormalForm, SymplecticMatrix};
use crate::tol::Tolerances;

/// `(S⁺_M(ω), S⁻_M(ω))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingPair {
    pub omega_re: f64,
    pub omega_im: f64,
    pub s_plus: usize,
    pub s_minus: usize,
}

/// Index at an `ω` where the endpoint is regular but possibly close to degenerate.
fn index_regular(path: &SymplecticPath, omega: Complex64, tol: &Tolerances) -> Result<i64> {
    let v = route_joint(path, omega, tol)?;
    if let Some(w) = route_shift(path, omega, false, tol)? {
        if w != v {
            return Err(Error::Unstable(format!("ω-index routes disagree at ω = {omega}: {v} vs {w}")));
        }
    }
    Ok(v)
}

/// `S^±_M(ω) = lim_{ε→0⁺} i_{ω e^{±iε}}(γ) − i_ω(γ)` along the witness `γ` with `γ(τ) = M`.
pub fn splitting_numbers(m: &SymplecticMatrix, omega: Complex64, witness: &SymplecticPath, tol: &Tolerances) -> Result<SplittingPair> {
    let gap = max_abs(&(witness.end() - m.matrix()));
    if gap > 1e-8 * (1.0 + max_abs(m.matrix())) {
        return Err(Error::JoinMismatch(gap));
    }
    let nu = nu_omega(m, omega, tol.kernel);
    let i0 = index_omega(witness, omega, tol)?.pair.i;
    // i_ω is constant on arcs free of unit eigenvalues, so every offset below the gap
    // to the rest of the spectrum gives the limit; long Jordan chains at ω need the
    // larger ones to keep the endpoint away from degenerate.
    let gap = unit_clusters(m, tol)
        .iter()
        .map(|c| (c.center() - omega).norm())
        .filter(|&d| d > 10.0 * tol.cluster)
        .fold(f64::INFINITY, f64::min);
    let mut offsets: Vec<f64> = tol.split_eps.iter().copied().filter(|&e| e < 0.5 * gap).collect();
    offsets.sort_by(|a, b| b.total_cmp(a));
    offsets.dedup();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for eps in offsets {
        let (wp, wm) = (omega * Complex64::from_polar(1.0, eps), omega * Complex64::from_polar(1.0, -eps));
        if endpoint_degenerate(witness.end(), wp)? || endpoint_degenerate(witness.end(), wm)? {
            continue;
        }
        plus.push(index_regular(witness, wp, tol)? - i0);
        minus.push(index_regular(witness, wm, tol)? - i0);
    }
    let l = plus.len();
    if l < 2 || plus.iter().any(|&v| v != plus[0]) || minus.iter().any(|&v| v != minus[0]) {
        return Err(Error::Unstable(format!("splitting limit does not settle: S⁺ {plus:?}, S⁻ {minus:?}")));
    }
    let (sp, sm) = (plus[l - 1], minus[l - 1]);
    if sp < 0 || sm < 0 || sp as usize > nu || sm as usize > nu {
        return Err(Error::Unstable(format!("splitting numbers ({sp}, {sm}) outside [0, ν = {nu}]")));
    }
    Ok(SplittingPair { omega_re: omega.re, omega_im: omega.im, s_plus: sp as usize, s_minus: sm as usize })
}

struct PolarParts {
    /// Eigenvectors and eigenvalues of the positive factor squared.
    sv: Mat,
    sl: Vec<f64>,
    /// Unitary form `U = X + iY` of the orthogonal factor, diagonalized.
    uq: CMat,
    uphi: Vec<f64>,
    k: usize,
}

impl PolarParts {
    fn new(gram: &Mat, m_orth: impl FnOnce(&Mat) -> Mat, k: usize) -> Result<Self> {
        let eig = symmetrize(gram).symmetric_eigen();
        let sv = eig.eigenvectors.clone();
        let sl: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        if sl.iter().any(|&x| x <= 0.0) {
            return Err(Error::Conditioning("singular matrix in polar decomposition".into()));
        }
        let s_inv = &sv * Mat::from_diagonal(&nalgebra::DVector::from_iterator(sl.len(), sl.iter().map(|x| x.powf(-0.5)))) * sv.transpose();
        let q = m_orth(&s_inv);
        let u = CMat::from_fn(k, k, |i, j| Complex64::new(q[(i, j)], q[(k + i, j)]));
        let schur = Schur::try_new(u.clone(), f64::EPSILON, 400 * k.max(1))
            .ok_or_else(|| Error::NonConvergence("Schur form of the unitary factor".into()))?;
        let (uq, t) = schur.unpack();
        let uphi: Vec<f64> = (0..k).map(|i| t[(i, i)].arg()).collect();
        let diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(k, (0..k).map(|i| t[(i, i)])));
        let rebuilt = &uq * diag * uq.adjoint();
        let err = (rebuilt - u).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if err > 1e-9 {
            return Err(Error::Conditioning(format!("orthogonal factor not diagonalized (residual {err:.2e})")));
        }
        Ok(PolarParts { sv, sl, uq, uphi, k })
    }

    fn positive_pow(&self, s: f64) -> Mat {
        let d = nalgebra::DVector::from_iterator(self.sl.len(), self.sl.iter().map(|x| x.powf(0.5 * s)));
        &self.sv * Mat::from_diagonal(&d) * self.sv.transpose()
    }

    fn orthogonal_pow(&self, s: f64) -> Mat {
        let k = self.k;
        let d = nalgebra::DVector::from_iterator(k, self.uphi.iter().map(|&p| Complex64::from_polar(1.0, s * p)));
        let us = &self.uq * CMat::from_diagonal(&d) * self.uq.adjoint();
        let mut q = Mat::zeros(2 * k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                q[(i, j)] = us[(i, j)].re;
                q[(i, k + j)] = -us[(i, j)].im;
                q[(k + i, j)] = us[(i, j)].im;
                q[(k + i, k + j)] = us[(i, j)].re;
            }
        }
        q
    }
}

/// A path from `I` to `M`: `γ(t) = O^{t/τ} P^{t/τ}` for the polar factors `M = OP`,
/// with `O` orthogonal symplectic and `P` positive symplectic.
pub fn polar_witness(m: &SymplecticMatrix, tau: f64, n_samples: usize) -> Result<SymplecticPath> {
    let k = m.dim_half();
    let mm = m.matrix().clone();
    let gram = mm.transpose() * &mm;
    let parts = Arc::new(PolarParts::new(&gram, |s_inv| &mm * s_inv, k)?);
    let f: MatFn = Arc::new(move |t: f64| {
        let s = (t / tau).clamp(0.0, 1.0);
        parts.orthogonal_pow(s) * parts.positive_pow(s)
    });
    let p = SymplecticPath::from_fn(k, tau, n_samples, f)?;
    if max_abs(&(p.end() - m.matrix())) > 1e-9 * (1.0 + max_abs(m.matrix())) {
        return Err(Error::Conditioning("polar witness misses its endpoint".into()));
    }
    Ok(p)
}

/// A different path to `M`: a full turn `R(2πt)^{⋄k}` followed by `P'^{s} O^{s}` for
/// the left polar factors `M = P'O`.
pub fn loop_witness(m: &SymplecticMatrix, tau: f64, n_samples: usize) -> Result<SymplecticPath> {
    let k = m.dim_half();
    let mm = m.matrix().clone();
    let gram = &mm * mm.transpose();
    let parts = Arc::new(PolarParts::new(&gram, |s_inv| s_inv * &mm, k)?);
    let f: MatFn = Arc::new(move |t: f64| {
        let s = (t / tau).clamp(0.0, 1.0);
        parts.positive_pow(s) * parts.orthogonal_pow(s)
    });
    let second = SymplecticPath::from_fn(k, tau, n_samples, f)?;
    let turn = SymplecticPath::rotation(k, 2.0 * std::f64::consts::PI, n_samples)?;
    let turn = SymplecticPath::from_fn(k, tau, n_samples, {
        let e = turn.evaluator();
        Arc::new(move |t: f64| e(2.0 * std::f64::consts::PI * t / tau))
    })?;
    joint_path(&turn, &second, 1e-10)
}

/// Splitting numbers along the polar witness of `M`.
pub fn splitting_numbers_auto(m: &SymplecticMatrix, omega: Complex64, tol: &Tolerances) -> Result<SplittingPair> {
    let w = polar_witness(m, 1.0, 256)?;
    splitting_numbers(m, omega, &w, tol)
}

/// Table values summed over the factors of a ⋄-product of basic normal forms.
pub fn splitting_from_table(factors: &[NormalForm], omega: Complex64) -> Result<(usize, usize)> {
    let mut arg = omega.arg();
    if arg < 0.0 {
        arg += 2.0 * std::f64::consts::PI;
    }
    let mut s = (0, 0);
    for f in factors {
        let (a, b) = f.splitting_table(arg)?;
        s.0 += a;
        s.1 += b;
    }
    Ok(s)
}

/// Table values for a recognized ⋄-product, confirmed by the limit route.
pub fn splitting_table_checked(factors: &[NormalForm], omega: Complex64, tol: &Tolerances) -> Result<SplittingPair> {
    let mats: Vec<Mat> = factors.iter().map(|f| f.matrix().map(|m| m.into_matrix())).collect::<Result<_>>()?;
    let m = SymplecticMatrix::from_trusted(diamond_all(&mats));
    let table = splitting_from_table(factors, omega)?;
    let limit = splitting_numbers_auto(&m, omega, tol)?;
    if (limit.s_plus, limit.s_minus) != table {
        return Err(Error::Unstable(format!(
            "splitting table {table:?} disagrees with limit ({}, {})",
            limit.s_plus, limit.s_minus
        )));
    }
    Ok(limit)
}
