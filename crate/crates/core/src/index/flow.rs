//! Eigenvalue flow of a Lagrangian path against a fixed reference.
//!
//! `Gr(γ(t))` and the reference `V` live in `R^{2n} ⊕ R^{2n}` with the form
//! `(−J) ⊕ J`. After `(x, y) ↦ (Nx, y)` the form is standard, a Lagrangian with
//! frame `[X; Y]` maps to the unitary `W = (X + iY)(X − iY)⁻¹`, and
//! `dim(L ∩ V) = dim ker(W_V* W − I)`. Crossings with `V` are passes of the
//! eigenvalues of `W_V* W(t)` through `1`. Only the endpoints need eigenvalues:
//! the number of counter-clockwise passes through the angle `a` is
//! `(ΔΦ − ΔP_a)/2π`, where `Φ = arg det W` is tracked continuously and `P_a` is
//! the sum of eigenvalue angles taken in `[a, a + 2π)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{angle_from, blocks, eigenvalues_c, wrap, CMat, Mat};
use crate::path::SymplecticPath;

/// Reference Lagrangians in `R^{2n} ⊕ R^{2n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// `Gr(ωI)` (complex for `ω ∉ R`).
    Graph(Complex64),
    /// `V1 = L0 × L0`.
    V1,
    /// `V2 = L1 × L1`.
    V2,
}

/// Sign relating positive crossing forms to the direction of the eigenvalue motion
/// of `W_V* W`; fixed by the rotation path `R(t)`, `t ∈ [0, π]`, having `i_1 = 1`.
pub(crate) const ORIENTATION: f64 = 1.0;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `(X, Y)` frame of `Gr(M)` in the standard coordinates.
fn graph_frame(m: &Mat) -> (CMat, CMat) {
    let k = m.nrows() / 2;
    let (a, b, cc, d) = blocks(m);
    let mut x = CMat::zeros(2 * k, 2 * k);
    let mut y = CMat::zeros(2 * k, 2 * k);
    for i in 0..k {
        x[(i, i)] = c(-1.0);
        y[(i, k + i)] = c(1.0);
        for j in 0..k {
            x[(k + i, j)] = c(a[(i, j)]);
            x[(k + i, k + j)] = c(b[(i, j)]);
            y[(k + i, j)] = c(cc[(i, j)]);
            y[(k + i, k + j)] = c(d[(i, j)]);
        }
    }
    (x, y)
}

fn reference_frame(r: Reference, k: usize) -> (CMat, CMat) {
    let n2 = 2 * k;
    match r {
        Reference::V1 => (CMat::zeros(n2, n2), CMat::identity(n2, n2)),
        Reference::V2 => (CMat::identity(n2, n2), CMat::zeros(n2, n2)),
        Reference::Graph(w) => {
            let mut x = CMat::zeros(n2, n2);
            let mut y = CMat::zeros(n2, n2);
            for i in 0..k {
                x[(i, i)] = c(-1.0);
                x[(k + i, i)] = w;
                y[(i, k + i)] = c(1.0);
                y[(k + i, k + i)] = w;
            }
            (x, y)
        }
    }
}

fn unitary(x: &CMat, y: &CMat) -> Result<CMat> {
    let i = Complex64::new(0.0, 1.0);
    let plus = x + y * i;
    let minus = x - y * i;
    let inv = minus.try_inverse().ok_or_else(|| Error::Conditioning("Lagrangian frame is degenerate".into()))?;
    Ok(plus * inv)
}

/// Eigenvalue angles (in `(−π, π]`) of `W_V* W(Gr M)`.
pub fn relative_angles(m: &Mat, r: Reference) -> Result<Vec<f64>> {
    let k = m.nrows() / 2;
    let (x, y) = graph_frame(m);
    let w = unitary(&x, &y)?;
    let (xv, yv) = reference_frame(r, k);
    let wv = unitary(&xv, &yv)?;
    let rel = wv.adjoint() * w;
    Ok(eigenvalues_c(&rel).into_iter().map(|z| z.arg()).collect())
}

/// `arg det((B − C) + i(A + D))`, half the phase of `det W` up to a constant.
fn half_phase(m: &Mat) -> f64 {
    let (a, b, cc, d) = blocks(m);
    let z = CMat::from_fn(a.nrows(), a.ncols(), |i, j| Complex64::new(b[(i, j)] - cc[(i, j)], a[(i, j)] + d[(i, j)]));
    z.determinant().arg()
}

/// Unwrapped change of `arg det W` along the path, refined through `eval` wherever a
/// step exceeds `max_step`, and repeated on every other sample as a grid check.
pub fn phase_change(path: &SymplecticPath, max_step: f64) -> Result<f64> {
    let full = phase_change_on(path, max_step)?;
    if path.times().len() > 4 {
        let coarse = phase_change_on(&path.coarsened(), max_step)?;
        if (full - coarse).abs() > 1e-6 {
            return Err(Error::Unstable(format!("phase change differs between grids: {full:.9} vs {coarse:.9}")));
        }
    }
    Ok(full)
}

fn phase_change_on(path: &SymplecticPath, max_step: f64) -> Result<f64> {
    let times = path.times();
    let samples = path.samples();
    let mut total = 0.0;
    let mut prev = 2.0 * half_phase(&samples[0]);
    for i in 1..times.len() {
        let cur = 2.0 * half_phase(&samples[i]);
        let d = wrap(cur - prev);
        if d.abs() < max_step {
            total += d;
        } else {
            total += refine(path, times[i - 1], prev, times[i], cur, max_step, 0)?;
        }
        prev = cur;
    }
    Ok(total)
}

fn refine(path: &SymplecticPath, t0: f64, p0: f64, t1: f64, p1: f64, max_step: f64, depth: usize) -> Result<f64> {
    let d = wrap(p1 - p0);
    if d.abs() < max_step {
        return Ok(d);
    }
    if depth > 40 || t1 - t0 < 1e-14 * path.tau() {
        return Err(Error::Unstable(format!("phase jump not resolved on [{t0:.6e}, {t1:.6e}]")));
    }
    let tm = 0.5 * (t0 + t1);
    let pm = 2.0 * half_phase(&path.eval(tm));
    Ok(refine(path, t0, p0, tm, pm, max_step, depth + 1)? + refine(path, tm, pm, t1, p1, max_step, depth + 1)?)
}

/// Net counter-clockwise passes through the angle `a` of the eigenvalues of
/// `W_V* W` between the start and end matrices, given the phase change between them.
pub fn passes(delta_phase: f64, start_angles: &[f64], end_angles: &[f64], a: f64) -> Result<i64> {
    let p0: f64 = start_angles.iter().map(|&t| angle_from(Complex64::from_polar(1.0, t), a)).sum();
    let p1: f64 = end_angles.iter().map(|&t| angle_from(Complex64::from_polar(1.0, t), a)).sum();
    let x = (delta_phase - (p1 - p0)) / TWO_PI;
    let r = x.round();
    if (x - r).abs() > 1e-6 {
        return Err(Error::Unstable(format!("pass count {x:.9} is not an integer")));
    }
    Ok(r as i64)
}

/// Smallest distance of any eigenvalue angle to `0`.
pub fn min_abs_angle(angles: &[f64]) -> f64 {
    angles.iter().map(|t| t.abs()).fold(f64::INFINITY, f64::min)
}
