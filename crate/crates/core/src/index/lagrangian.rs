use super::flow::{passes, phase_change, relative_angles, Reference, ORIENTATION};
use super::omega::check_start;
use super::{Flavor, IndexPair, IndexReport, RouteValue};
use crate::error::{Error, Result};
use crate::linalg::{blocks, max_abs, singular_values, sym_eigenvalues, Mat};
use crate::path::SymplecticPath;
use crate::symplectic::{nu_lagrangian, Lagrangian};
use crate::tol::Tolerances;

fn reference(j: Lagrangian) -> Reference {
    match j {
        Lagrangian::L0 => Reference::V1,
        Lagrangian::L1 => Reference::V2,
    }
}

/// Crossings of `Gr(γ)` with `L_j × L_j`, start counted with `m⁺`, end with `−m⁻`, minus `n`.
pub(crate) fn route_flow(path: &SymplecticPath, j: Lagrangian, tol: &Tolerances) -> Result<i64> {
    let k = path.dim_half();
    let r = reference(j);
    let dg = phase_change(path, tol.max_phase_step)?;
    let start = relative_angles(&Mat::identity(2 * k, 2 * k), r)?;
    let end = relative_angles(path.end(), r)?;
    let d = tol.flow_shift;
    let mut vals = Vec::new();
    for s in [d, d / 10.0, d * 10.0] {
        let n = passes(dg, &start, &end, ORIENTATION * s)?;
        vals.push((ORIENTATION * n as f64) as i64 - k as i64);
    }
    if vals.iter().any(|&v| v != vals[0]) {
        return Err(Error::Unstable(format!("L-index changes with the angular shift: {vals:?}")));
    }
    Ok(vals[0])
}

/// Block of the path matrix whose kernel is `γ(t)L_j ∩ L_j`.
fn degeneracy_block(m: &Mat, j: Lagrangian) -> Mat {
    let (_, b, c, _) = blocks(m);
    match j {
        Lagrangian::L0 => b,
        Lagrangian::L1 => c,
    }
}

/// Block of the generator that must be positive definite for the interior-count route.
fn generator_block(b: &Mat, j: Lagrangian) -> Mat {
    let (b11, _, _, b22) = blocks(b);
    match j {
        Lagrangian::L0 => b22,
        Lagrangian::L1 => b11,
    }
}

/// True when the relevant diagonal block of the generator is positive definite at
/// every grid time and midpoint.
pub fn definite_generator(path: &SymplecticPath, j: Lagrangian) -> bool {
    let Some(g) = path.generator() else { return false };
    let times = path.times();
    let mut ts: Vec<f64> = times.to_vec();
    ts.extend(times.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    ts.iter().all(|&t| {
        let blk = generator_block(&g(t), j);
        sym_eigenvalues(&blk).first().copied().unwrap_or(0.0) > 1e-12
    })
}

fn smallest_sv(m: &Mat) -> f64 {
    singular_values(m).iter().fold(f64::INFINITY, |a, &x| a.min(x))
}

/// Golden-section minimum of `f` on `[a, b]`, to width `w`.
fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, w: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > w {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// `Σ_{0<t<τ} ν_{L_j}(γ(t))`. The smallest singular value `f` of the degeneracy
/// block moves no faster than `‖γ'‖ = ‖J B γ‖`, so a cell `[a, b]` with
/// `f(a) + f(b) > L·(b − a)` holds no crossing; other cells are bisected down to a
/// width where the minimum is refined by golden-section search.
pub fn interior_degeneracy_sum(path: &SymplecticPath, j: Lagrangian, tol: &Tolerances) -> Result<usize> {
    let gen = path.generator().ok_or_else(|| Error::Precondition("interior count needs the generator".into()))?;
    let times = path.times();
    let samples = path.samples();
    let tau = path.tau();
    let f = |t: f64| smallest_sv(&degeneracy_block(&path.eval(t), j));
    let norm2 = |m: &Mat| singular_values(m).iter().fold(0.0f64, |a, &x| a.max(x));
    let speed = |t: f64, m: &Mat| norm2(&gen(t)) * norm2(m);
    let leaf = 1e-5 * tau;
    let edge = 1e-7 * tau;
    let mut crossings: Vec<f64> = Vec::new();
    let mut total = 0usize;
    for i in 0..times.len() - 1 {
        let (a0, b0) = (times[i], times[i + 1]);
        let bound = 1.25 * speed(a0, &samples[i]).max(speed(b0, &samples[i + 1]));
        let mut stack = vec![(a0, b0, f(a0), f(b0))];
        while let Some((a, b, fa, fb)) = stack.pop() {
            if fa + fb > bound * (b - a) {
                continue;
            }
            if b - a > leaf {
                let c = 0.5 * (a + b);
                let fc = f(c);
                stack.push((c, b, fc, fb));
                stack.push((a, c, fa, fc));
                continue;
            }
            // widened so that a crossing on the cell boundary is an interior minimum
            let t = golden_min(&f, (a - leaf).max(0.0), (b + leaf).min(tau), 1e-13 * tau);
            if t < edge || t > tau - edge {
                continue;
            }
            let mt = path.eval(t);
            let scale = 1.0f64.max(max_abs(&mt));
            if f(t) > 1e-7 * scale || crossings.iter().any(|&c| (c - t).abs() < 2.0 * leaf) {
                continue;
            }
            crossings.push(t);
            let sv = singular_values(&degeneracy_block(&mt, j));
            total += sv.iter().filter(|&&x| x < 1e-5 * scale).count();
        }
    }
    let _ = tol;
    Ok(total)
}

/// `(i_{L_j}(γ), ν_{L_j}(γ))`. With a generator whose relevant diagonal block is
/// positive definite, the interior degeneracy count is computed as a second route.
pub fn index_lagrangian(path: &SymplecticPath, j: Lagrangian, tol: &Tolerances) -> Result<IndexReport> {
    check_start(path)?;
    let nu = nu_lagrangian(&path.endpoint(), j, tol.kernel);
    let lo = nu_lagrangian(&path.endpoint(), j, tol.kernel / 10.0);
    let hi = nu_lagrangian(&path.endpoint(), j, tol.kernel * 10.0);
    if nu != lo || nu != hi {
        return Err(Error::Unstable(format!("ν_L changes with kernel tolerance: {lo}, {nu}, {hi}")));
    }
    let i = route_flow(path, j, tol)?;
    let mut routes = vec![RouteValue::new("flow", i)];
    if definite_generator(path, j) {
        let v = interior_degeneracy_sum(path, j, tol)? as i64;
        routes.push(RouteValue::new("interior_count", v));
        if v != i {
            return Err(Error::Unstable(format!("L-index routes disagree: flow {i}, interior count {v}")));
        }
    }
    let flavor = match j {
        Lagrangian::L0 => Flavor::L0,
        Lagrangian::L1 => Flavor::L1,
    };
    Ok(IndexReport { pair: IndexPair { i, nu, flavor }, routes, perturbation_eps: vec![] })
}
