//! Two-stage Gauss–Legendre collocation (order 4, symplectic) for `ẋ = J∇H(x)`.

use nalgebra::DVector;

use super::hamiltonian::{GaugeHamiltonian, Vector};
use crate::error::{Error, Result};
use crate::linalg::Mat;

const S3: f64 = 0.288_675_134_594_812_9; // √3/6
const A: [[f64; 2]; 2] = [[0.25, 0.25 - S3], [0.25 + S3, 0.25]];

/// States at `n_steps + 1` uniform times on `[0, t_end]`, with the flow derivative
/// `∂x(t_end)/∂x(0)` when requested.
#[derive(Debug, Clone)]
pub struct Flow {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    pub jacobian: Option<Mat>,
}

/// One step map of the scheme for `ẋ = Ax`: `S(h) = I + h(b₁K₁ + b₂K₂)` with
/// `[K₁; K₂] = (I − h(A_gl ⊗ A))⁻¹ [A; A]`.
pub fn linear_step_matrix(a: &Mat, h: f64) -> Result<Mat> {
    let d = a.nrows();
    let mut m = Mat::identity(2 * d, 2 * d);
    let mut rhs = Mat::zeros(2 * d, d);
    for i in 0..2 {
        for j in 0..2 {
            let blk = a * (-h * A[i][j]);
            let mut v = m.view_mut((i * d, j * d), (d, d));
            v += &blk;
        }
        rhs.view_mut((i * d, 0), (d, d)).copy_from(a);
    }
    let k = m.lu().solve(&rhs).ok_or_else(|| Error::Conditioning("singular collocation system".into()))?;
    let k1 = k.view((0, 0), (d, d));
    let k2 = k.view((d, 0), (d, d));
    Ok(Mat::identity(d, d) + (k1 + k2) * (0.5 * h))
}

fn pow_matrix(s: &Mat, mut e: usize) -> Mat {
    let mut acc = Mat::identity(s.nrows(), s.ncols());
    let mut base = s.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

/// One step from `x` with size `h`; returns the new state and, if asked, the step
/// derivative.
pub fn gl2_step(ham: &GaugeHamiltonian, x: &Vector, h: f64, want_jac: bool) -> Result<(Vector, Option<Mat>)> {
    let d = x.len();
    let f0 = ham.vector_field(x)?;
    // stage increments Z_i = Y_i − x, started from the explicit guess
    let mut z1 = &f0 * (h * (A[0][0] + A[0][1]));
    let mut z2 = &f0 * (h * (A[1][0] + A[1][1]));
    let mut converged = false;
    let mut dfs = (Mat::zeros(d, d), Mat::zeros(d, d));
    let mut lu = None;
    let scale = 1.0 + x.norm();
    let mut prev = f64::INFINITY;
    for _ in 0..20 {
        let y1 = x + &z1;
        let y2 = x + &z2;
        let g1 = ham.vector_field(&y1)?;
        let g2 = ham.vector_field(&y2)?;
        let r1 = &z1 - (&g1 * A[0][0] + &g2 * A[0][1]) * h;
        let r2 = &z2 - (&g1 * A[1][0] + &g2 * A[1][1]) * h;
        dfs = (ham.vector_field_jacobian(&y1)?, ham.vector_field_jacobian(&y2)?);
        let mut m = Mat::identity(2 * d, 2 * d);
        for i in 0..2 {
            for j in 0..2 {
                let df = if j == 0 { &dfs.0 } else { &dfs.1 };
                let mut v = m.view_mut((i * d, j * d), (d, d));
                v -= df * (h * A[i][j]);
            }
        }
        let mut r = DVector::zeros(2 * d);
        r.rows_mut(0, d).copy_from(&r1);
        r.rows_mut(d, d).copy_from(&r2);
        let fac = m.lu();
        let dz = fac.solve(&r).ok_or_else(|| Error::Conditioning("singular collocation system".into()))?;
        z1 -= dz.rows(0, d);
        z2 -= dz.rows(d, d);
        lu = Some(fac);
        // stagnation at the noise level of the vector field also counts as converged
        let size = dz.amax();
        if size <= 1e-15 * scale || (size <= 1e-11 * scale && size >= 0.5 * prev) {
            converged = true;
            break;
        }
        prev = size;
    }
    if !converged {
        return Err(Error::NonConvergence(format!("collocation equations did not converge at step size {h:.3e}")));
    }
    let y1 = x + &z1;
    let y2 = x + &z2;
    let g1 = ham.vector_field(&y1)?;
    let g2 = ham.vector_field(&y2)?;
    let xn = x + (g1 + g2) * (0.5 * h);
    if !want_jac {
        return Ok((xn, None));
    }
    // dZ/dx from the linearized stage equations
    let mut rhs = Mat::zeros(2 * d, d);
    for i in 0..2 {
        let blk = &dfs.0 * (h * A[i][0]) + &dfs.1 * (h * A[i][1]);
        rhs.view_mut((i * d, 0), (d, d)).copy_from(&blk);
    }
    let dz = lu.unwrap().solve(&rhs).ok_or_else(|| Error::Conditioning("singular collocation system".into()))?;
    let i = Mat::identity(d, d);
    let dy1 = &i + dz.view((0, 0), (d, d));
    let dy2 = &i + dz.view((d, 0), (d, d));
    let jac = &i + (&dfs.0 * dy1 + &dfs.1 * dy2) * (0.5 * h);
    Ok((xn, Some(jac)))
}

/// Integrates `ẋ = J∇H(x)` from `x0` over `[0, t_end]` in `n_steps` equal steps.
pub fn integrate(ham: &GaugeHamiltonian, x0: &Vector, t_end: f64, n_steps: usize, want_jac: bool) -> Result<Flow> {
    if n_steps == 0 || !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Domain(format!("invalid integration span {t_end} with {n_steps} steps")));
    }
    let h = t_end / n_steps as f64;
    let times: Vec<f64> = (0..=n_steps).map(|i| if i == n_steps { t_end } else { h * i as f64 }).collect();
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(x0.clone());
    if let Some(q) = ham.linear_form() {
        let a = crate::linalg::j_matrix(ham.dim_half()) * q * 2.0;
        let s = linear_step_matrix(&a, h)?;
        let mut x = x0.clone();
        for _ in 0..n_steps {
            x = &s * x;
            states.push(x.clone());
        }
        let jacobian = want_jac.then(|| pow_matrix(&s, n_steps));
        return Ok(Flow { times, states, jacobian });
    }
    let d = x0.len();
    let mut jac = want_jac.then(|| Mat::identity(d, d));
    let mut x = x0.clone();
    for _ in 0..n_steps {
        let (xn, sj) = gl2_step(ham, &x, h, want_jac)?;
        if let (Some(j), Some(sj)) = (jac.as_mut(), sj) {
            *j = sj * &*j;
        }
        x = xn;
        states.push(x.clone());
    }
    Ok(Flow { times, states, jacobian: jac })
}

/// Final state only; the linear case uses the step-matrix power.
pub fn flow_to(ham: &GaugeHamiltonian, x0: &Vector, t_end: f64, n_steps: usize) -> Result<Vector> {
    if let Some(q) = ham.linear_form() {
        let a = crate::linalg::j_matrix(ham.dim_half()) * q * 2.0;
        let s = linear_step_matrix(&a, t_end / n_steps as f64)?;
        return Ok(pow_matrix(&s, n_steps) * x0);
    }
    Ok(integrate(ham, x0, t_end, n_steps, false)?.states.pop().unwrap())
}

/// `(x(T), ∂x(T)/∂x(0))`.
pub fn flow_with_jacobian(ham: &GaugeHamiltonian, x0: &Vector, t_end: f64, n_steps: usize) -> Result<(Vector, Mat)> {
    if let Some(q) = ham.linear_form() {
        let a = crate::linalg::j_matrix(ham.dim_half()) * q * 2.0;
        let s = linear_step_matrix(&a, t_end / n_steps as f64)?;
        let p = pow_matrix(&s, n_steps);
        return Ok((&p * x0, p));
    }
    let mut f = integrate(ham, x0, t_end, n_steps, true)?;
    Ok((f.states.pop().unwrap(), f.jacobian.unwrap()))
}

/// `x(t)` for `t` between stored states, by one step from the preceding state.
pub fn interpolate(ham: &GaugeHamiltonian, times: &[f64], states: &[Vector], t: f64) -> Result<Vector> {
    let n = times.len() - 1;
    let t = t.clamp(times[0], times[n]);
    let h = times[1] - times[0];
    let mut i = (((t - times[0]) / h).floor() as usize).min(n);
    if times[i] > t && i > 0 {
        i -= 1;
    }
    let dt = t - times[i];
    if dt <= 0.0 {
        return Ok(states[i].clone());
    }
    Ok(gl2_step(ham, &states[i], dt, false)?.0)
}
