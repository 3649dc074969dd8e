use serde::{Deserialize, Serialize};

use super::hamiltonian::{GaugeHamiltonian, Vector};
use super::integrator::{flow_to, flow_with_jacobian, gl2_step, integrate, linear_step_matrix};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_r, j_matrix, Mat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    /// Integration steps on the half period `[0, τ/2]`.
    pub steps_half: usize,
    pub max_iter: usize,
    pub bc_tol: f64,
    pub energy_tol: f64,
    /// Largest divisor tried when minimizing the period.
    pub max_divisor: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions { steps_half: 1024, max_iter: 60, bc_tol: 1e-10, energy_tol: 1e-9, max_divisor: 8 }
    }
}

/// Defects of a computed orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitResiduals {
    /// `|p(0)|`.
    pub bc_start: f64,
    /// `|p(τ/2)|`.
    pub bc_half: f64,
    /// `max |H(x(t)) − h|` over the samples.
    pub energy: f64,
    /// `max |x(τ − t) − N x(t)|`, reflected samples against direct integration.
    pub reflection: f64,
    /// `|x(τ) − x(0)|` by direct integration.
    pub periodicity: f64,
    /// Largest sample change when the step is halved.
    pub refinement: f64,
}

/// A brake orbit on `H⁻¹(h)` sampled on `[0, τ]` at `2·steps_half + 1` uniform times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrakeOrbit {
    pub period: f64,
    pub energy: f64,
    pub steps_half: usize,
    pub times: Vec<f64>,
    /// States `(p, q)`.
    pub samples: Vec<Vec<f64>>,
    pub residuals: OrbitResiduals,
    pub newton_iterations: usize,
    /// The Newton solution had period `divisor · τ`.
    pub period_divisor: usize,
}

impl BrakeOrbit {
    pub fn dim_half(&self) -> usize {
        self.samples[0].len() / 2
    }

    pub fn state(&self, i: usize) -> Vector {
        Vector::from_column_slice(&self.samples[i])
    }

    pub fn start(&self) -> Vector {
        self.state(0)
    }

    /// States on the half period `[0, τ/2]`.
    pub fn half_states(&self) -> Vec<Vector> {
        (0..=self.steps_half).map(|i| self.state(i)).collect()
    }

    /// The same orbit started at `x(τ/2)`.
    pub fn shifted_half(&self) -> BrakeOrbit {
        let n = self.steps_half;
        let m = 2 * n;
        let mut o = self.clone();
        o.samples = (0..=m).map(|k| self.samples[(k + n) % m].clone()).collect();
        o
    }

    /// `−x`, again a brake orbit when `H` is even.
    pub fn negated(&self) -> BrakeOrbit {
        let mut o = self.clone();
        for s in &mut o.samples {
            for v in s.iter_mut() {
                *v = -*v;
            }
        }
        o
    }
}

fn p_part(x: &Vector, n: usize) -> Vector {
    x.rows(0, n).into_owned()
}

fn embed_q(q: &Vector) -> Vector {
    let n = q.len();
    let mut x = Vector::zeros(2 * n);
    x.rows_mut(n, n).copy_from(q);
    x
}

/// Orthonormal basis of `d^⊥` (columns).
fn complement(d: &Vector) -> Mat {
    let n = d.len();
    let best = d.iamax();
    let mut cols = vec![d.clone()];
    for i in (0..n).filter(|&i| i != best) {
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        for c in &cols {
            let proj = c.dot(&v);
            v -= c * proj;
        }
        cols.push(v.normalize());
    }
    let mut m = Mat::zeros(n, n - 1);
    for (j, c) in cols[1..].iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Highest linear frequency of `J H''(x)`, the natural time scale at `x`.
fn frequency_scale(ham: &GaugeHamiltonian, x: &Vector) -> Result<f64> {
    let a = ham.vector_field_jacobian(x)?;
    let w = eigenvalues_r(&a).iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if !(w > 0.0) {
        return Err(Error::Domain("linearization has no oscillating direction".into()));
    }
    Ok(w)
}

/// First local minimum of `|p(t)|` after the start, a guess for `τ/2`.
pub fn half_period_guess(ham: &GaugeHamiltonian, x0: &Vector) -> Result<f64> {
    let n = ham.dim_half();
    let w = frequency_scale(ham, x0)?;
    let dt = 2.0 * std::f64::consts::PI / w / 128.0;
    let lin = match ham.linear_form() {
        Some(q) => Some(linear_step_matrix(&(j_matrix(n) * q * 2.0), dt)?),
        None => None,
    };
    let mut x = x0.clone();
    let mut prev = 0.0;
    let mut prev2 = 0.0;
    for k in 1..=128 * 64 {
        x = match &lin {
            Some(s) => s * x,
            None => gl2_step(ham, &x, dt, false)?.0,
        };
        let g = p_part(&x, n).norm_squared();
        if k >= 3 && prev < prev2 && prev <= g {
            return Ok((k - 1) as f64 * dt);
        }
        prev2 = prev;
        prev = g;
    }
    Err(Error::NonConvergence("no return towards L0 within 64 periods of the fastest oscillation".into()))
}

struct Converged {
    x0: Vector,
    half: f64,
    iterations: usize,
}

/// Newton on `(u, T) ↦ p(T)` with `q0` on the chart `normalize(d + E u)` of the
/// energy surface.
fn newton(ham: &GaugeHamiltonian, dir: &Vector, t_guess: f64, opts: &ShootOptions) -> Result<Converged> {
    let n = ham.dim_half();
    let mut d = dir.normalize();
    let mut t = t_guess;
    let t_min = t_guess / 16.0;
    let chart = |d: &Vector, e: &Mat, u: &Vector| -> Result<Vector> { ham.scale_to_energy(&embed_q(&(d + e * u).normalize())) };
    let mut last = f64::INFINITY;
    for it in 0..opts.max_iter {
        let e = complement(&d);
        let u0 = Vector::zeros(n - 1);
        let x0 = chart(&d, &e, &u0)?;
        let (xt, phi) = flow_with_jacobian(ham, &x0, t, opts.steps_half)?;
        let f = p_part(&xt, n);
        let res = f.amax();
        if res <= opts.bc_tol {
            return Ok(Converged { x0, half: t, iterations: it });
        }
        // columns: ∂/∂u_i via the chart, ∂/∂T via the vector field
        let mut jac = Mat::zeros(n, n);
        let dphi = phi.rows(0, n).into_owned();
        let hstep = 1e-7;
        for i in 0..n - 1 {
            let mut up = u0.clone();
            let mut um = u0.clone();
            up[i] = hstep;
            um[i] = -hstep;
            let dx = (chart(&d, &e, &up)? - chart(&d, &e, &um)?) / (2.0 * hstep);
            jac.set_column(i, &(&dphi * dx));
        }
        jac.set_column(n - 1, &p_part(&ham.vector_field(&xt)?, n));
        let step = crate::linalg::svd(&jac)
            .solve(&(-&f), 1e-14)
            .map_err(|e| Error::NonConvergence(format!("shooting Jacobian: {e}")))?;
        let mut du = step.rows(0, n - 1).into_owned();
        let mut dt = step[n - 1];
        let nu = du.norm();
        if nu > 0.5 {
            du *= 0.5 / nu;
            dt *= 0.5 / nu;
        }
        if dt.abs() > 0.25 * t {
            let s = 0.25 * t / dt.abs();
            du *= s;
            dt *= s;
        }
        // backtracking on the residual
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let dn = (&d + &e * (&du * lambda)).normalize();
            let tn = t + lambda * dt;
            if tn > t_min {
                let xn = ham.scale_to_energy(&embed_q(&dn))?;
                let rn = p_part(&flow_to(ham, &xn, tn, opts.steps_half)?, n).amax();
                if rn < res * (1.0 - 0.25 * lambda) || rn <= opts.bc_tol {
                    d = dn;
                    t = tn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence(format!("line search failed at residual {res:.3e} after {it} iterations")));
        }
        last = res;
    }
    Err(Error::NonConvergence(format!("residual {last:.3e} after {} iterations", opts.max_iter)))
}

fn build_orbit(ham: &GaugeHamiltonian, x0: &Vector, half: f64, iterations: usize, divisor: usize, opts: &ShootOptions) -> Result<BrakeOrbit> {
    let n = ham.dim_half();
    let steps = opts.steps_half;
    let flow = integrate(ham, x0, half, steps, false)?;
    let mut samples: Vec<Vector> = flow.states.clone();
    for k in steps + 1..=2 * steps {
        let mut y = flow.states[2 * steps - k].clone();
        for i in 0..n {
            y[i] = -y[i];
        }
        samples.push(y);
    }
    let direct = integrate(ham, &flow.states[steps], half, steps, false)?;
    let reflection = (0..=steps).map(|i| (&direct.states[i] - &samples[steps + i]).amax()).fold(0.0, f64::max);
    let periodicity = (&direct.states[steps] - x0).amax();
    let fine = integrate(ham, x0, half, 2 * steps, false)?;
    let refinement = (0..=steps).map(|i| (&fine.states[2 * i] - &flow.states[i]).amax()).fold(0.0, f64::max);
    let energy = samples.iter().map(|x| (ham.value(x) - ham.energy()).abs()).fold(0.0, f64::max);
    let residuals = OrbitResiduals {
        bc_start: p_part(x0, n).amax(),
        bc_half: p_part(&flow.states[steps], n).amax(),
        energy,
        reflection,
        periodicity,
        refinement,
    };
    let bc = opts.bc_tol;
    if residuals.bc_half > bc || residuals.energy > opts.energy_tol || reflection > 100.0 * bc || periodicity > 100.0 * bc || refinement > 10.0 * bc {
        return Err(Error::NonConvergence(format!("orbit fails its invariants: {residuals:?}")));
    }
    let period = 2.0 * half;
    let h = period / (2 * steps) as f64;
    let times = (0..=2 * steps).map(|k| if k == 2 * steps { period } else { h * k as f64 }).collect();
    Ok(BrakeOrbit {
        period,
        energy: ham.energy(),
        steps_half: steps,
        times,
        samples: samples.iter().map(|x| x.iter().copied().collect()).collect(),
        residuals,
        newton_iterations: iterations,
        period_divisor: divisor,
    })
}

/// Brake orbit through `(0, q0)` rescaled onto `H⁻¹(h)`, by Newton shooting from the
/// half-period guess `τ_guess/2`; the period is then reduced to the minimal one.
pub fn shoot_brake_orbit(ham: &GaugeHamiltonian, q0: &[f64], tau_guess: f64, opts: &ShootOptions) -> Result<BrakeOrbit> {
    let n = ham.dim_half();
    if q0.len() != n {
        return Err(Error::Dimension(format!("q0 has length {}, expected {n}", q0.len())));
    }
    let q = Vector::from_column_slice(q0);
    if q.norm() == 0.0 {
        return Err(Error::Domain("q0 must be nonzero".into()));
    }
    if !(tau_guess > 0.0) {
        return Err(Error::Domain(format!("period guess must be positive, got {tau_guess}")));
    }
    let c = newton(ham, &q, tau_guess / 2.0, opts)?;
    let tau = 2.0 * c.half;
    let scale = 1.0 + c.x0.amax();
    for d in (2..=opts.max_divisor).rev() {
        let xd = flow_to(ham, &c.x0, tau / d as f64, opts.steps_half)?;
        if (&xd - &c.x0).amax() < 1e-6 * scale {
            let qd = c.x0.rows(n, n).into_owned();
            if let Ok(cd) = newton(ham, &qd, c.half / d as f64, opts) {
                if (cd.half * d as f64 - c.half).abs() < 1e-6 * c.half {
                    return build_orbit(ham, &cd.x0, cd.half, c.iterations + cd.iterations, d, opts);
                }
            }
        }
    }
    build_orbit(ham, &c.x0, c.half, c.iterations, 1, opts)
}

/// Shooting with the half-period guess from the first return of `|p|` towards zero.
pub fn shoot_from_direction(ham: &GaugeHamiltonian, q0: &[f64], opts: &ShootOptions) -> Result<BrakeOrbit> {
    let x0 = ham.scale_to_energy(&embed_q(&Vector::from_column_slice(q0)))?;
    let half = half_period_guess(ham, &x0)?;
    shoot_brake_orbit(ham, q0, 2.0 * half, opts)
}
