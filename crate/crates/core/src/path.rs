//! Discretized symplectic paths with an exact evaluator behind the samples.

pub mod json;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{diamond_all, j_matrix, max_abs, n_matrix, Mat};
use crate::symplectic::{n_transform, symplectic_defect, SymplecticMatrix};

/// `t ↦ matrix`, shared between threads.
pub type MatFn = Arc<dyn Fn(f64) -> Mat + Send + Sync>;

/// A continuous path `[0, τ] → Sp(2k)` given by an evaluator, cached on a grid.
///
/// Index computations read the grid and call `eval` whenever they need a finer
/// resolution, so `eval` must agree with the cached samples.
#[derive(Clone)]
pub struct SymplecticPath {
    k: usize,
    tau: f64,
    times: Arc<Vec<f64>>,
    samples: Arc<Vec<Mat>>,
    eval: MatFn,
    generator: Option<MatFn>,
}

impl std::fmt::Debug for SymplecticPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymplecticPath")
            .field("k", &self.k)
            .field("tau", &self.tau)
            .field("samples", &self.samples.len())
            .field("generator", &self.generator.is_some())
            .finish()
    }
}

fn uniform_times(tau: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { tau } else { tau * i as f64 / n as f64 }).collect()
}

/// One fourth-order Magnus step of `γ' = JB(t)γ` from `t` to `t + h`.
fn magnus_step(b: &(dyn Fn(f64) -> Mat + Send + Sync), j: &Mat, t: f64, h: f64) -> Mat {
    let c = 3f64.sqrt() / 6.0;
    let a1 = j * b(t + (0.5 - c) * h);
    let a2 = j * b(t + (0.5 + c) * h);
    let comm = &a2 * &a1 - &a1 * &a2;
    let omega = (&a1 + &a2) * (0.5 * h) + comm * (3f64.sqrt() / 12.0 * h * h);
    omega.exp()
}

impl SymplecticPath {
    /// Path from a closed-form evaluator, sampled at `n_samples + 1` uniform times.
    pub fn from_fn(k: usize, tau: f64, n_samples: usize, f: MatFn) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Domain(format!("time span must be positive, got {tau}")));
        }
        let n = n_samples.max(1);
        let times = uniform_times(tau, n);
        let samples: Vec<Mat> = times.iter().map(|&t| f(t)).collect();
        if samples[0].nrows() != 2 * k || samples[0].ncols() != 2 * k {
            return Err(Error::Dimension(format!("evaluator returns {}x{}, expected {}x{}", samples[0].nrows(), samples[0].ncols(), 2 * k, 2 * k)));
        }
        Ok(SymplecticPath { k, tau, times: Arc::new(times), samples: Arc::new(samples), eval: f, generator: None })
    }

    /// Fundamental solution of `γ' = JB(t)γ`, `γ(0) = I`, by fourth-order Magnus steps.
    ///
    /// Each step is the exponential of a Hamiltonian matrix, so the samples stay in
    /// `Sp(2k)` to rounding; `eval(t)` takes one Magnus step from the preceding sample.
    pub fn fundamental_solution(b: MatFn, k: usize, tau: f64, n_steps: usize) -> Result<Self> {
        if n_steps < 64 {
            return Err(Error::Domain(format!("n_steps must be at least 64, got {n_steps}")));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Domain(format!("time span must be positive, got {tau}")));
        }
        let b0 = b(0.0);
        if b0.nrows() != 2 * k || b0.ncols() != 2 * k {
            return Err(Error::Dimension(format!("generator is {}x{}, expected {}x{}", b0.nrows(), b0.ncols(), 2 * k, 2 * k)));
        }
        if max_abs(&(&b0 - b0.transpose())) > 1e-12 * (1.0 + max_abs(&b0)) {
            return Err(Error::Domain("generator B(0) is not symmetric".into()));
        }
        let j = j_matrix(k);
        let h = tau / n_steps as f64;
        let times = uniform_times(tau, n_steps);
        let mut samples = Vec::with_capacity(n_steps + 1);
        let mut cur = Mat::identity(2 * k, 2 * k);
        samples.push(cur.clone());
        for i in 0..n_steps {
            let t = times[i];
            cur = magnus_step(b.as_ref(), &j, t, times[i + 1] - t) * cur;
            samples.push(cur.clone());
        }
        let defect = symplectic_defect(&cur) / (1.0 + max_abs(&cur)).powi(2);
        if defect > 1e-9 {
            return Err(Error::Conditioning(format!("symplecticity drift {defect:.2e} exceeds 1e-9 over [0, {tau}]")));
        }
        let samples = Arc::new(samples);
        let times = Arc::new(times);
        let eval: MatFn = {
            let samples = samples.clone();
            let times = times.clone();
            let b = b.clone();
            Arc::new(move |t: f64| {
                let t = t.clamp(0.0, tau);
                let i = ((t / h).floor() as usize).min(n_steps);
                let i = if times[i] > t && i > 0 { i - 1 } else { i };
                let dt = t - times[i];
                if dt <= 0.0 {
                    return samples[i].clone();
                }
                magnus_step(b.as_ref(), &j, times[i], dt) * &samples[i]
            })
        };
        Ok(SymplecticPath { k, tau, times, samples, eval, generator: Some(b) })
    }

    /// Fundamental solution of a constant generator, evaluated as `exp(tJB)`.
    pub fn constant_generator(b: &Mat, tau: f64, n_samples: usize) -> Result<Self> {
        let k = b.nrows() / 2;
        if b.nrows() != b.ncols() || b.nrows() % 2 != 0 || k == 0 {
            return Err(Error::Dimension(format!("generator must be 2k x 2k, got {}x{}", b.nrows(), b.ncols())));
        }
        if max_abs(&(b - b.transpose())) > 1e-12 * (1.0 + max_abs(b)) {
            return Err(Error::Domain("generator is not symmetric".into()));
        }
        let jb = j_matrix(k) * b;
        let f: MatFn = Arc::new(move |t: f64| (&jb * t).exp());
        let bb = b.clone();
        let mut p = SymplecticPath::from_fn(k, tau, n_samples, f)?;
        p.generator = Some(Arc::new(move |_t: f64| bb.clone()));
        Ok(p)
    }

    /// `R(t)^{⋄k}` on `[0, τ]`, the fundamental solution of `B = I`.
    pub fn rotation(k: usize, tau: f64, n_samples: usize) -> Result<Self> {
        SymplecticPath::constant_generator(&Mat::identity(2 * k, 2 * k), tau, n_samples)
    }

    pub fn dim_half(&self) -> usize {
        self.k
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[Mat] {
        &self.samples
    }

    pub fn eval(&self, t: f64) -> Mat {
        (self.eval)(t)
    }

    pub fn evaluator(&self) -> MatFn {
        self.eval.clone()
    }

    pub fn generator(&self) -> Option<&MatFn> {
        self.generator.as_ref()
    }

    pub fn with_generator(mut self, g: MatFn) -> Self {
        self.generator = Some(g);
        self
    }

    pub fn start(&self) -> &Mat {
        &self.samples[0]
    }

    pub fn end(&self) -> &Mat {
        self.samples.last().unwrap()
    }

    pub fn endpoint(&self) -> SymplecticMatrix {
        SymplecticMatrix::from_trusted(self.end().clone())
    }

    pub fn starts_at_identity(&self, tol: f64) -> bool {
        max_abs(&(self.start() - Mat::identity(2 * self.k, 2 * self.k))) <= tol
    }

    /// Largest symplectic defect over the cached samples.
    pub fn max_defect(&self) -> f64 {
        self.samples.iter().map(symplectic_defect).fold(0.0, f64::max)
    }

    /// Same curve on a new uniform grid.
    pub fn resampled(&self, n_samples: usize) -> SymplecticPath {
        let times = uniform_times(self.tau, n_samples.max(1));
        let samples: Vec<Mat> = times.iter().map(|&t| self.eval(t)).collect();
        SymplecticPath {
            k: self.k,
            tau: self.tau,
            times: Arc::new(times),
            samples: Arc::new(samples),
            eval: self.eval.clone(),
            generator: self.generator.clone(),
        }
    }

    /// Every other sample (plus the endpoint), for grid-stability checks.
    pub fn coarsened(&self) -> SymplecticPath {
        let m = self.times.len();
        let mut idx: Vec<usize> = (0..m).step_by(2).collect();
        if *idx.last().unwrap() != m - 1 {
            idx.push(m - 1);
        }
        SymplecticPath {
            k: self.k,
            tau: self.tau,
            times: Arc::new(idx.iter().map(|&i| self.times[i]).collect()),
            samples: Arc::new(idx.iter().map(|&i| self.samples[i].clone()).collect()),
            eval: self.eval.clone(),
            generator: self.generator.clone(),
        }
    }

    /// `γ(t)·exp(−εtJ)`.
    pub fn perturbed(&self, eps: f64) -> SymplecticPath {
        let k = self.k;
        let j = j_matrix(k);
        let rot = move |t: f64| (&j * (-eps * t)).exp();
        let base = self.eval.clone();
        let rot2 = rot.clone();
        let eval: MatFn = Arc::new(move |t: f64| base(t) * rot2(t));
        let samples: Vec<Mat> = self.times.iter().zip(self.samples.iter()).map(|(&t, m)| m * rot(t)).collect();
        SymplecticPath { k, tau: self.tau, times: self.times.clone(), samples: Arc::new(samples), eval, generator: None }
    }

    /// `γ₁ ⋄ γ₂` on a common time span.
    pub fn diamond(&self, other: &SymplecticPath) -> Result<SymplecticPath> {
        if (self.tau - other.tau).abs() > 1e-12 * self.tau.max(other.tau) {
            return Err(Error::Domain("⋄-product of paths needs equal time spans".into()));
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let eval: MatFn = Arc::new(move |t: f64| diamond_all(&[a(t), b(t)]));
        let n = (self.times.len().max(other.times.len()) - 1).max(1);
        let mut p = SymplecticPath::from_fn(self.k + other.k, self.tau, n, eval)?;
        if let (Some(g1), Some(g2)) = (self.generator.clone(), other.generator.clone()) {
            p.generator = Some(Arc::new(move |t: f64| diamond_all(&[g1(t), g2(t)])));
        }
        Ok(p)
    }
}

/// `η ∗ ξ`: runs `ξ` on the first half and `η` on the second, on the time span of `ξ`.
pub fn joint_path(xi: &SymplecticPath, eta: &SymplecticPath, tol: f64) -> Result<SymplecticPath> {
    if xi.k != eta.k {
        return Err(Error::Dimension(format!("cannot join paths in Sp({}) and Sp({})", 2 * xi.k, 2 * eta.k)));
    }
    let gap = max_abs(&(xi.end() - eta.start()));
    if gap > tol * (1.0 + max_abs(xi.end())) {
        return Err(Error::JoinMismatch(gap));
    }
    let tau = xi.tau;
    let scale = eta.tau / tau;
    let (fx, fe) = (xi.eval.clone(), eta.eval.clone());
    let eval: MatFn = Arc::new(move |t: f64| if t <= tau / 2.0 { fx((2.0 * t).min(tau)) } else { fe(((2.0 * t - tau) * scale).max(0.0)) });
    let mut times = Vec::with_capacity(xi.times.len() + eta.times.len() - 1);
    let mut samples = Vec::with_capacity(times.capacity());
    for (t, m) in xi.times.iter().zip(xi.samples.iter()) {
        times.push(t / 2.0);
        samples.push(m.clone());
    }
    for (t, m) in eta.times.iter().zip(eta.samples.iter()).skip(1) {
        times.push(tau / 2.0 + t / (2.0 * scale));
        samples.push(m.clone());
    }
    *times.last_mut().unwrap() = tau;
    Ok(SymplecticPath { k: xi.k, tau, times: Arc::new(times), samples: Arc::new(samples), eval, generator: None })
}

/// `ξ_k(t) = diag(2 − t/τ, (2 − t/τ)⁻¹)^{⋄k}`, from `D(2)^{⋄k}` to `I`.
pub fn special_path_xi(k: usize, tau: f64, n_samples: usize) -> Result<SymplecticPath> {
    let f: MatFn = Arc::new(move |t: f64| {
        let a = 2.0 - t / tau;
        let mut m = Mat::zeros(2 * k, 2 * k);
        for i in 0..k {
            m[(i, i)] = a;
            m[(k + i, k + i)] = 1.0 / a;
        }
        m
    });
    SymplecticPath::from_fn(k, tau, n_samples, f)
}

/// The path that stays at `m` on `[0, τ]`.
pub fn constant_path(m: &Mat, tau: f64) -> Result<SymplecticPath> {
    let k = m.nrows() / 2;
    let mm = m.clone();
    SymplecticPath::from_fn(k, tau, 1, Arc::new(move |_t: f64| mm.clone()))
}

/// The `k`-fold iterate in the brake-orbit sense on `[0, kτ]`:
/// `γ(t − 2jτ)Tʲ` on `[2jτ, (2j+1)τ]` and `Nγ((2j+2)τ − t)N Tʲ⁺¹` on `[(2j+1)τ, (2j+2)τ]`,
/// with `T = Nγ(τ)⁻¹Nγ(τ)`.
pub fn brake_iterate(g: &SymplecticPath, k: usize) -> Result<SymplecticPath> {
    if k == 0 {
        return Err(Error::Domain("iteration count must be positive".into()));
    }
    if k == 1 {
        return Ok(g.clone());
    }
    let kk = g.k;
    let tau = g.tau;
    let nm = n_matrix(kk);
    let t_mat = n_transform(&g.endpoint())?.into_matrix();
    let mut powers = vec![Mat::identity(2 * kk, 2 * kk)];
    for _ in 0..=k / 2 + 1 {
        let next = powers.last().unwrap() * &t_mat;
        powers.push(next);
    }
    let powers = Arc::new(powers);
    let base = g.eval.clone();
    let (p2, n2) = (powers.clone(), nm.clone());
    let eval: MatFn = Arc::new(move |t: f64| {
        let t = t.clamp(0.0, k as f64 * tau);
        let seg = ((t / tau).floor() as usize).min(k - 1);
        let j = seg / 2;
        if seg % 2 == 0 {
            base((t - 2.0 * j as f64 * tau).clamp(0.0, tau)) * &p2[j]
        } else {
            let s = ((2 * j + 2) as f64 * tau - t).clamp(0.0, tau);
            &n2 * base(s) * &n2 * &p2[j + 1]
        }
    });
    let mut times = Vec::new();
    let mut samples = Vec::new();
    let m = g.times.len();
    for seg in 0..k {
        let j = seg / 2;
        let off = seg as f64 * tau;
        for i in 0..m {
            if seg > 0 && i == 0 {
                continue;
            }
            if seg % 2 == 0 {
                times.push(off + g.times[i]);
                samples.push(&g.samples[i] * &powers[j]);
            } else {
                let r = m - 1 - i;
                times.push(off + (tau - g.times[r]));
                samples.push(&nm * &g.samples[r] * &nm * &powers[j + 1]);
            }
        }
    }
    *times.last_mut().unwrap() = k as f64 * tau;
    let generator = g.generator.clone().map(|b| {
        let n3 = nm.clone();
        let f: MatFn = Arc::new(move |t: f64| {
            let seg = ((t / tau).floor() as usize).min(k - 1);
            let j = seg / 2;
            if seg % 2 == 0 {
                b((t - 2.0 * j as f64 * tau).clamp(0.0, tau))
            } else {
                &n3 * b(((2 * j + 2) as f64 * tau - t).clamp(0.0, tau)) * &n3
            }
        });
        f
    });
    Ok(SymplecticPath { k: kk, tau: k as f64 * tau, times: Arc::new(times), samples: Arc::new(samples), eval, generator })
}
