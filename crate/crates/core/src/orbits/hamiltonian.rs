use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{j_matrix, max_abs, sym_eigenvalues, symmetrize, Mat};

pub type Vector = DVector<f64>;

/// `x ↦ j_Σ(x)`, positively homogeneous of degree one.
pub type GaugeFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;

/// A convex body `Σ` containing the origin, described by its gauge.
#[derive(Clone)]
pub enum Surface {
    /// `{(x − c)ᵀ Q (x − c) = 1}` with `Q ≻ 0` and `cᵀQc < 1`; `c = 0` is the ellipsoid.
    Ellipsoid { form: Mat, center: Vector },
    /// Any gauge; derivatives by central differences.
    Oracle(GaugeFn),
}

impl std::fmt::Debug for Surface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Surface::Ellipsoid { form, center } => f.debug_struct("Ellipsoid").field("form", form).field("center", center).finish(),
            Surface::Oracle(_) => f.write_str("Oracle"),
        }
    }
}

/// Serializable description of a Hamiltonian, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSummary {
    pub kind: String,
    pub dim_half: usize,
    pub alpha: f64,
    pub energy: f64,
}

/// `H = j_Σ^α` on `R²ⁿ`, with the brake problem posed on `H⁻¹(h)`.
#[derive(Debug, Clone)]
pub struct GaugeHamiltonian {
    surface: Surface,
    alpha: f64,
    energy: f64,
    n: usize,
    /// `H = xᵀQx`, so the flow is linear.
    linear: Option<Mat>,
}

fn n_reflect(x: &Vector) -> Vector {
    let n = x.len() / 2;
    let mut y = x.clone();
    for i in 0..n {
        y[i] = -y[i];
    }
    y
}

impl GaugeHamiltonian {
    fn build(surface: Surface, alpha: f64, energy: f64, n: usize) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(Error::Domain(format!("exponent must exceed 1, got {alpha}")));
        }
        if !(energy > 0.0) {
            return Err(Error::Domain(format!("energy must be positive, got {energy}")));
        }
        if n == 0 {
            return Err(Error::Dimension("dimension must be positive".into()));
        }
        let mut linear = None;
        if let Surface::Ellipsoid { form, center } = &surface {
            if form.nrows() != 2 * n || form.ncols() != 2 * n || center.len() != 2 * n {
                return Err(Error::Dimension(format!("ellipsoid data must be {0}x{0} and length {0}", 2 * n)));
            }
            if max_abs(&(form - form.transpose())) > 1e-12 * (1.0 + max_abs(form)) {
                return Err(Error::Domain("quadratic form is not symmetric".into()));
            }
            let eig = sym_eigenvalues(form);
            if eig[0] <= 0.0 {
                return Err(Error::Domain(format!("quadratic form is not positive definite (λ_min = {:.3e})", eig[0])));
            }
            let qc = center.dot(&(form * center));
            if qc >= 1.0 {
                return Err(Error::Domain("the origin is not inside the surface".into()));
            }
            if center.amax() == 0.0 && alpha == 2.0 {
                linear = Some(form.clone());
            }
        }
        Ok(GaugeHamiltonian { surface, alpha, energy, n, linear })
    }

    /// `H(p, q) = ½|p|² + Σ a_j² q_j²` at energy `h`.
    pub fn weighted_quadratic(weights: &[f64], energy: f64) -> Result<Self> {
        let n = weights.len();
        if weights.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::Domain("weights must be positive".into()));
        }
        let mut d = vec![0.5; n];
        d.extend(weights.iter().map(|a| a * a));
        gauge_hamiltonian(Surface::Ellipsoid { form: Mat::from_diagonal(&Vector::from_vec(d)), center: Vector::zeros(2 * n) }, 2.0, energy, n)
    }

    /// `H = xᵀQx` at energy `h`.
    pub fn quadratic(form: Mat, energy: f64) -> Result<Self> {
        let n = form.nrows() / 2;
        gauge_hamiltonian(Surface::Ellipsoid { form, center: Vector::zeros(2 * n) }, 2.0, energy, n)
    }

    /// `H = |x|^α`, the gauge power of the unit sphere.
    pub fn sphere(n: usize, alpha: f64, energy: f64) -> Result<Self> {
        gauge_hamiltonian(Surface::Ellipsoid { form: Mat::identity(2 * n, 2 * n), center: Vector::zeros(2 * n) }, alpha, energy, n)
    }

    /// Checks only `H(Nx) = H(x)` and convexity. Central symmetry may fail, so this
    /// admits surfaces outside the symmetric class (negative controls).
    pub fn reversible_only(surface: Surface, alpha: f64, energy: f64, n: usize) -> Result<Self> {
        let h = Self::build(surface, alpha, energy, n)?;
        h.validate(false)?;
        Ok(h)
    }

    pub fn dim_half(&self) -> usize {
        self.n
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    /// The form `Q` when `H = xᵀQx`.
    pub fn linear_form(&self) -> Option<&Mat> {
        self.linear.as_ref()
    }

    pub fn summary(&self) -> HamiltonianSummary {
        let kind = match (&self.surface, self.linear.is_some()) {
            (_, true) => "quadratic",
            (Surface::Ellipsoid { center, .. }, false) if center.amax() == 0.0 => "ellipsoid_power",
            (Surface::Ellipsoid { .. }, false) => "shifted_ellipsoid_power",
            (Surface::Oracle(_), false) => "gauge_oracle",
        };
        HamiltonianSummary { kind: kind.into(), dim_half: self.n, alpha: self.alpha, energy: self.energy }
    }

    pub fn gauge(&self, x: &Vector) -> f64 {
        match &self.surface {
            Surface::Ellipsoid { form, center } => {
                let (a, b, sigma) = ellipsoid_terms(form, center, x);
                ((b * b + sigma * a).max(0.0).sqrt() - b) / sigma
            }
            Surface::Oracle(g) => g(x),
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        if let Some(q) = &self.linear {
            return x.dot(&(q * x));
        }
        self.gauge(x).powf(self.alpha)
    }

    /// `(j, ∇j, ∇²j)`.
    fn gauge_derivatives(&self, x: &Vector) -> Result<(f64, Vector, Mat)> {
        if x.norm() == 0.0 {
            return Err(Error::Domain("the gauge is not differentiable at the origin".into()));
        }
        match &self.surface {
            Surface::Ellipsoid { form, center } => {
                let w = form * center;
                let qx = form * x;
                let (a, b, sigma) = ellipsoid_terms(form, center, x);
                let r = (b * b + sigma * a).sqrt();
                let gr = (&w * b + &qx * sigma) / r;
                let j = (r - b) / sigma;
                let gj = (&gr - &w) / sigma;
                let hr = (&w * w.transpose() + form * sigma) / r - &gr * gr.transpose() / r;
                Ok((j, gj, hr / sigma))
            }
            Surface::Oracle(g) => {
                let d = x.len();
                let scale = x.norm();
                let h1 = 1e-6 * scale;
                let h2 = 1e-4 * scale;
                let grad_at = |y: &Vector| {
                    Vector::from_fn(d, |i, _| {
                        let mut a = y.clone();
                        let mut b = y.clone();
                        a[i] += h1;
                        b[i] -= h1;
                        (g(&a) - g(&b)) / (2.0 * h1)
                    })
                };
                let gj = grad_at(x);
                let mut hess = Mat::zeros(d, d);
                for i in 0..d {
                    let mut a = x.clone();
                    let mut b = x.clone();
                    a[i] += h2;
                    b[i] -= h2;
                    let col = (grad_at(&a) - grad_at(&b)) / (2.0 * h2);
                    hess.set_column(i, &col);
                }
                Ok((g(x), gj, symmetrize(&hess)))
            }
        }
    }

    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        if let Some(q) = &self.linear {
            return Ok(q * x * 2.0);
        }
        let (j, gj, _) = self.gauge_derivatives(x)?;
        Ok(gj * (self.alpha * j.powf(self.alpha - 1.0)))
    }

    pub fn hessian(&self, x: &Vector) -> Result<Mat> {
        if let Some(q) = &self.linear {
            return Ok(q * 2.0);
        }
        let a = self.alpha;
        let (j, gj, hj) = self.gauge_derivatives(x)?;
        Ok(symmetrize(&(hj * (a * j.powf(a - 1.0)) + &gj * gj.transpose() * (a * (a - 1.0) * j.powf(a - 2.0)))))
    }

    /// `J∇H(x)`.
    pub fn vector_field(&self, x: &Vector) -> Result<Vector> {
        let g = self.gradient(x)?;
        let n = self.n;
        let mut f = Vector::zeros(2 * n);
        for i in 0..n {
            f[i] = -g[n + i];
            f[n + i] = g[i];
        }
        Ok(f)
    }

    /// `J H''(x)`.
    pub fn vector_field_jacobian(&self, x: &Vector) -> Result<Mat> {
        Ok(j_matrix(self.n) * self.hessian(x)?)
    }

    /// Radial rescaling onto `H⁻¹(h)`.
    pub fn scale_to_energy(&self, x: &Vector) -> Result<Vector> {
        let j = self.gauge(x);
        if !(j > 0.0) || !j.is_finite() {
            return Err(Error::Domain("cannot rescale the origin onto the energy surface".into()));
        }
        Ok(x * (self.energy.powf(1.0 / self.alpha) / j))
    }

    /// Samples evenness, reversibility and convexity at 64 seeded points.
    fn validate(&self, central: bool) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0fb0_d1e5);
        let d = 2 * self.n;
        for _ in 0..64 {
            let x = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            if x.norm() < 1e-3 {
                continue;
            }
            let h = self.value(&x);
            let scale = 1e-10 * (1.0 + h.abs());
            if central && (self.value(&-&x) - h).abs() > scale {
                return Err(Error::Domain(format!("surface is not centrally symmetric: H(−x) − H(x) = {:.3e}", self.value(&-&x) - h)));
            }
            if (self.value(&n_reflect(&x)) - h).abs() > scale {
                return Err(Error::Domain("surface is not invariant under N".into()));
            }
            let y = self.scale_to_energy(&x)?;
            let hess = self.hessian(&y)?;
            let eig = sym_eigenvalues(&hess);
            if eig[0] <= 1e-8 * eig[eig.len() - 1].abs().max(1.0) {
                return Err(Error::Domain(format!("Hessian is not positive definite on the surface (λ_min = {:.3e})", eig[0])));
            }
        }
        Ok(())
    }
}

fn ellipsoid_terms(form: &Mat, center: &Vector, x: &Vector) -> (f64, f64, f64) {
    let a = x.dot(&(form * x));
    let b = x.dot(&(form * center));
    let sigma = 1.0 - center.dot(&(form * center));
    (a, b, sigma)
}

/// `H_α = j_Σ^α` after checking `H(−x) = H(x)`, `H(Nx) = H(x)` and convexity on samples.
pub fn gauge_hamiltonian(surface: Surface, alpha: f64, energy: f64, n: usize) -> Result<GaugeHamiltonian> {
    let h = GaugeHamiltonian::build(surface, alpha, energy, n)?;
    h.validate(true)?;
    Ok(h)
}

/// Frequencies `ω_j` of the linear flow of `H = xᵀQx` (eigenvalues `±iω_j` of `2JQ`).
pub fn linear_frequencies(form: &Mat) -> Vec<f64> {
    let n = form.nrows() / 2;
    let jq = j_matrix(n) * form * 2.0;
    let mut w: Vec<f64> = crate::linalg::eigenvalues_r(&jq).iter().filter(|z| z.im > 0.0).map(|z| z.im).collect();
    w.sort_by(|a, b| a.partial_cmp(b).unwrap());
    w
}

/// True when some frequency ratio is within `1e-9` of a rational with denominator `≤ max_den`.
pub fn is_resonant(freqs: &[f64], max_den: u64) -> bool {
    for i in 0..freqs.len() {
        for j in i + 1..freqs.len() {
            if near_rational(freqs[j] / freqs[i], max_den, 1e-9) {
                return true;
            }
        }
    }
    false
}

fn near_rational(r: f64, max_den: u64, tol: f64) -> bool {
    // continued-fraction convergents
    let (mut h0, mut h1) = (0f64, 1f64);
    let (mut k0, mut k1) = (1f64, 0f64);
    let mut x = r;
    for _ in 0..64 {
        let a = x.floor();
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_den as f64 {
            return false;
        }
        if (r - h2 / k2).abs() <= tol * r.abs().max(1.0) {
            return true;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = x - a;
        if frac < 1e-15 {
            return false;
        }
        x = 1.0 / frac;
    }
    false
}
