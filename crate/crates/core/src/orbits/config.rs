use serde::{Deserialize, Serialize};

use super::enumerate::EnumerateOptions;
use super::hamiltonian::{gauge_hamiltonian, GaugeHamiltonian, Surface, Vector};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Human-writable Hamiltonian description, read from TOML.
///
/// ```toml
/// kind = "quadratic"        # H = ½|p|² + Σ a_j² q_j²
/// weights = [1.0, 1.4142135623730951]
/// energy = 1.0
///
/// [solver]
/// grid = 64
/// ```
///
/// Other kinds: `"form"` (`H = xᵀQx`, `form` given as rows), `"ellipsoid"`
/// (`H = (xᵀQx)^{α/2}`) and `"sphere"` (`H = |x|^α`, needs `dim`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub kind: String,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub form: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_energy")]
    pub energy: f64,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub grid: Option<usize>,
    pub steps: Option<usize>,
    pub max_iter: Option<usize>,
    pub dedup_tol: Option<f64>,
}

fn default_alpha() -> f64 {
    2.0
}

fn default_energy() -> f64 {
    1.0
}

impl HamiltonianConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    fn form_matrix(&self) -> Result<Mat> {
        let rows = self.form.as_ref().ok_or_else(|| Error::Parse(format!("kind \"{}\" needs `form`", self.kind)))?;
        let d = rows.len();
        if d == 0 || d % 2 != 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::Parse("`form` must be a square matrix of even size".into()));
        }
        Ok(Mat::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn build(&self) -> Result<GaugeHamiltonian> {
        match self.kind.as_str() {
            "quadratic" => {
                let w = self.weights.as_ref().ok_or_else(|| Error::Parse("kind \"quadratic\" needs `weights`".into()))?;
                GaugeHamiltonian::weighted_quadratic(w, self.energy)
            }
            "form" => GaugeHamiltonian::quadratic(self.form_matrix()?, self.energy),
            "ellipsoid" => {
                let q = self.form_matrix()?;
                let n = q.nrows() / 2;
                gauge_hamiltonian(Surface::Ellipsoid { form: q, center: Vector::zeros(2 * n) }, self.alpha, self.energy, n)
            }
            "sphere" => {
                let n = self.dim.ok_or_else(|| Error::Parse("kind \"sphere\" needs `dim`".into()))?;
                GaugeHamiltonian::sphere(n, self.alpha, self.energy)
            }
            k => Err(Error::Parse(format!("unknown Hamiltonian kind \"{k}\""))),
        }
    }

    pub fn options(&self) -> EnumerateOptions {
        let mut o = EnumerateOptions::default();
        if let Some(g) = self.solver.grid {
            o.grid_density = g;
        }
        if let Some(s) = self.solver.steps {
            o.shoot.steps_half = s;
        }
        if let Some(m) = self.solver.max_iter {
            o.shoot.max_iter = m;
        }
        if let Some(d) = self.solver.dedup_tol {
            o.dedup_tol = d;
        }
        o
    }
}
