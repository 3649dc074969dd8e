//! Path input:
//! `{"tau": t, "generator": {"kind": "constant" | "quadratic_orbit" | "sampled", ...}, "n_steps": N}`.
//!
//! - `constant`: `{"matrix": <matrix JSON>}`, a symmetric generator `B`.
//! - `quadratic_orbit`: `{"weights": [a_1, …]}`, the linearization `B = diag(I, 2a²)` of
//!   `H = ½|p|² + Σ a_j² q_j²` along any of its orbits.
//! - `sampled`: `{"times": [...], "values": [<matrix JSON>, ...]}`, `B(t)` interpolated
//!   linearly between samples.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{MatFn, SymplecticPath};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::symplectic::json::MatrixJson;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathJson {
    pub tau: f64,
    pub generator: GeneratorJson,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
}

fn default_steps() -> usize {
    256
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorJson {
    Constant { matrix: MatrixJson },
    QuadraticOrbit { weights: Vec<f64> },
    Sampled { times: Vec<f64>, values: Vec<MatrixJson> },
}

impl PathJson {
    pub fn build(&self) -> Result<SymplecticPath> {
        match &self.generator {
            GeneratorJson::Constant { matrix } => SymplecticPath::constant_generator(&matrix.to_matrix()?, self.tau, self.n_steps),
            GeneratorJson::QuadraticOrbit { weights } => {
                let n = weights.len();
                if n == 0 {
                    return Err(Error::Dimension("no weights".into()));
                }
                let mut b = Mat::identity(2 * n, 2 * n);
                for (j, a) in weights.iter().enumerate() {
                    b[(n + j, n + j)] = 2.0 * a * a;
                }
                SymplecticPath::constant_generator(&b, self.tau, self.n_steps)
            }
            GeneratorJson::Sampled { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return Err(Error::Dimension(format!("{} times for {} samples; need at least two of each", times.len(), values.len())));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) || times[0] > 0.0 || *times.last().unwrap() < self.tau {
                    return Err(Error::Domain("sample times must increase and cover [0, tau]".into()));
                }
                let mats: Vec<Mat> = values.iter().map(|v| v.to_matrix()).collect::<Result<_>>()?;
                let k = mats[0].nrows() / 2;
                if mats.iter().any(|m| m.nrows() != 2 * k) {
                    return Err(Error::Dimension("samples of different sizes".into()));
                }
                let times = Arc::new(times.clone());
                let mats = Arc::new(mats);
                let b: MatFn = Arc::new(move |t: f64| {
                    let i = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
                    let u = ((t - times[i - 1]) / (times[i] - times[i - 1])).clamp(0.0, 1.0);
                    &mats[i - 1] * (1.0 - u) + &mats[i] * u
                });
                SymplecticPath::fundamental_solution(b, k, self.tau, self.n_steps.max(64))
            }
        }
    }
}

pub fn path_from_json(s: &str) -> Result<SymplecticPath> {
    let pj: PathJson = serde_json::from_str(s).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    pj.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_from_constant_generator() {
        let s = r#"{"tau": 3.141592653589793, "generator": {"kind": "constant", "matrix": {"dim_half": 1, "rows": [[1, 0], [0, 1]]}}}"#;
        let g = path_from_json(s).unwrap();
        assert!((g.end() + Mat::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn sampled_constant_matches_closed_form() {
        let s = r#"{"tau": 1.0, "n_steps": 128, "generator": {"kind": "sampled", "times": [0, 1],
            "values": [{"dim_half": 1, "rows": [[2, 0], [0, 2]]}, {"dim_half": 1, "rows": [[2, 0], [0, 2]]}]}}"#;
        let g = path_from_json(s).unwrap();
        let r = Mat::from_row_slice(2, 2, &[2f64.cos(), -2f64.sin(), 2f64.sin(), 2f64.cos()]);
        assert!((g.end() - r).amax() < 1e-10);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(path_from_json("{\"tau\": 1"), Err(Error::Parse(_))));
        assert!(path_from_json(r#"{"tau": 1, "generator": {"kind": "helix"}}"#).is_err());
        assert!(path_from_json(r#"{"tau": 1, "generator": {"kind": "quadratic_orbit", "weights": []}}"#).is_err());
    }
}
