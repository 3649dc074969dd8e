//! `{"dim_half": k, "rows": [[...], ...]}` with entries as numbers, decimal strings or `"p/q"`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim_half: usize,
    pub rows: Vec<Vec<Entry>>,
}

/// Parses `"1.5"`, `"-3"`, `"2/3"`, `"-1/4"`.
pub fn parse_entry(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let q: f64 = q.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if q == 0.0 {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(p / q);
    }
    s.parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<Mat> {
        let n = 2 * self.dim_half;
        if self.dim_half == 0 {
            return Err(Error::Dimension("dim_half must be positive".into()));
        }
        if self.rows.len() != n {
            return Err(Error::Dimension(format!("expected {n} rows, got {}", self.rows.len())));
        }
        let mut m = Mat::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, e) in row.iter().enumerate() {
                m[(i, j)] = match e {
                    Entry::Num(x) => *x,
                    Entry::Text(s) => parse_entry(s).map_err(|e| Error::Parse(format!("rows[{i}][{j}]: {e}")))?,
                };
            }
        }
        Ok(m)
    }

    pub fn from_matrix(m: &Mat) -> Self {
        MatrixJson {
            dim_half: m.nrows() / 2,
            rows: (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| Entry::Num(m[(i, j)])).collect()).collect(),
        }
    }
}

pub fn matrix_from_json(s: &str) -> Result<Mat> {
    let mj: MatrixJson = serde_json::from_str(s).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    mj.to_matrix()
}

pub fn matrix_to_json(m: &Mat) -> String {
    serde_json::to_string(&MatrixJson::from_matrix(m)).expect("matrix serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_and_strings() {
        let m = matrix_from_json(r#"{"dim_half":1,"rows":[["1/2", 0],["-3", "2.0"]]}"#).unwrap();
        assert_eq!(m, Mat::from_row_slice(2, 2, &[0.5, 0.0, -3.0, 2.0]));
    }

    #[test]
    fn shape_and_syntax_errors() {
        assert!(matches!(matrix_from_json(r#"{"dim_half":1,"rows":[[1,0]]}"#), Err(Error::Dimension(_))));
        assert!(matches!(matrix_from_json(r#"{"dim_half":1,"rows":[["x",0],[0,1]]}"#), Err(Error::Parse(_))));
        assert!(matches!(matrix_from_json("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn round_trip() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 0.25, 0.0, 1.0]);
        assert_eq!(matrix_from_json(&matrix_to_json(&m)).unwrap(), m);
    }
}
