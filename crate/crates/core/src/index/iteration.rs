use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lagrangian::index_lagrangian;
use super::omega::index_omega;
use super::splitting::splitting_numbers;
use super::{one, IndexPair};
use crate::error::{Error, Result};
use crate::linalg::sym_eigenvalues;
use crate::path::{brake_iterate, SymplecticPath};
use crate::symplectic::Lagrangian;
use crate::tol::Tolerances;

/// `μ_(L0,L1) = i_L0 − ν_L1` and `μ_(L1,L0) = i_L1 − ν_L0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedConcavity {
    pub mu_01: i64,
    pub mu_10: i64,
    pub l0: IndexPair,
    pub l1: IndexPair,
}

pub fn mixed_concavity(path: &SymplecticPath, tol: &Tolerances) -> Result<MixedConcavity> {
    let l0 = index_lagrangian(path, Lagrangian::L0, tol)?.pair;
    let l1 = index_lagrangian(path, Lagrangian::L1, tol)?.pair;
    Ok(MixedConcavity { mu_01: l0.i - l1.nu as i64, mu_10: l1.i - l0.nu as i64, l0, l1 })
}

/// `i_L0(γ^k)/k` at `k_max`, with the change from `k_max/2` as error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanIndex {
    pub estimate: f64,
    pub half_estimate: f64,
    pub error_bar: f64,
    pub k_max: usize,
    /// The two averages differ by more than `(2n + 2)/k_max`.
    pub flagged: bool,
}

pub fn mean_index_l0(path: &SymplecticPath, k_max: usize, tol: &Tolerances) -> Result<MeanIndex> {
    if k_max < 16 {
        return Err(Error::Domain(format!("k_max must be at least 16, got {k_max}")));
    }
    let n = path.dim_half();
    let ks = [k_max, k_max / 2];
    let vals: Vec<f64> = ks
        .par_iter()
        .map(|&k| Ok(index_lagrangian(&brake_iterate(path, k)?, Lagrangian::L0, tol)?.pair.i as f64 / k as f64))
        .collect::<Result<_>>()?;
    let err = (vals[0] - vals[1]).abs();
    Ok(MeanIndex {
        estimate: vals[0],
        half_estimate: vals[1],
        error_bar: err,
        k_max,
        flagged: err > (2 * n + 2) as f64 / k_max as f64,
    })
}

/// A tuple `(R, m_1, …, m_q)` of a common index jump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonJumpTuple {
    pub r: i64,
    pub m: Vec<usize>,
    /// The `ω = 1` companions of the conditions on the doubled iterates also hold.
    pub doubled_conditions_hold: bool,
}

struct JumpData {
    n: i64,
    i_l0: i64,
    nu_l0: i64,
    i_l1: i64,
    s_plus: i64,
    /// `(i_L0, ν_L0)` of `γ^k`, indexed by `k`.
    iter: Vec<(i64, i64)>,
}

fn jump_data(path: &SymplecticPath, bound: usize, tol: &Tolerances) -> Result<JumpData> {
    let n = path.dim_half() as i64;
    let l0 = index_lagrangian(path, Lagrangian::L0, tol)?.pair;
    let l1 = index_lagrangian(path, Lagrangian::L1, tol)?.pair;
    let g2 = brake_iterate(path, 2)?;
    let s_plus = splitting_numbers(&g2.endpoint(), one(), &g2, tol)?.s_plus as i64;
    let kmax = 2 * bound + 1;
    let mut iter: Vec<(i64, i64)> = (0..=kmax)
        .into_par_iter()
        .map(|k| {
            if k == 0 || k % 2 == 0 {
                return Ok((0, 0));
            }
            let p = index_lagrangian(&brake_iterate(path, k)?, Lagrangian::L0, tol)?.pair;
            Ok((p.i, p.nu as i64))
        })
        .collect::<Result<_>>()?;
    iter[1] = (l0.i, l0.nu as i64);
    Ok(JumpData { n, i_l0: l0.i, nu_l0: l0.nu as i64, i_l1: l1.i, s_plus, iter })
}

fn doubled_conditions(path: &SymplecticPath, m: usize, s_plus: i64, tol: &Tolerances) -> Result<bool> {
    let idx = |k: usize| -> Result<(i64, i64)> {
        let p = index_omega(&brake_iterate(path, k)?, one(), tol)?.pair;
        Ok((p.i, p.nu as i64))
    };
    let (i2, nu2) = idx(2)?;
    let (im, num) = idx(2 * (2 * m - 1))?;
    let (ip, nup) = idx(2 * (2 * m + 1))?;
    let r2 = ip - i2;
    let iv = num == nu2 && nup == nu2;
    let v = im + num == r2 - (i2 + 2 * s_plus - nu2);
    Ok(iv && v)
}

/// All tuples with `m_j ≤ bound` meeting the three `L0` conditions of a common index
/// jump on every path; `R` is read from `i_L0(γ_j^{2m_j+1}) = R + i_L0(γ_j)`.
pub fn common_index_jump_search(paths: &[SymplecticPath], bound: usize, tol: &Tolerances) -> Result<Vec<CommonJumpTuple>> {
    if paths.is_empty() || bound == 0 {
        return Ok(vec![]);
    }
    for (j, p) in paths.iter().enumerate() {
        let mi = mean_index_l0(p, 16, tol)?;
        if !(mi.estimate > 0.0) {
            return Err(Error::Precondition(format!("path {j} has mean L0-index {:.4} ≤ 0", mi.estimate)));
        }
    }
    let data: Vec<JumpData> = paths.iter().map(|p| jump_data(p, bound, tol)).collect::<Result<_>>()?;
    // candidates[j]: (R, m) pairs meeting (i)–(iii) for path j
    let candidates: Vec<Vec<(i64, usize)>> = data
        .iter()
        .map(|d| {
            (1..=bound)
                .filter_map(|m| {
                    let (im, num) = d.iter[2 * m - 1];
                    let (ip, nup) = d.iter[2 * m + 1];
                    let r = ip - d.i_l0;
                    let cond1 = num == d.nu_l0 && nup == d.nu_l0;
                    let cond2 = im + num == r - (d.i_l1 + d.n + d.s_plus - d.nu_l0);
                    (cond1 && cond2).then_some((r, m))
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut rs: Vec<i64> = candidates[0].iter().map(|c| c.0).collect();
    rs.dedup();
    for r in rs {
        let choices: Vec<Vec<usize>> = candidates.iter().map(|c| c.iter().filter(|x| x.0 == r).map(|x| x.1).collect()).collect();
        if choices.iter().any(|c| c.is_empty()) {
            continue;
        }
        let mut combos: Vec<Vec<usize>> = vec![vec![]];
        for c in &choices {
            combos = combos.into_iter().flat_map(|pre| c.iter().map(move |&m| [pre.clone(), vec![m]].concat())).collect();
        }
        for ms in combos {
            let doubled = ms
                .iter()
                .zip(paths.iter().zip(data.iter()))
                .map(|(&m, (p, d))| doubled_conditions(p, m, d.s_plus, tol))
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .all(|b| b);
            out.push(CommonJumpTuple { r, m: ms, doubled_conditions_hold: doubled });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub m: usize,
    pub inequality: String,
    pub i_m: i64,
    pub nu_m: i64,
    pub i_next: i64,
    pub nu_next: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub holds: bool,
    /// `(i_L0(γ^m), ν_L0(γ^m))` for `m = 1..=m_max`.
    pub indices: Vec<(i64, usize)>,
    pub violations: Vec<MonotonicityViolation>,
}

/// Checks `i(m+1) − i(m) ≥ 1` and `i(m+1) + ν(m+1) − 1 ≥ i(m+1) > i(m) + ν(m) − 1`
/// for the `L0`-indices of the brake iterates, `m < m_max`.
///
/// The generator must be positive definite, and `ν_L0(γ) ≥ 1`: the middle inequality
/// says `ν_L0(γ^{m+1}) ≥ 1`, which fails for convex paths with a non-degenerate end.
pub fn iteration_monotonicity_check(path: &SymplecticPath, m_max: usize, tol: &Tolerances) -> Result<MonotonicityReport> {
    let g = path.generator().ok_or_else(|| Error::Precondition("path has no generator".into()))?;
    for &t in path.times() {
        if sym_eigenvalues(&g(t)).first().copied().unwrap_or(0.0) <= 0.0 {
            return Err(Error::Precondition(format!("generator is not positive definite at t = {t}")));
        }
    }
    let indices: Vec<(i64, usize)> = (1..=m_max)
        .into_par_iter()
        .map(|m| {
            let p = index_lagrangian(&brake_iterate(path, m)?, Lagrangian::L0, tol)?.pair;
            Ok((p.i, p.nu))
        })
        .collect::<Result<_>>()?;
    if indices.first().map(|x| x.1).unwrap_or(0) == 0 {
        return Err(Error::Precondition("ν_L0(γ) = 0".into()));
    }
    let mut violations = Vec::new();
    for m in 1..m_max {
        let (i_m, nu_m) = (indices[m - 1].0, indices[m - 1].1 as i64);
        let (i_n, nu_n) = (indices[m].0, indices[m].1 as i64);
        let mut push = |what: &str| {
            violations.push(MonotonicityViolation { m, inequality: what.into(), i_m, nu_m, i_next: i_n, nu_next: nu_n })
        };
        if i_n - i_m < 1 {
            push("i(m+1) - i(m) >= 1");
        }
        if i_n + nu_n - 1 < i_n {
            push("i(m+1) + nu(m+1) - 1 >= i(m+1)");
        }
        if i_n < i_m + nu_m {
            push("i(m+1) > i(m) + nu(m) - 1");
        }
    }
    Ok(MonotonicityReport { holds: violations.is_empty(), indices, violations })
}
