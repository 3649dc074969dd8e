use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Lagrangian, SymplecticMatrix};
use crate::error::{Error, Result};
use crate::linalg::{blocks, eigenvalues_r, kernel_dim_c, max_abs, singular_values, to_complex, Mat};
use crate::tol::Tolerances;

/// A group of numerically coincident eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCluster {
    pub re: f64,
    pub im: f64,
    /// Angle in `[0, 2π)` of the centroid.
    pub arg: f64,
    pub alg_mult: usize,
    pub on_unit: bool,
    /// The centroid sits in the band between `eig_tol` and `100·eig_tol` of the circle,
    /// or the eigenvalue solver failed.
    pub ambiguous: bool,
}

impl SpectralCluster {
    pub fn center(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Perturbation radius of an eigenvalue of algebraic multiplicity `m` for a matrix of
/// size `scale`: rounding of order `u·scale` moves a Jordan chain by `(u·scale)^{1/m}`.
fn jordan_radius(m: usize, scale: f64) -> f64 {
    10.0 * (f64::EPSILON * scale).powf(1.0 / m as f64)
}

fn centroid(ev: &[Complex64], g: &[usize]) -> Complex64 {
    g.iter().fold(Complex64::new(0.0, 0.0), |a, &i| a + ev[i]) / g.len() as f64
}

/// Eigenvalues of `M` grouped by single linkage at distance `cluster_tol`, then
/// merged while every member of the union lies within the perturbation radius of a
/// Jordan chain of the union's size around its centroid (capped at `1000·cluster_tol`).
pub fn unit_clusters(m: &SymplecticMatrix, tol: &Tolerances) -> Vec<SpectralCluster> {
    let ev = eigenvalues_r(m.matrix());
    let n = ev.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = 1.0f64.max(ev[i].norm());
            if (ev[i] - ev[j]).norm() < tol.cluster * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    let size = m.matrix().norm();
    loop {
        // grow each group by its nearest neighbours and keep the largest union that
        // still fits a single perturbed Jordan chain
        let mut best: Option<(Vec<usize>, usize, f64)> = None;
        for a in 0..groups.len() {
            let ca = centroid(&ev, &groups[a]);
            let mut others: Vec<usize> = (0..groups.len()).filter(|&b| b != a).collect();
            others.sort_by(|&x, &y| (centroid(&ev, &groups[x]) - ca).norm().total_cmp(&(centroid(&ev, &groups[y]) - ca).norm()));
            let mut members = groups[a].clone();
            let mut taken = vec![a];
            for &b in &others {
                members.extend(&groups[b]);
                taken.push(b);
                let c = centroid(&ev, &members);
                let spread = members.iter().fold(0.0f64, |x, &i| x.max((ev[i] - c).norm()));
                let radius = jordan_radius(members.len(), size * 1.0f64.max(c.norm())).min(1e3 * tol.cluster);
                if spread < radius && best.as_ref().is_none_or(|(_, n, s)| members.len() > *n || (members.len() == *n && spread < *s)) {
                    best = Some((taken.clone(), members.len(), spread));
                }
            }
        }
        match best {
            Some((mut taken, _, _)) => {
                taken.sort_unstable();
                let merged: Vec<usize> = taken.iter().flat_map(|&g| groups[g].clone()).collect();
                for &g in taken.iter().rev() {
                    groups.remove(g);
                }
                groups.push(merged);
            }
            None => break,
        }
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut out: Vec<SpectralCluster> = groups
        .into_iter()
        .map(|g| {
            let c = centroid(&ev, &g);
            let off = (c.norm() - 1.0).abs();
            let mut arg = c.arg();
            if arg < 0.0 {
                arg += two_pi;
            }
            if arg >= two_pi - 1e-14 {
                arg = 0.0;
            }
            SpectralCluster {
                re: c.re,
                im: c.im,
                arg,
                alg_mult: g.len(),
                on_unit: off < tol.eig,
                ambiguous: !off.is_finite() || (off >= tol.eig && off < 100.0 * tol.eig),
            }
        })
        .collect();
    out.sort_by(|a, b| a.arg.total_cmp(&b.arg).then(a.re.total_cmp(&b.re)));
    out
}

/// Total algebraic multiplicity of the unit-circle spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticHeight {
    pub value: usize,
    /// Some eigenvalue sits in the ambiguity band around the circle.
    pub ambiguous: bool,
}

pub fn elliptic_height(m: &SymplecticMatrix, tol: &Tolerances) -> EllipticHeight {
    let cl = unit_clusters(m, tol);
    EllipticHeight {
        value: cl.iter().filter(|c| c.on_unit).map(|c| c.alg_mult).sum(),
        ambiguous: cl.iter().any(|c| c.ambiguous),
    }
}

/// `dim_C ker(M − ωI)` with singular values below `kernel_tol·max(1, σ_max)` counted as zero.
pub fn nu_omega(m: &SymplecticMatrix, omega: Complex64, kernel_tol: f64) -> usize {
    let k2 = 2 * m.dim_half();
    let a = to_complex(m.matrix()) - crate::linalg::CMat::identity(k2, k2) * omega;
    kernel_dim_c(&a, kernel_tol)
}

/// [`nu_omega`] re-evaluated at `tol/10` and `tol·10`; disagreement is an error.
pub fn nu_omega_checked(m: &SymplecticMatrix, omega: Complex64, tol: &Tolerances) -> Result<usize> {
    if (omega.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("ω = {omega} is not on the unit circle")));
    }
    let v = nu_omega(m, omega, tol.kernel);
    let lo = nu_omega(m, omega, tol.kernel / 10.0);
    let hi = nu_omega(m, omega, tol.kernel * 10.0);
    if v != lo || v != hi {
        return Err(Error::Unstable(format!("ν_ω changes with kernel tolerance: {lo}, {v}, {hi}")));
    }
    Ok(v)
}

/// `dim(M L_j ∩ L_j)`: the kernel of `B` for `L0` and of `C` for `L1`.
pub fn nu_lagrangian(m: &SymplecticMatrix, j: Lagrangian, kernel_tol: f64) -> usize {
    let (_, b, c, _) = blocks(m.matrix());
    let blk: &Mat = match j {
        Lagrangian::L0 => &b,
        Lagrangian::L1 => &c,
    };
    let scale = 1.0f64.max(max_abs(m.matrix()));
    let s = singular_values(&blk);
    s.iter().filter(|&&x| x < kernel_tol * scale).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{basic_normal_form, diamond, NormalForm};

    fn rot(t: f64) -> SymplecticMatrix {
        basic_normal_form(NormalForm::R { theta: t }).unwrap()
    }

    #[test]
    fn nu_of_identity_and_rotation() {
        let tol = Tolerances::default();
        let i = SymplecticMatrix::identity(3);
        assert_eq!(nu_omega(&i, Complex64::new(1.0, 0.0), tol.kernel), 6);
        let t = 0.9;
        assert_eq!(nu_omega_checked(&rot(t), Complex64::from_polar(1.0, t), &tol).unwrap(), 1);
        let d = basic_normal_form(NormalForm::D { lambda: 2.0 }).unwrap();
        for a in [0.0, 1.0, 3.0] {
            assert_eq!(nu_omega(&d, Complex64::from_polar(1.0, a), tol.kernel), 0);
        }
    }

    #[test]
    fn nu_lagrangian_examples() {
        let tol = Tolerances::default();
        let i = SymplecticMatrix::identity(2);
        assert_eq!(nu_lagrangian(&i, Lagrangian::L0, tol.kernel), 2);
        assert_eq!(nu_lagrangian(&i, Lagrangian::L1, tol.kernel), 2);
        assert_eq!(nu_lagrangian(&rot(std::f64::consts::FRAC_PI_2), Lagrangian::L0, tol.kernel), 0);
    }

    #[test]
    fn heights() {
        let tol = Tolerances::default();
        let r = rot(0.7);
        let d = basic_normal_form(NormalForm::D { lambda: 2.0 }).unwrap();
        assert_eq!(elliptic_height(&diamond(&r, &diamond(&r, &r)), &tol).value, 6);
        assert_eq!(elliptic_height(&d, &tol).value, 0);
        assert_eq!(elliptic_height(&diamond(&d, &r), &tol).value, 2);
        let n1 = basic_normal_form(NormalForm::N1 { lambda: 1.0, b: 1.0 }).unwrap();
        assert_eq!(elliptic_height(&diamond(&n1, &d), &tol).value, 2);
    }
}
