//! Dense linear-algebra helpers shared by the index and signature code.

use nalgebra::{ComplexField, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// `J_k = [[0, −I], [I, 0]]`.
pub fn j_matrix(k: usize) -> Mat {
    let mut j = Mat::zeros(2 * k, 2 * k);
    for i in 0..k {
        j[(i, k + i)] = -1.0;
        j[(k + i, i)] = 1.0;
    }
    j
}

/// `N_k = diag(−I, I)`.
pub fn n_matrix(k: usize) -> Mat {
    let mut d = DVector::from_element(2 * k, 1.0);
    for i in 0..k {
        d[i] = -1.0;
    }
    Mat::from_diagonal(&d)
}

/// Half dimension of a `2k × 2k` matrix.
pub fn half_dim(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    if m.nrows() % 2 != 0 || m.nrows() == 0 {
        return Err(Error::Dimension(format!("order {} is not a positive even number", m.nrows())));
    }
    Ok(m.nrows() / 2)
}

/// The four `k × k` blocks `(A, B, C, D)`.
pub fn blocks(m: &Mat) -> (Mat, Mat, Mat, Mat) {
    let k = m.nrows() / 2;
    (
        m.view((0, 0), (k, k)).into_owned(),
        m.view((0, k), (k, k)).into_owned(),
        m.view((k, 0), (k, k)).into_owned(),
        m.view((k, k), (k, k)).into_owned(),
    )
}

pub fn from_blocks(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Mat {
    let k = a.nrows();
    let mut m = Mat::zeros(2 * k, 2 * k);
    m.view_mut((0, 0), (k, k)).copy_from(a);
    m.view_mut((0, k), (k, k)).copy_from(b);
    m.view_mut((k, 0), (k, k)).copy_from(c);
    m.view_mut((k, k), (k, k)).copy_from(d);
    m
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub type Svd<T> = nalgebra::SVD<T, Dyn, Dyn>;

fn svd_defect<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, s: &Svd<T>) -> f64 {
    let (Some(u), Some(vt)) = (&s.u, &s.v_t) else { return f64::INFINITY };
    let sig = DMatrix::from_diagonal(&s.singular_values.map(T::from_real));
    let recon = (u * sig * vt - m).iter().fold(0.0f64, |a, z| a.max(z.clone().modulus()));
    let scale = m.iter().fold(1.0f64, |a, z| a.max(z.clone().modulus()));
    let orth_u = (u.adjoint() * u - DMatrix::<T>::identity(u.ncols(), u.ncols())).iter().fold(0.0f64, |a, z| a.max(z.clone().modulus()));
    let orth_v = (vt * vt.adjoint() - DMatrix::<T>::identity(vt.nrows(), vt.nrows())).iter().fold(0.0f64, |a, z| a.max(z.clone().modulus()));
    (recon / scale).max(orth_u).max(orth_v)
}

/// Thin SVD with both factors, checked by reconstruction. The bidiagonal sweep of
/// nalgebra occasionally returns inconsistent factors on exactly rank-deficient
/// input; such attempts are repeated on reflected copies `H·M` or `M·H`.
pub fn svd<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Svd<T> {
    let (r, c) = m.shape();
    let tol = 1e-12 * (r.max(c).max(1) as f64);
    let mut best: Option<(f64, Svd<T>)> = None;
    for attempt in 0..5 {
        let (left, right) = match attempt {
            0 => (None, None),
            1 | 3 if r > 1 => (Some(reflector(r, attempt).map(T::from_real)), None),
            2 | 4 if c > 1 => (None, Some(reflector(c, attempt).map(T::from_real))),
            _ => continue,
        };
        let mut a = m.clone();
        if let Some(h) = &left {
            a = h * a;
        }
        if let Some(h) = &right {
            a *= h;
        }
        let Some(mut s) = a.try_svd(true, true, f64::EPSILON, 10_000) else { continue };
        if let (Some(h), Some(u)) = (&left, &s.u) {
            s.u = Some(h * u);
        }
        if let (Some(h), Some(vt)) = (&right, &s.v_t) {
            s.v_t = Some(vt * h);
        }
        let d = svd_defect(m, &s);
        if d <= tol {
            return s;
        }
        if best.as_ref().is_none_or(|(e, _)| d < *e) {
            best = Some((d, s));
        }
    }
    best.map(|(_, s)| s).expect("SVD did not converge on any reflected copy")
}

/// Singular values (in the order of [`svd`]).
pub fn singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(0);
    }
    svd(m).singular_values
}

/// Singular values of a complex matrix, descending.
pub fn singular_values_c(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = singular_values(m).iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Number of singular values below `tol · max(1, σ_max)`.
pub fn kernel_dim_c(m: &CMat, tol: f64) -> usize {
    let s = singular_values_c(m);
    let scale = s.first().copied().unwrap_or(0.0).max(1.0);
    s.iter().filter(|&&x| x < tol * scale).count()
}

/// Numerical rank with threshold `tol · σ_max`.
pub fn rank(m: &Mat, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let s = singular_values(m);
    let smax = s.iter().fold(0.0_f64, |a, &x| a.max(x));
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > tol * smax).count()
}

/// Eigenvalues of a symmetric matrix (symmetrized first), ascending.
pub fn sym_eigenvalues(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut e: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e
}

// Unbounded Schur sweeps can stall on exactly repeated spectra, so every attempt is
// capped and retried after a fixed orthogonal similarity.
const SCHUR_SWEEPS: usize = 400;

fn reflector(n: usize, salt: usize) -> Mat {
    let v = DVector::from_fn(n, |i, _| 1.0 + ((i + 1) * (salt + 2)) as f64 * 0.618_033_988_749_894_9 % 1.0);
    Mat::identity(n, n) - (&v * v.transpose()) * (2.0 / v.norm_squared())
}

fn finite(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Complex eigenvalues of a complex matrix.
pub fn eigenvalues_c(m: &CMat) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    for salt in 0..4 {
        let a = if salt == 0 {
            m.clone()
        } else {
            let q = reflector(n, salt).map(|x| Complex64::new(x, 0.0));
            &q * m * &q
        };
        if let Some(s) = nalgebra::Schur::try_new(a, f64::EPSILON, SCHUR_SWEEPS * n) {
            if let Some(v) = s.eigenvalues() {
                let v: Vec<Complex64> = v.iter().copied().collect();
                if finite(&v) {
                    return v;
                }
            }
        }
    }
    vec![Complex64::new(f64::NAN, f64::NAN); n]
}

/// Complex eigenvalues of a real matrix.
pub fn eigenvalues_r(m: &Mat) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    for salt in 0..4 {
        let a = if salt == 0 {
            m.clone()
        } else {
            let q = reflector(n, salt);
            &q * m * &q
        };
        if let Some(s) = nalgebra::Schur::try_new(a, f64::EPSILON, SCHUR_SWEEPS * n) {
            let v: Vec<Complex64> = s.complex_eigenvalues().iter().copied().collect();
            if finite(&v) {
                return v;
            }
        }
    }
    eigenvalues_c(&m.map(|x| Complex64::new(x, 0.0)))
}

/// Inverse with a relative conditioning guard.
pub fn inverse(m: &Mat) -> Result<Mat> {
    let s = singular_values(m);
    let smax = s.iter().fold(0.0_f64, |a, &x| a.max(x));
    let smin = s.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    if smax == 0.0 || smin < 1e-13 * smax {
        return Err(Error::Conditioning(format!("matrix singular to working precision (σmin/σmax = {:.2e})", smin / smax.max(f64::MIN_POSITIVE))));
    }
    m.clone().try_inverse().ok_or_else(|| Error::Conditioning("inverse failed".into()))
}

/// `M₁ ⋄ M₂` for arbitrary square matrices of even order.
pub fn diamond_raw(m1: &Mat, m2: &Mat) -> Mat {
    let k1 = m1.nrows() / 2;
    let k2 = m2.nrows() / 2;
    let k = k1 + k2;
    let mut m = Mat::zeros(2 * k, 2 * k);
    for (src, off, kk) in [(m1, 0usize, k1), (m2, k1, k2)] {
        for i in 0..2 * kk {
            for j in 0..2 * kk {
                let ri = if i < kk { off + i } else { k + off + (i - kk) };
                let cj = if j < kk { off + j } else { k + off + (j - kk) };
                m[(ri, cj)] = src[(i, j)];
            }
        }
    }
    m
}

/// `⋄` of a list; the empty product is the 0×0 matrix.
pub fn diamond_all(ms: &[Mat]) -> Mat {
    let mut acc = Mat::zeros(0, 0);
    for m in ms {
        acc = diamond_raw(&acc, m);
    }
    acc
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let (r1, c1) = a.shape();
    let (r2, c2) = b.shape();
    let mut m = Mat::zeros(r1 + r2, c1 + c2);
    m.view_mut((0, 0), (r1, c1)).copy_from(a);
    m.view_mut((r1, c1), (r2, c2)).copy_from(b);
    m
}

/// Orthonormal basis of the column space, via SVD.
pub fn range_basis(m: &Mat, tol: f64) -> Mat {
    let r = rank(m, tol);
    let svd = svd(m);
    let u = svd.u.unwrap();
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    Mat::from_fn(m.nrows(), r, |i, j| u[(i, idx[j])])
}

/// Orthonormal basis of the null space, via SVD of the full square Gram route.
pub fn null_basis(m: &Mat, tol: f64) -> Mat {
    let n = m.ncols();
    let r = rank(m, tol);
    if r == n {
        return Mat::zeros(n, 0);
    }
    // right singular vectors of the smallest singular values
    let gram = m.transpose() * m;
    let eig = symmetrize(&gram).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    Mat::from_fn(n, n - r, |i, j| eig.eigenvectors[(i, idx[j])])
}

/// Principal angle of `z` in `[lo, lo + 2π)`.
pub fn angle_from(z: Complex64, lo: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = z.arg();
    while a < lo {
        a += two_pi;
    }
    while a >= lo + two_pi {
        a -= two_pi;
    }
    a
}

/// Wraps an angle difference into `(−π, π]`.
pub fn wrap(d: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut x = d % (2.0 * pi);
    if x > pi {
        x -= 2.0 * pi;
    } else if x <= -pi {
        x += 2.0 * pi;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diamond_of_identities_is_identity() {
        let m = diamond_raw(&Mat::identity(2, 2), &Mat::identity(4, 4));
        assert_eq!(m, Mat::identity(6, 6));
    }

    #[test]
    fn diamond_places_blocks() {
        let a = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = Mat::from_row_slice(2, 2, &[5.0, 6.0, 7.0, 8.0]);
        let m = diamond_raw(&a, &b);
        let expect = Mat::from_row_slice(
            4,
            4,
            &[1.0, 0.0, 2.0, 0.0, 0.0, 5.0, 0.0, 6.0, 3.0, 0.0, 4.0, 0.0, 0.0, 7.0, 0.0, 8.0],
        );
        assert_eq!(m, expect);
    }

    #[test]
    fn wrap_and_angle() {
        assert!((wrap(3.5 * std::f64::consts::PI) + 0.5 * std::f64::consts::PI).abs() < 1e-12);
        let z = Complex64::from_polar(1.0, -0.1);
        assert!((angle_from(z, 0.0) - (2.0 * std::f64::consts::PI - 0.1)).abs() < 1e-12);
    }

    #[test]
    fn null_and_range_bases() {
        let m = Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
        let n = null_basis(&m, 1e-10);
        assert_eq!(n.ncols(), 1);
        assert!((n[(1, 0)].abs() - 1.0).abs() < 1e-12);
        assert_eq!(range_basis(&m, 1e-10).ncols(), 2);
    }
}
