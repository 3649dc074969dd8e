//! Symplectic linear algebra: group membership, the ⋄-product, basic normal forms,
//! the N-transform and the spectral invariants of single matrices.

mod invariants;
pub mod json;
mod normal_forms;
mod spectrum;

pub use invariants::{approx_equivalent, approx_invariants, ApproxInvariants, Equivalence, SplittingEntry, UnitEigen};
pub use normal_forms::{basic_normal_form, n2_block, n2_is_trivial, NormalForm};
pub use spectrum::{elliptic_height, nu_lagrangian, nu_omega, nu_omega_checked, unit_clusters, EllipticHeight, SpectralCluster};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{blocks, diamond_raw, from_blocks, half_dim, inverse, j_matrix, max_abs, n_matrix, Mat};
use crate::tol::Tolerances;

/// A `2k × 2k` real matrix with `MᵀJ_kM = J_k` up to tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymplecticMatrix {
    k: usize,
    m: Mat,
}

impl SymplecticMatrix {
    /// Validates with the default symplectic tolerance.
    pub fn new(m: Mat) -> Result<Self> {
        Self::with_tol(m, Tolerances::default().symplectic)
    }

    pub fn with_tol(m: Mat, tol: f64) -> Result<Self> {
        let k = half_dim(&m)?;
        let defect = symplectic_defect(&m);
        if defect > tol {
            return Err(Error::NotSymplectic { defect, tol });
        }
        if m.determinant() <= 0.0 {
            return Err(Error::NotSymplectic { defect: f64::NAN, tol });
        }
        Ok(SymplecticMatrix { k, m })
    }

    /// Wraps without validation; callers guarantee membership.
    pub(crate) fn from_trusted(m: Mat) -> Self {
        let k = m.nrows() / 2;
        SymplecticMatrix { k, m }
    }

    pub fn identity(k: usize) -> Self {
        SymplecticMatrix { k, m: Mat::identity(2 * k, 2 * k) }
    }

    pub fn dim_half(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn into_matrix(self) -> Mat {
        self.m
    }

    /// Blocks `(A, B, C, D)`.
    pub fn blocks(&self) -> (Mat, Mat, Mat, Mat) {
        blocks(&self.m)
    }

    /// Inverse via `M⁻¹ = −J Mᵀ J`.
    pub fn inverse(&self) -> SymplecticMatrix {
        let j = j_matrix(self.k);
        SymplecticMatrix::from_trusted(-(&j * self.m.transpose() * &j))
    }

    pub fn mul(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix::from_trusted(&self.m * &other.m)
    }

    pub fn transpose(&self) -> SymplecticMatrix {
        SymplecticMatrix::from_trusted(self.m.transpose())
    }

    pub fn pow(&self, e: usize) -> SymplecticMatrix {
        let mut acc = Mat::identity(2 * self.k, 2 * self.k);
        for _ in 0..e {
            acc = &acc * &self.m;
        }
        SymplecticMatrix::from_trusted(acc)
    }
}

/// The Lagrangian subspaces `L0 = {0} × Rᵏ` and `L1 = Rᵏ × {0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lagrangian {
    L0,
    L1,
}

impl Lagrangian {
    pub fn from_index(j: u8) -> Result<Self> {
        match j {
            0 => Ok(Lagrangian::L0),
            1 => Ok(Lagrangian::L1),
            _ => Err(Error::Domain(format!("Lagrangian index must be 0 or 1, got {j}"))),
        }
    }

    /// `2k × k` frame spanning the subspace.
    pub fn frame(self, k: usize) -> Mat {
        let mut f = Mat::zeros(2 * k, k);
        let off = match self {
            Lagrangian::L0 => k,
            Lagrangian::L1 => 0,
        };
        for i in 0..k {
            f[(off + i, i)] = 1.0;
        }
        f
    }

    pub fn other(self) -> Self {
        match self {
            Lagrangian::L0 => Lagrangian::L1,
            Lagrangian::L1 => Lagrangian::L0,
        }
    }
}

/// Inertia `(m⁺, m⁰, m⁻)` of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct InertiaTriple {
    pub m_plus: usize,
    pub m_zero: usize,
    pub m_minus: usize,
}

impl InertiaTriple {
    pub fn signature(&self) -> i64 {
        self.m_plus as i64 - self.m_minus as i64
    }

    pub fn dim(&self) -> usize {
        self.m_plus + self.m_zero + self.m_minus
    }

    pub fn add(&self, o: &InertiaTriple) -> InertiaTriple {
        InertiaTriple {
            m_plus: self.m_plus + o.m_plus,
            m_zero: self.m_zero + o.m_zero,
            m_minus: self.m_minus + o.m_minus,
        }
    }
}

/// `max |MᵀJM − J|`.
pub fn symplectic_defect(m: &Mat) -> f64 {
    let k = m.nrows() / 2;
    let j = j_matrix(k);
    max_abs(&(m.transpose() * &j * m - j))
}

/// True iff `‖MᵀJM − J‖∞ ≤ tol`.
pub fn check_symplectic(m: &Mat, tol: f64) -> Result<bool> {
    half_dim(m)?;
    Ok(symplectic_defect(m) <= tol)
}

/// The ⋄-product.
pub fn diamond(m1: &SymplecticMatrix, m2: &SymplecticMatrix) -> SymplecticMatrix {
    SymplecticMatrix::from_trusted(diamond_raw(&m1.m, &m2.m))
}

/// Validating ⋄-product for raw inputs.
pub fn diamond_checked(m1: &Mat, m2: &Mat, tol: f64) -> Result<SymplecticMatrix> {
    let a = SymplecticMatrix::with_tol(m1.clone(), tol)?;
    let b = SymplecticMatrix::with_tol(m2.clone(), tol)?;
    Ok(diamond(&a, &b))
}

/// `M^{⋄p}`; `p = 0` gives the empty (0×0) matrix.
pub fn diamond_power(m: &SymplecticMatrix, p: usize) -> SymplecticMatrix {
    let mut acc = Mat::zeros(0, 0);
    for _ in 0..p {
        acc = diamond_raw(&acc, &m.m);
    }
    SymplecticMatrix::from_trusted(acc)
}

/// `N_k M⁻¹ N_k M`, evaluated by the closed form `I + 2[[BᵀC, BᵀD], [AᵀC, CᵀB]]`
/// and checked against the direct product.
pub fn n_transform(m: &SymplecticMatrix) -> Result<SymplecticMatrix> {
    let k = m.k;
    let closed = n_transform_closed(&m.m);
    let n = n_matrix(k);
    let direct = &n * inverse(&m.m)? * &n * &m.m;
    let scale = 1.0 + max_abs(&m.m).powi(2);
    let gap = max_abs(&(&closed - &direct));
    if gap > 1e-10 * scale {
        return Err(Error::Conditioning(format!("N-transform routes disagree by {gap:.3e}")));
    }
    Ok(SymplecticMatrix::from_trusted(closed))
}

/// Closed form of the N-transform without any check.
pub fn n_transform_closed(m: &Mat) -> Mat {
    let k = m.nrows() / 2;
    let (a, b, c, d) = blocks(m);
    let bt = b.transpose();
    let core = from_blocks(&(&bt * &c), &(&bt * &d), &(a.transpose() * &c), &(c.transpose() * &b));
    Mat::identity(2 * k, 2 * k) + core * 2.0
}

/// `diag(Q, Q^{-T})`, the block form used by (L0, L1)-equivalence.
pub fn block_transform(q: &Mat) -> Result<SymplecticMatrix> {
    let qinv_t = inverse(q)?.transpose();
    let k = q.nrows();
    let z = Mat::zeros(k, k);
    Ok(SymplecticMatrix::from_trusted(from_blocks(q, &z, &z, &qinv_t)))
}

/// Embeds a vector of length `k` into `L0` (second coordinate block).
pub fn embed_l0(q: &DVector<f64>) -> DVector<f64> {
    let k = q.len();
    let mut x = DVector::zeros(2 * k);
    x.rows_mut(k, k).copy_from(q);
    x
}
