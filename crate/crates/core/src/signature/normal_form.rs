use serde::{Deserialize, Serialize};

use super::inertia;
use crate::error::{Error, Result};
use crate::linalg::{blocks, diamond_all, from_blocks, inverse, max_abs, singular_values, svd, symmetrize, Mat};
use crate::symplectic::{approx_equivalent, n_transform, Equivalence, InertiaTriple, NormalForm, SymplecticMatrix};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorTag {
    /// `[[A1, I_r], [A3, A2]]` with invertible `A3`.
    InvertibleA3Core,
    /// `[[D1, 0], [D3, D2]]`, the part on which `B` vanishes.
    DiagComplement,
    /// The reduced form with `A3 = 0`.
    A3ZeroCore,
    /// `[[I, 0], [C, I]]` (or with `diag(−1, 1, …)` on the diagonal), for `B = 0`.
    ShearCore,
    /// `[[A, I], [C, D]]` (or with `diag(−1, 1, …)` in place of `I`), for invertible `B`.
    InvertibleBCore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedFactor {
    pub tag: FactorTag,
    pub matrix: SymplecticMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum NormalFormCase {
    ZeroB,
    InvertibleB,
    InvertibleA3,
    PartialA3 { rank_a3: usize },
    ZeroA3,
}

/// A `≈`-decomposition into basic normal forms, confirmed by comparing invariant lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxCheck {
    pub factors: Vec<(NormalForm, usize)>,
    pub verdict: Equivalence,
}

/// Data of the `A3 = 0` reduction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCoreData {
    pub r: usize,
    /// `m⁺(A1)`.
    pub p: usize,
    /// `rank B3`.
    pub lambda: usize,
    pub q_plus: usize,
    pub q_zero: usize,
    pub q_minus: usize,
    /// `m*(AᵀC)` of the core itself.
    pub inertia_ac: InertiaTriple,
    /// `m⁺(AᵀC) = λ + q⁺`, `m⁰(AᵀC) = r − λ + q⁰`, `m⁻(AᵀC) = λ + q⁻`.
    pub inertia_identities_hold: bool,
    /// `N R⁻¹ N R ≈ N1(1,1)^{p+q⁻} ⋄ N1(1,−1)^{r−p+q⁺} ⋄ I₂^{q⁰} ⋄ D(2)^λ`.
    pub n_transform_class: ApproxCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub case: NormalFormCase,
    pub rank_b: usize,
    pub factors: Vec<TaggedFactor>,
    /// `R = P1 · (⋄ factors) · P2` with `P_j = diag(Q_j, Q_j^{-T})`, `det Q_j > 0`.
    pub p1: Mat,
    pub p2: Mat,
    pub reassembly_error: f64,
    pub inertia_ac: InertiaTriple,
    pub inertia_bd: InertiaTriple,
    /// The inertia pairs of the input equal those summed over the factors.
    pub invariants_preserved: bool,
    pub zero_core: Option<ZeroCoreData>,
    /// For a pure shear `[[I, 0], [C, I]]`: `≈ I₂^{m⁰(C)} ⋄ N1(1,1)^{m⁻(C)} ⋄ N1(1,−1)^{m⁺(C)}`.
    pub shear_class: Option<ApproxCheck>,
}

/// Rank with singular values measured against `scale`; values inside the band
/// `[tol/100, 100·tol]·scale` make the rank indeterminate.
fn decided_rank(m: &Mat, scale: f64, tol: f64) -> Result<usize> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let s = singular_values(m);
    let lo = tol / 100.0 * scale;
    let hi = tol * 100.0 * scale;
    let firm = s.iter().filter(|&&x| x > hi).count();
    let band = s.iter().filter(|&&x| x >= lo && x <= hi).count();
    if band > 0 {
        return Err(Error::Indeterminate(format!(
            "indeterminate branch: rank is between {firm} and {}",
            firm + band
        )));
    }
    Ok(firm)
}

/// Column space (first `r` left singular vectors) and null space (last `n − r` right
/// singular vectors) for a rank already decided by [`decided_rank`].
fn svd_split(m: &Mat, r: usize) -> (Mat, Mat) {
    let n = m.ncols();
    let svd = svd(m);
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    // full V when m is square; pad through the Gram matrix otherwise
    let v = if vt.nrows() == n {
        Mat::from_fn(n, n, |i, j| vt[(idx[j], i)])
    } else {
        let e = symmetrize(&(m.transpose() * m)).symmetric_eigen();
        let mut o: Vec<usize> = (0..n).collect();
        o.sort_by(|&a, &b| e.eigenvalues[b].partial_cmp(&e.eigenvalues[a]).unwrap());
        Mat::from_fn(n, n, |i, j| e.eigenvectors[(i, o[j])])
    };
    let range = Mat::from_fn(m.nrows(), r, |i, j| u[(i, idx[j])]);
    let null = v.columns(r, n - r).into_owned();
    (range, null)
}

fn flip_det(m: &mut Mat, col: usize) {
    if m.determinant() < 0.0 {
        for i in 0..m.nrows() {
            m[(i, col)] = -m[(i, col)];
        }
    }
}

fn e_sign(k: usize) -> Mat {
    let mut e = Mat::identity(k, k);
    e[(0, 0)] = -1.0;
    e
}

/// `R = diag(Q1, Q1^{-T}) · W · diag(Q2, Q2^{-T})`, updated one congruence at a time.
struct Reduction {
    k: usize,
    w: Mat,
    q1: Mat,
    q2: Mat,
}

impl Reduction {
    /// `W ← diag(L, L^{-T}) W diag(T, T^{-T})`.
    fn apply(&mut self, l: &Mat, t: &Mat) -> Result<()> {
        if l.determinant() <= 0.0 || t.determinant() <= 0.0 {
            return Err(Error::Conditioning("congruence factor with non-positive determinant".into()));
        }
        let k = self.k;
        let z = Mat::zeros(k, k);
        let li = inverse(l)?;
        let ti = inverse(t)?;
        let left = from_blocks(l, &z, &z, &li.transpose());
        let right = from_blocks(t, &z, &z, &ti.transpose());
        self.w = left * &self.w * right;
        self.q1 = &self.q1 * li;
        self.q2 = ti * &self.q2;
        Ok(())
    }

    fn blk(&self, which: usize, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Mat {
        let (ro, co) = match which {
            0 => (0, 0),
            1 => (0, self.k),
            2 => (self.k, 0),
            _ => (self.k, self.k),
        };
        self.w.view((ro + rows.start, co + cols.start), (rows.len(), cols.len())).into_owned()
    }

    fn p(&self, q: &Mat) -> Result<Mat> {
        let z = Mat::zeros(self.k, self.k);
        Ok(from_blocks(q, &z, &z, &inverse(q)?.transpose()))
    }
}

/// The symplectic submatrix on coordinates `idx` (and their conjugates).
fn sub_symplectic(w: &Mat, idx: &[usize]) -> Mat {
    let k = w.nrows() / 2;
    let all: Vec<usize> = idx.iter().copied().chain(idx.iter().map(|i| i + k)).collect();
    Mat::from_fn(all.len(), all.len(), |i, j| w[(all[i], all[j])])
}

/// Largest entry coupling `idx` to its complement.
fn coupling(w: &Mat, idx: &[usize]) -> f64 {
    let k = w.nrows() / 2;
    let inside = |i: usize| idx.contains(&(i % k));
    let mut g = 0.0f64;
    for i in 0..2 * k {
        for j in 0..2 * k {
            if inside(i) != inside(j) {
                g = g.max(w[(i, j)].abs());
            }
        }
    }
    g
}

fn inertia_pair(m: &Mat, tol: &Tolerances) -> Result<(InertiaTriple, InertiaTriple)> {
    let (a, b, c, d) = blocks(m);
    Ok((
        inertia(&symmetrize(&(a.transpose() * c)), tol.inertia)?,
        inertia(&symmetrize(&(b.transpose() * d)), tol.inertia)?,
    ))
}

/// Null-space basis of `m` by Gaussian elimination with partial pivoting.
fn null_basis_elimination(m: &Mat, piv_tol: f64) -> Mat {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let (best, val) = (row..rows).map(|i| (i, a[(i, col)].abs())).fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= piv_tol {
            continue;
        }
        a.swap_rows(row, best);
        let pv = a[(row, col)];
        for j in 0..cols {
            a[(row, j)] /= pv;
        }
        for i in 0..rows {
            if i != row {
                let f = a[(i, col)];
                if f != 0.0 {
                    for j in 0..cols {
                        a[(i, j)] -= f * a[(row, j)];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Mat::zeros(cols, free.len());
    for (n, &f) in free.iter().enumerate() {
        basis[(f, n)] = 1.0;
        for (r, &pc) in pivots.iter().enumerate() {
            basis[(pc, n)] = -a[(r, f)];
        }
    }
    basis
}

fn shear_class(c: &Mat, tol: &Tolerances) -> Result<(InertiaTriple, Vec<(NormalForm, usize)>)> {
    let t = inertia(&symmetrize(c), tol.inertia)?;
    Ok((
        t,
        vec![
            (NormalForm::N1 { lambda: 1.0, b: 0.0 }, t.m_zero),
            (NormalForm::N1 { lambda: 1.0, b: 1.0 }, t.m_minus),
            (NormalForm::N1 { lambda: 1.0, b: -1.0 }, t.m_plus),
        ],
    ))
}

fn class_matrix(factors: &[(NormalForm, usize)]) -> Result<SymplecticMatrix> {
    let mut mats = Vec::new();
    for (f, n) in factors {
        let m = f.matrix()?.into_matrix();
        for _ in 0..*n {
            mats.push(m.clone());
        }
    }
    Ok(SymplecticMatrix::from_trusted(diamond_all(&mats)))
}

/// Analysis of a reduced form with `A3 = 0`: `W = [[A1, B1, I, 0], [0, D1, 0, 0],
/// [0, B3, A2, 0], [C3, D3, C2, D2]]` in blocks of sizes `(r, k − r)`.
fn zero_core(w: &Mat, r: usize, tol: &Tolerances) -> Result<ZeroCoreData> {
    let k = w.nrows() / 2;
    let scale = 1.0f64.max(max_abs(w));
    let g = |ro: usize, co: usize, nr: usize, nc: usize| w.view((ro, co), (nr, nc)).into_owned();
    let a1 = g(0, 0, r, r);
    let b1 = g(0, r, r, k - r);
    let d1 = g(r, r, k - r, k - r);
    let b3 = g(k, r, r, k - r);
    let d3 = g(k + r, r, k - r, k - r);
    let a2 = g(k, k, r, r);
    if max_abs(&(&a1 - a1.transpose())) > 1e-8 * scale || max_abs(&(&a1 * &a2 - Mat::identity(r, r))) > 1e-8 * scale {
        return Err(Error::Conditioning("reduced core violates A1 = A1ᵀ, A1·A2 = I".into()));
    }
    let p = inertia(&symmetrize(&a1), tol.inertia)?.m_plus;
    let lambda = decided_rank(&b3, scale, tol.rank)?;
    let e2 = symmetrize(&(b1.transpose() * &b3 + d1.transpose() * &d3));
    // two independent kernel bases of B3 must give congruent restrictions of E2
    let (_, k_svd) = svd_split(&b3, lambda);
    let k_elim = null_basis_elimination(&b3, tol.rank * scale);
    if k_svd.ncols() != k - r - lambda || k_elim.ncols() != k - r - lambda {
        return Err(Error::Indeterminate(format!(
            "kernel of B3 has dimension {} / {} instead of {}",
            k_svd.ncols(),
            k_elim.ncols(),
            k - r - lambda
        )));
    }
    let u4 = inertia(&symmetrize(&(k_svd.transpose() * &e2 * &k_svd)), tol.inertia)?;
    let u4b = inertia(&symmetrize(&(k_elim.transpose() * &e2 * &k_elim)), tol.inertia)?;
    if u4 != u4b {
        return Err(Error::Unstable(format!("elimination orders give different inertia for U4: {u4:?} vs {u4b:?}")));
    }
    let (inertia_ac, _) = inertia_pair(w, tol)?;
    let identities = inertia_ac.m_plus == lambda + u4.m_plus
        && inertia_ac.m_zero == r - lambda + u4.m_zero
        && inertia_ac.m_minus == lambda + u4.m_minus;
    let factors = vec![
        (NormalForm::N1 { lambda: 1.0, b: 1.0 }, p + u4.m_minus),
        (NormalForm::N1 { lambda: 1.0, b: -1.0 }, r - p + u4.m_plus),
        (NormalForm::N1 { lambda: 1.0, b: 0.0 }, u4.m_zero),
        (NormalForm::D { lambda: 2.0 }, lambda),
    ];
    let target = class_matrix(&factors)?;
    let nt = n_transform(&SymplecticMatrix::from_trusted(w.clone()))?;
    let verdict = approx_equivalent(&nt, &target, tol);
    Ok(ZeroCoreData {
        r,
        p,
        lambda,
        q_plus: u4.m_plus,
        q_zero: u4.m_zero,
        q_minus: u4.m_minus,
        inertia_ac,
        inertia_identities_hold: identities,
        n_transform_class: ApproxCheck { factors, verdict },
    })
}

/// (L0, L1)-normal form: a factorization `R = P1 · (F1 ⋄ F2) · P2` by block-diagonal
/// transforms, chosen by `rank B` and the rank of the `A3` block of the reduced form.
pub fn normal_form_l0l1(m: &SymplecticMatrix, tol: &Tolerances) -> Result<NormalFormReport> {
    let k = m.dim_half();
    let r_in = m.matrix();
    let scale = 1.0f64.max(max_abs(r_in));
    let (a, b, _, _) = m.blocks();
    let rank_b = decided_rank(&b, scale, tol.rank)?;
    let mut red = Reduction { k, w: r_in.clone(), q1: Mat::identity(k, k), q2: Mat::identity(k, k) };
    let mut factors = Vec::new();
    let mut zero = None;
    let mut shear = None;
    let case;
    if rank_b == 0 {
        case = NormalFormCase::ZeroB;
        let ai = inverse(&a)?;
        if a.determinant() > 0.0 {
            red.apply(&ai, &Mat::identity(k, k))?;
            let (_, _, c, _) = blocks(&red.w);
            let (_, fs) = shear_class(&c, tol)?;
            let target = class_matrix(&fs)?;
            let verdict = approx_equivalent(&SymplecticMatrix::from_trusted(red.w.clone()), &target, tol);
            shear = Some(ApproxCheck { factors: fs, verdict });
        } else {
            red.apply(&(e_sign(k) * ai), &Mat::identity(k, k))?;
        }
        factors.push(TaggedFactor { tag: FactorTag::ShearCore, matrix: SymplecticMatrix::from_trusted(red.w.clone()) });
    } else if rank_b == k {
        case = NormalFormCase::InvertibleB;
        let bi = inverse(&b)?;
        let l = if b.determinant() > 0.0 { bi } else { e_sign(k) * bi };
        red.apply(&l, &Mat::identity(k, k))?;
        factors.push(TaggedFactor { tag: FactorTag::InvertibleBCore, matrix: SymplecticMatrix::from_trusted(red.w.clone()) });
    } else {
        let r = rank_b;
        // B = U Σ Vᵀ, sorted descending; the last columns belong to zero singular values
        let svd = svd(&b);
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by(|&x, &y| svd.singular_values[y].partial_cmp(&svd.singular_values[x]).unwrap());
        let u0 = svd.u.as_ref().unwrap();
        let vt0 = svd.v_t.as_ref().unwrap();
        let mut u = Mat::from_fn(k, k, |i, j| u0[(i, idx[j])]);
        let mut v = Mat::from_fn(k, k, |i, j| vt0[(idx[j], i)]);
        flip_det(&mut u, k - 1);
        flip_det(&mut v, k - 1);
        let mut sinv = Mat::identity(k, k);
        for i in 0..r {
            sinv[(i, i)] = 1.0 / svd.singular_values[idx[i]];
        }
        red.apply(&(sinv * u.transpose()), &v)?;
        let mut target_b = Mat::zeros(k, k);
        for i in 0..r {
            target_b[(i, i)] = 1.0;
        }
        let sw = 1.0f64.max(max_abs(&red.w));
        let gap = max_abs(&(red.blk(1, 0..k, 0..k) - &target_b))
            .max(max_abs(&red.blk(0, r..k, 0..r)))
            .max(max_abs(&red.blk(3, 0..r, r..k)));
        if gap > 1e-8 * sw * sw {
            return Err(Error::Conditioning(format!("rank reduction left residual {gap:.2e}")));
        }
        let a3 = red.blk(2, 0..r, 0..r);
        let lam = decided_rank(&a3, sw, tol.rank)?;
        if lam > 0 && lam < r {
            // similarity bringing A3 to diag(Λ, 0); needs a semisimple zero eigenvalue
            let (rb, _) = svd_split(&a3, lam);
            let (_, kb) = svd_split(&a3, lam);
            let mut pm = Mat::zeros(r, r);
            pm.view_mut((0, 0), (r, lam)).copy_from(&rb);
            pm.view_mut((0, lam), (r, r - lam)).copy_from(&kb);
            let smin = singular_values(&pm).iter().fold(f64::INFINITY, |x, &y| x.min(y));
            if smin < 1e-6 {
                return Err(Error::Indeterminate(
                    "A3 has a nilpotent part at eigenvalue 0; no block split by similarity".into(),
                ));
            }
            flip_det(&mut pm, r - 1);
            let mut l = Mat::identity(k, k);
            let mut t = Mat::identity(k, k);
            l.view_mut((0, 0), (r, r)).copy_from(&pm.transpose());
            t.view_mut((0, 0), (r, r)).copy_from(&pm);
            red.apply(&l, &t)?;
        }
        if lam > 0 {
            // clear the couplings C[3,1] and C[1,3] between the Λ block and the B = 0 block
            let lambda_blk = red.blk(2, 0..lam, 0..lam);
            let li = inverse(&lambda_blk)?;
            let c31 = red.blk(2, r..k, 0..lam);
            let x3t = &c31 * &li;
            let mut l = Mat::identity(k, k);
            l.view_mut((0, r), (lam, k - r)).copy_from(&x3t.transpose());
            red.apply(&l, &Mat::identity(k, k))?;
            let c13 = red.blk(2, 0..lam, r..k);
            let z3 = -(&li * &c13);
            let mut t = Mat::identity(k, k);
            t.view_mut((0, r), (lam, k - r)).copy_from(&z3);
            red.apply(&Mat::identity(k, k), &t)?;
            let first: Vec<usize> = (0..lam).collect();
            let rest: Vec<usize> = (lam..k).collect();
            let sw = 1.0f64.max(max_abs(&red.w));
            let cpl = coupling(&red.w, &first);
            if cpl > 1e-8 * sw * sw {
                return Err(Error::Conditioning(format!("block split left coupling {cpl:.2e}")));
            }
            let f1 = sub_symplectic(&red.w, &first);
            let f2 = sub_symplectic(&red.w, &rest);
            factors.push(TaggedFactor { tag: FactorTag::InvertibleA3Core, matrix: SymplecticMatrix::from_trusted(f1) });
            if lam == r {
                case = NormalFormCase::InvertibleA3;
                factors.push(TaggedFactor { tag: FactorTag::DiagComplement, matrix: SymplecticMatrix::from_trusted(f2) });
            } else {
                case = NormalFormCase::PartialA3 { rank_a3: lam };
                zero = Some(zero_core(&f2, r - lam, tol)?);
                factors.push(TaggedFactor { tag: FactorTag::A3ZeroCore, matrix: SymplecticMatrix::from_trusted(f2) });
            }
        } else {
            case = NormalFormCase::ZeroA3;
            zero = Some(zero_core(&red.w, r, tol)?);
            factors.push(TaggedFactor { tag: FactorTag::A3ZeroCore, matrix: SymplecticMatrix::from_trusted(red.w.clone()) });
        }
    }
    if red.q1.determinant() <= 0.0 || red.q2.determinant() <= 0.0 {
        return Err(Error::Conditioning("witness transform with non-positive determinant".into()));
    }
    let p1 = red.p(&red.q1)?;
    let p2 = red.p(&red.q2)?;
    let mats: Vec<Mat> = factors.iter().map(|f| f.matrix.matrix().clone()).collect();
    let rebuilt = &p1 * diamond_all(&mats) * &p2;
    let reassembly_error = max_abs(&(rebuilt - r_in)) / scale;
    let (inertia_ac, inertia_bd) = inertia_pair(r_in, tol)?;
    let mut sum_ac = InertiaTriple::default();
    let mut sum_bd = InertiaTriple::default();
    for f in &factors {
        let (x, y) = inertia_pair(f.matrix.matrix(), tol)?;
        sum_ac = sum_ac.add(&x);
        sum_bd = sum_bd.add(&y);
    }
    Ok(NormalFormReport {
        case,
        rank_b,
        factors,
        p1,
        p2,
        reassembly_error,
        inertia_ac,
        inertia_bd,
        invariants_preserved: inertia_ac == sum_ac && inertia_bd == sum_bd,
        zero_core: zero,
        shear_class: shear,
    })
}
