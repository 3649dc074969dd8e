//! Seeded generators for the property suites. Every generator is a pure function of
//! its RNG, and every instance serializes to a form the CLI can read back.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{diamond_all, eigenvalues_r, from_blocks, inverse, n_matrix, singular_values, sym_eigenvalues, Mat};
use crate::path::{MatFn, SymplecticPath};
use crate::symplectic::{n2_block, NormalForm, SymplecticMatrix};

pub type CorpusRng = ChaCha8Rng;

/// Seed of trial `trial` under `master`: one splitmix64 output of the counter.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(trial.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from(seed: u64) -> CorpusRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut CorpusRng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `(G + Gᵀ)/2` with standard normal `G`.
pub fn random_symmetric(rng: &mut CorpusRng, k: usize) -> Mat {
    let g = gaussian(rng, k, k);
    (&g + g.transpose()) * 0.5
}

fn condition(m: &Mat) -> f64 {
    let s = singular_values(m);
    let (hi, lo) = s.iter().fold((0.0f64, f64::INFINITY), |(h, l), &x| (h.max(x), l.min(x)));
    hi / lo
}

/// `I + G/(2√k)` with a random sign pattern, condition number at most `max_cond`.
pub fn random_invertible(rng: &mut CorpusRng, k: usize, max_cond: f64) -> Mat {
    loop {
        let mut m = Mat::identity(k, k) + gaussian(rng, k, k) * (0.5 / (k as f64).sqrt());
        for i in 0..k {
            if rng.random_bool(0.3) {
                m.row_mut(i).neg_mut();
            }
        }
        if condition(&m) <= max_cond {
            return m;
        }
    }
}

fn lower_symplectic(a: &Mat, s: &Mat) -> Mat {
    // [[A, 0], [A⁻ᵀS, A⁻ᵀ]] with symmetric S
    let ait = inverse(a).expect("well-conditioned by construction").transpose();
    let k = a.nrows();
    from_blocks(a, &Mat::zeros(k, k), &(&ait * s), &ait)
}

fn lower_shear(s: &Mat) -> Mat {
    let k = s.nrows();
    from_blocks(&Mat::identity(k, k), &Mat::zeros(k, k), s, &Mat::identity(k, k))
}

fn upper_shear(s: &Mat) -> Mat {
    let k = s.nrows();
    from_blocks(&Mat::identity(k, k), s, &Mat::zeros(k, k), &Mat::identity(k, k))
}

fn block_transform(q: &Mat) -> Mat {
    let qit = inverse(q).expect("well-conditioned by construction").transpose();
    let k = q.nrows();
    from_blocks(q, &Mat::zeros(k, k), &Mat::zeros(k, k), &qit)
}

/// Product of shears and a block transform; generic, with moderate entries.
pub fn random_symplectic(rng: &mut CorpusRng, k: usize) -> SymplecticMatrix {
    let s1 = random_symmetric(rng, k) * 0.6;
    let s2 = random_symmetric(rng, k) * 0.6;
    let q = random_invertible(rng, k, 20.0);
    SymplecticMatrix::from_trusted(lower_shear(&s1) * block_transform(&q) * upper_shear(&s2))
}

fn rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_rows(r: &[Vec<f64>]) -> Mat {
    Mat::from_fn(r.len(), r.len(), |i, j| r[i][j])
}

/// A path with positive definite generator
/// `B(t) = A0 + sin(ft + φ)A1` on `[0, τ]`, optionally symmetrized to
/// `½(B(t) + N B(τ − t) N)`, followed by `half_turns` blocks `R(πt/τ)`.
///
/// Symmetrization makes the brake 2-iterate agree with the periodic one:
/// `γ²(t) = γ(t − τ)γ(τ)` on `[τ, 2τ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPathSpec {
    pub tau: f64,
    pub base: Vec<Vec<f64>>,
    pub wave: Vec<Vec<f64>>,
    pub freq: f64,
    pub phase: f64,
    pub symmetrized: bool,
    pub half_turns: usize,
    pub steps: usize,
}

impl ConvexPathSpec {
    /// Dimension of the generated (non-rotation) part.
    pub fn core_dim(&self) -> usize {
        self.base.len() / 2
    }

    pub fn dim_half(&self) -> usize {
        self.core_dim() + self.half_turns
    }

    fn core_generator(&self) -> MatFn {
        let a0 = from_rows(&self.base);
        let a1 = from_rows(&self.wave);
        let (f, ph, tau, sym) = (self.freq, self.phase, self.tau, self.symmetrized);
        let nm = n_matrix(self.core_dim());
        Arc::new(move |t: f64| {
            let b = |s: f64| &a0 + &a1 * (f * s + ph).sin();
            if sym {
                (b(t) + &nm * b(tau - t) * &nm) * 0.5
            } else {
                b(t)
            }
        })
    }

    pub fn generator(&self) -> MatFn {
        let core = self.core_generator();
        if self.half_turns == 0 {
            return core;
        }
        let w = std::f64::consts::PI / self.tau;
        let rot = Mat::identity(2 * self.half_turns, 2 * self.half_turns) * w;
        if self.core_dim() == 0 {
            return Arc::new(move |_t: f64| rot.clone());
        }
        Arc::new(move |t: f64| diamond_all(&[core(t), rot.clone()]))
    }

    pub fn path(&self) -> Result<SymplecticPath> {
        SymplecticPath::fundamental_solution(self.generator(), self.dim_half(), self.tau, self.steps)
    }

    fn core_path(&self) -> Result<SymplecticPath> {
        SymplecticPath::fundamental_solution(self.core_generator(), self.core_dim(), self.tau, self.steps)
    }

    /// Draws until the generated part has a well-separated endpoint: `B(τ)`, `C(τ)` and
    /// `γ(τ)² − I` all have smallest singular value above `margin`.
    pub fn sample(rng: &mut CorpusRng, n: usize, symmetrized: bool, half_turns: usize, margin: f64) -> Result<Self> {
        if half_turns > n {
            return Err(Error::Domain(format!("{half_turns} half turns in dimension {n}")));
        }
        let core = n - half_turns;
        for _ in 0..200 {
            let spec = Self::draw(rng, core, symmetrized, half_turns);
            if core == 0 || spec.well_separated(margin)? {
                return Ok(spec);
            }
        }
        Err(Error::Conditioning("no well-separated convex path in 200 draws".into()))
    }

    fn draw(rng: &mut CorpusRng, core: usize, symmetrized: bool, half_turns: usize) -> Self {
        let d = 2 * core.max(1);
        let g = gaussian(rng, d, d);
        let a0 = &g * g.transpose() / d as f64 + Mat::identity(d, d) * rng.random_range(0.2..1.0);
        let lo = sym_eigenvalues(&a0)[0];
        let w = random_symmetric(rng, d);
        let wn = singular_values(&w).max();
        let a1 = w * (rng.random_range(0.1..0.8) * lo / wn);
        ConvexPathSpec {
            tau: rng.random_range(0.5..3.0),
            base: if core == 0 { vec![] } else { rows(&a0) },
            wave: if core == 0 { vec![] } else { rows(&a1) },
            freq: rng.random_range(0.5..4.0),
            phase: rng.random_range(0.0..std::f64::consts::TAU),
            symmetrized,
            half_turns,
            steps: 128,
        }
    }

    fn well_separated(&self, margin: f64) -> Result<bool> {
        let p = self.core_path()?.endpoint();
        let (_, b, c, _) = p.blocks();
        let k = self.core_dim();
        let p2 = p.matrix() * p.matrix() - Mat::identity(2 * k, 2 * k);
        let smin = |m: &Mat| singular_values(m).min();
        Ok(smin(&b) > margin && smin(&c) > margin && smin(&p2) > margin)
    }
}

/// `(A1, A3)` with `A1` symmetric, `A1A3` symmetric and `σ(A3) ⊂ (−∞, −margin)`.
///
/// `A3 = VΛV⁻¹` with negative `Λ` grouped into repeated eigenvalues, and
/// `A1 = V⁻ᵀΔV⁻¹` with `Δ` symmetric inside each group, which is every such pair
/// with diagonalizable `A3`.
pub fn sign_cancellation_pair(rng: &mut CorpusRng, k: usize, margin: f64) -> (Mat, Mat) {
    let v = random_invertible(rng, k, 30.0);
    let vi = inverse(&v).expect("well-conditioned by construction");
    let mut lam = Mat::zeros(k, k);
    let mut delta = Mat::zeros(k, k);
    let mut i = 0;
    while i < k {
        let size = if k - i >= 2 && rng.random_bool(0.3) { rng.random_range(2..=(k - i).min(3)) } else { 1 };
        let l = -(margin + rng.random_range(0.05..3.0));
        let d = if rng.random_bool(0.1) { Mat::zeros(size, size) } else { random_symmetric(rng, size) + Mat::identity(size, size) * rng.random_range(-1.0..1.0) };
        for a in 0..size {
            lam[(i + a, i + a)] = l;
            for b in 0..size {
                delta[(i + a, i + b)] = d[(a, b)];
            }
        }
        i += size;
    }
    let a3 = &v * lam * &vi;
    let a1 = vi.transpose() * delta * &vi;
    let a1 = (&a1 + a1.transpose()) * 0.5;
    (a1, a3)
}

/// `R = [[A1, I], [A2A1 − I, A2]]` with symmetric `A1`, `A2`; the eigenvalues `u` of
/// `A3 = A2A1 − I` stay `gap` away from `0` and `−1`, where the elliptic height
/// of `N R⁻¹ N R` jumps.
pub fn height_bound_matrix(rng: &mut CorpusRng, k: usize, gap: f64) -> SymplecticMatrix {
    loop {
        let a1 = random_symmetric(rng, k);
        let a2 = random_symmetric(rng, k);
        let a3 = &a2 * &a1 - Mat::identity(k, k);
        let ok = eigenvalues_r(&a3).iter().all(|u| {
            let near_real = u.im.abs() < gap;
            let d0 = u.norm();
            let d1 = (u + 1.0).norm();
            d0 > gap && d1 > gap && !(near_real && u.im.abs() > 1e-10 && u.re > -1.0 && u.re < 0.0)
        });
        if ok {
            return SymplecticMatrix::from_trusted(from_blocks(&a1, &Mat::identity(k, k), &a3, &a2));
        }
    }
}

/// The branch of the `(L0, L1)` normal form an instance is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateKind {
    ZeroB,
    InvertibleA3,
    PartialA3,
    ZeroA3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateInstance {
    pub kind: DegenerateKind,
    pub rank_b: usize,
    pub rank_a3: usize,
    pub matrix: SymplecticMatrix,
}

/// A symplectic matrix with `rank B = r < k` and `rank A3 = λ` by construction:
/// `W0 = core ⋄ X ⋄ Y` with `B(W0) = diag(I_r, 0)`, where the core carries an
/// invertible `A3` of order `λ`, `X = [[S, I], [0, S⁻¹]]` and `Y` is block lower
/// triangular. Lower shears whose leading `r × r` block vanishes couple the
/// pieces without touching `B` or `A3`, and random block transforms hide the
/// coordinates.
pub fn degenerate_matrix(rng: &mut CorpusRng, k: usize, kind: DegenerateKind) -> Result<DegenerateInstance> {
    if k < 1 || (kind != DegenerateKind::ZeroB && k < 2) || (kind == DegenerateKind::PartialA3 && k < 3) {
        return Err(Error::Domain(format!("no {kind:?} instance in dimension {k}")));
    }
    let (r, lam) = match kind {
        DegenerateKind::ZeroB => (0, 0),
        DegenerateKind::InvertibleA3 => {
            let r = rng.random_range(1..k);
            (r, r)
        }
        DegenerateKind::PartialA3 => {
            let r = rng.random_range(2..k);
            (r, rng.random_range(1..r))
        }
        DegenerateKind::ZeroA3 => (rng.random_range(1..k), 0),
    };
    let mut parts = Vec::new();
    if lam > 0 {
        loop {
            let a1 = random_symmetric(rng, lam);
            let a2 = random_symmetric(rng, lam);
            let a3 = &a2 * &a1 - Mat::identity(lam, lam);
            if singular_values(&a3).min() > 0.1 {
                parts.push(from_blocks(&a1, &Mat::identity(lam, lam), &a3, &a2));
                break;
            }
        }
    }
    if r > lam {
        let m = r - lam;
        let s = loop {
            let s = random_symmetric(rng, m) + Mat::identity(m, m) * rng.random_range(-1.5..1.5);
            if singular_values(&s).min() > 0.2 {
                break s;
            }
        };
        let si = inverse(&s)?;
        parts.push(from_blocks(&s, &Mat::identity(m, m), &Mat::zeros(m, m), &si));
    }
    let rest = k - r;
    if rest > 0 {
        let a = random_invertible(rng, rest, 10.0);
        parts.push(lower_symplectic(&a, &(random_symmetric(rng, rest) * 0.5)));
    }
    let w0 = diamond_all(&parts);
    let coupling = |rng: &mut CorpusRng| {
        let mut s = random_symmetric(rng, k) * 0.5;
        for i in 0..r {
            for j in 0..r {
                s[(i, j)] = 0.0;
            }
        }
        lower_shear(&s)
    };
    let w = if kind == DegenerateKind::ZeroB { w0 } else { coupling(rng) * w0 * coupling(rng) };
    let p1 = block_transform(&random_invertible(rng, k, 10.0));
    let p2 = block_transform(&random_invertible(rng, k, 10.0));
    let matrix = SymplecticMatrix::from_trusted(p1 * w * p2);
    Ok(DegenerateInstance { kind, rank_b: r, rank_a3: lam, matrix })
}

const ANGLES: [f64; 6] = [
    std::f64::consts::FRAC_PI_3,
    std::f64::consts::FRAC_PI_2,
    2.0 * std::f64::consts::FRAC_PI_3,
    4.0 * std::f64::consts::FRAC_PI_3,
    3.0 * std::f64::consts::FRAC_PI_2,
    5.0 * std::f64::consts::FRAC_PI_3,
];

/// One basic normal form; angles come from a small grid half of the time so that
/// factors of a product share unit eigenvalues.
pub fn random_normal_form(rng: &mut CorpusRng) -> NormalForm {
    let theta = |rng: &mut CorpusRng| {
        if rng.random_bool(0.5) {
            ANGLES[rng.random_range(0..ANGLES.len())]
        } else {
            let t: f64 = rng.random_range(0.05..(std::f64::consts::PI - 0.05));
            if rng.random_bool(0.5) {
                t
            } else {
                std::f64::consts::TAU - t
            }
        }
    };
    let sign = |rng: &mut CorpusRng| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    match rng.random_range(0..4) {
        0 => NormalForm::N1 { lambda: sign(rng), b: [-1.0, 0.0, 1.0][rng.random_range(0..3)] },
        1 => NormalForm::R { theta: theta(rng) },
        2 => {
            let t = theta(rng);
            let b = n2_block(t, sign(rng) * rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            NormalForm::N2 { theta: t, b }
        }
        _ => NormalForm::D { lambda: 2.0 * sign(rng) },
    }
}

/// Between one and `max_factors` basic normal forms.
pub fn random_diamond_product(rng: &mut CorpusRng, max_factors: usize) -> Vec<NormalForm> {
    let count = rng.random_range(1..=max_factors.max(1));
    (0..count).map(|_| random_normal_form(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::symplectic::symplectic_defect;

    #[test]
    fn trial_seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..100).map(|i| trial_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_eq!(a[3], trial_seed(7, 3));
        assert_ne!(trial_seed(7, 0), trial_seed(8, 0));
    }

    #[test]
    fn generated_matrices_are_symplectic() {
        let mut rng = rng_from(1);
        for k in 1..=4 {
            assert!(symplectic_defect(random_symplectic(&mut rng, k).matrix()) < 1e-10);
            assert!(symplectic_defect(height_bound_matrix(&mut rng, k, 1e-3).matrix()) < 1e-10);
        }
        for kind in [DegenerateKind::ZeroB, DegenerateKind::InvertibleA3, DegenerateKind::PartialA3, DegenerateKind::ZeroA3] {
            let inst = degenerate_matrix(&mut rng, 4, kind).unwrap();
            assert!(symplectic_defect(inst.matrix.matrix()) < 1e-9, "{kind:?}");
            let (_, b, _, _) = inst.matrix.blocks();
            assert_eq!(crate::linalg::rank(&b, 1e-9), inst.rank_b);
        }
    }

    #[test]
    fn sign_cancellation_pairs_meet_the_hypotheses() {
        let mut rng = rng_from(2);
        for k in 1..=6 {
            let (a1, a3) = sign_cancellation_pair(&mut rng, k, 1e-3);
            let p = &a1 * &a3;
            assert!(max_abs(&(&p - p.transpose())) < 1e-9 * (1.0 + max_abs(&p)));
            assert!(eigenvalues_r(&a3).iter().all(|z| z.re < -1e-3));
        }
    }

    #[test]
    fn symmetrized_paths_iterate_periodically() {
        let mut rng = rng_from(3);
        let spec = ConvexPathSpec::sample(&mut rng, 2, true, 0, 1e-3).unwrap();
        let g = spec.path().unwrap();
        let g2 = crate::path::brake_iterate(&g, 2).unwrap();
        let p = g.endpoint();
        let gap = max_abs(&(g2.end() - p.matrix() * p.matrix()));
        assert!(gap < 1e-8, "{gap}");
        let spec = ConvexPathSpec::sample(&mut rng, 2, false, 0, 1e-3).unwrap();
        let g = spec.path().unwrap();
        let g2 = crate::path::brake_iterate(&g, 2).unwrap();
        let p = g.endpoint();
        assert!(max_abs(&(g2.end() - p.matrix() * p.matrix())) > 1e-4);
    }
}
