//! Seeded property suites. A trial is a pure function of `(suite, trial seed, dim,
//! tolerances)`; trials run in parallel and are reported in trial order, so equal
//! configurations give byte-identical reports.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::corpus::{
    degenerate_matrix, height_bound_matrix, random_diamond_product, rng_from, sign_cancellation_pair, trial_seed, ConvexPathSpec, CorpusRng,
    DegenerateKind,
};
use crate::error::{Error, Result};
use crate::index::{index_lagrangian, index_omega, iteration_monotonicity_check, mixed_concavity, one, splitting_from_table, splitting_numbers_auto, unit};
use crate::linalg::{diamond_all, max_abs, Mat};
use crate::orbits::orbit_indices;
use crate::path::{brake_iterate, SymplecticPath};
use crate::signature::{elliptic_height_bound, normal_form_l0l1, sign_cancellation_check, signature_small_eps, NormalFormCase};
use crate::symplectic::{json::MatrixJson, unit_clusters, Equivalence, Lagrangian, SymplecticMatrix};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// `μ01 + μ10 = i(γ²) − ν(γ²) − n` and `μ01 − μ10 = ½ sgn M_ε(γ(τ))`, `ε < 0`.
    ConcavityIdentities,
    /// `μ01 + S⁺_{P²}(1) ≥ 0` and `μ10 + S⁺_{P²}(1) ≥ 0` on symmetrized convex paths.
    MixedConcavityBound,
    SignCancellation,
    HeightBound,
    NormalForm,
    /// Table values and ⋄-additivity of splitting numbers.
    Splitting,
    /// `i_L0(γ^m) + i_L1(γ^m) = i(γ^{2m}) − n` and monotonicity of `i_L0(γ^m)`.
    Bott,
    /// `i(γ²) + 2S⁺_{P²}(1) − ν(γ²) ≥ n + p1 + p2`.
    DoubledIndexBound,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::ConcavityIdentities,
        Suite::MixedConcavityBound,
        Suite::SignCancellation,
        Suite::HeightBound,
        Suite::NormalForm,
        Suite::Splitting,
        Suite::Bott,
        Suite::DoubledIndexBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ConcavityIdentities => "concavity-identities",
            Suite::MixedConcavityBound => "mixed-concavity-bound",
            Suite::SignCancellation => "sign-cancellation",
            Suite::HeightBound => "height-bound",
            Suite::NormalForm => "normal-form",
            Suite::Splitting => "splitting",
            Suite::Bott => "bott",
            Suite::DoubledIndexBound => "doubled-index-bound",
        }
    }

    pub fn from_name(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite \"{s}\"; known: {}", Suite::ALL.map(|x| x.name()).join(", "))))
    }

    /// Dimensions a trial may use.
    pub fn dim_range(self) -> (usize, usize) {
        match self {
            Suite::ConcavityIdentities | Suite::MixedConcavityBound | Suite::Bott | Suite::DoubledIndexBound => (1, 4),
            Suite::SignCancellation => (1, 6),
            Suite::HeightBound | Suite::NormalForm => (1, 4),
            // number of ⋄-factors
            Suite::Splitting => (1, 4),
        }
    }

    pub fn default_dims(self) -> Vec<usize> {
        let (lo, hi) = self.dim_range();
        (lo..=hi).collect()
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    /// Trial `t` uses `dims[t % dims.len()]`.
    pub dims: Vec<usize>,
    pub tol: Tolerances,
}

impl SuiteConfig {
    pub fn new(suite: Suite, trials: usize, seed: u64) -> Self {
        SuiteConfig { suite, trials, seed, dims: suite.default_dims(), tol: Tolerances::default() }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.suite.dim_range();
        if self.dims.is_empty() {
            return Err(Error::Domain("empty dimension list".into()));
        }
        if let Some(d) = self.dims.iter().find(|&&d| d < lo || d > hi) {
            return Err(Error::Domain(format!("suite {} takes dimensions {lo}..={hi}, got {d}", self.suite)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// The instance missed the hypotheses of the checked statement.
    Skipped,
    /// A numerical routine refused to decide.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub dim: usize,
    pub outcome: Outcome,
    pub detail: Value,
    /// Present unless the trial passed: everything needed to rerun it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reproducer: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub errors: usize,
    pub results: Vec<TrialResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0 && self.errors == 0
    }
}

struct Checked {
    outcome: Outcome,
    detail: Value,
    instance: Value,
}

fn verdict(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let results: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.seed, t as u64);
            let dim = cfg.dims[t % cfg.dims.len()];
            run_trial(cfg.suite, t, seed, dim, &cfg.tol)
        })
        .collect();
    let count = |o: Outcome| results.iter().filter(|r| r.outcome == o).count();
    Ok(SuiteReport {
        config: cfg.clone(),
        passed: count(Outcome::Pass),
        failed: count(Outcome::Fail),
        skipped: count(Outcome::Skipped),
        errors: count(Outcome::Error),
        results,
    })
}

/// One trial, identified by its own seed; the reproducer of a failed trial replays here.
pub fn run_trial(suite: Suite, trial: usize, seed: u64, dim: usize, tol: &Tolerances) -> TrialResult {
    let mut rng = rng_from(seed);
    let checked = match suite {
        Suite::ConcavityIdentities => concavity_identities(&mut rng, trial, dim, tol),
        Suite::MixedConcavityBound => mixed_concavity_bound(&mut rng, dim, tol),
        Suite::SignCancellation => sign_cancellation(&mut rng, dim, tol),
        Suite::HeightBound => height_bound(&mut rng, dim, tol),
        Suite::NormalForm => normal_form(&mut rng, trial, dim, tol),
        Suite::Splitting => splitting(&mut rng, dim, tol),
        Suite::Bott => bott(&mut rng, trial, dim, tol),
        Suite::DoubledIndexBound => doubled_index_bound(&mut rng, dim, tol),
    };
    let (outcome, detail, instance) = match checked {
        Ok(c) => (c.outcome, c.detail, c.instance),
        Err(e) => (Outcome::Error, json!({ "error": e.to_string() }), Value::Null),
    };
    let reproducer = (outcome != Outcome::Pass).then(|| {
        json!({
            "suite": suite,
            "trial": trial,
            "seed": seed,
            "dim": dim,
            "instance": instance,
            "tol": tol,
        })
    });
    TrialResult { trial, seed, dim, outcome, detail, reproducer }
}

fn half(s: i64) -> Result<i64> {
    if s % 2 != 0 {
        return Err(Error::Unstable(format!("odd signature {s}")));
    }
    Ok(s / 2)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn concavity_identities(rng: &mut CorpusRng, trial: usize, n: usize, tol: &Tolerances) -> Result<Checked> {
    // every fourth trial carries a degenerate half-turn block
    let turns = usize::from(trial % 4 == 3);
    let symmetrized = trial % 2 == 1;
    let spec = ConvexPathSpec::sample(rng, n, symmetrized, turns, 1e-3)?;
    let g = spec.path()?;
    let mc = mixed_concavity(&g, tol)?;
    let w = index_omega(&brake_iterate(&g, 2)?, one(), tol)?.pair;
    let half_sgn = half(signature_small_eps(&g.endpoint(), -1.0, tol)?)?;
    let n = n as i64;
    let sum_ok = mc.mu_01 + mc.mu_10 == w.i - w.nu as i64 - n;
    let diff_ok = mc.mu_01 - mc.mu_10 == half_sgn;
    Ok(Checked {
        outcome: verdict(sum_ok && diff_ok),
        detail: json!({
            "mu_01": mc.mu_01, "mu_10": mc.mu_10,
            "i_double": w.i, "nu_double": w.nu,
            "half_sgn_neg": half_sgn,
            "sum_identity": sum_ok, "difference_identity": diff_ok,
        }),
        instance: to_value(&spec),
    })
}

/// `i_L0 ≥ 0`, `i_L1 ≥ 0`, `i(γ) ≥ n` and `γ²(τ) = γ(τ)²`.
fn doubling_hypotheses(g: &SymplecticPath, tol: &Tolerances) -> Result<(bool, Value)> {
    let n = g.dim_half() as i64;
    let l0 = index_lagrangian(g, Lagrangian::L0, tol)?.pair;
    let l1 = index_lagrangian(g, Lagrangian::L1, tol)?.pair;
    let w = index_omega(g, one(), tol)?.pair;
    let p = g.end();
    let gap = max_abs(&(brake_iterate(g, 2)?.end() - p * p)) / (1.0 + max_abs(p)).powi(2);
    let holds = l0.i >= 0 && l1.i >= 0 && w.i >= n && gap < 1e-8;
    Ok((holds, json!({ "i_l0": l0.i, "i_l1": l1.i, "i": w.i, "periodic_gap": gap })))
}

fn mixed_concavity_bound(rng: &mut CorpusRng, n: usize, tol: &Tolerances) -> Result<Checked> {
    let turns = usize::from(n >= 2 && rng.random_bool(0.25));
    let spec = ConvexPathSpec::sample(rng, n, true, turns, 1e-3)?;
    let g = spec.path()?;
    let (hyp, hdetail) = doubling_hypotheses(&g, tol)?;
    let mc = mixed_concavity(&g, tol)?;
    let p = g.endpoint();
    let s_plus = splitting_numbers_auto(&p.mul(&p), one(), tol)?.s_plus as i64;
    let b0 = mc.mu_01 + s_plus;
    let b1 = mc.mu_10 + s_plus;
    let outcome = if !hyp { Outcome::Skipped } else { verdict(b0 >= 0 && b1 >= 0) };
    Ok(Checked {
        outcome,
        detail: json!({ "hypotheses": hdetail, "mu_01": mc.mu_01, "mu_10": mc.mu_10, "s_plus": s_plus, "bound_01": b0, "bound_10": b1 }),
        instance: to_value(&spec),
    })
}

fn sign_cancellation(rng: &mut CorpusRng, k: usize, tol: &Tolerances) -> Result<Checked> {
    let (a1, a3) = sign_cancellation_pair(rng, k, 1e-3);
    let r = sign_cancellation_check(&a1, &a3, 1e-3, tol)?;
    Ok(Checked {
        outcome: verdict(r.holds),
        detail: json!({ "sum": r.sum }),
        instance: json!({ "a1": MatrixJson::from_matrix(&a1), "a3": MatrixJson::from_matrix(&a3) }),
    })
}

fn height_bound(rng: &mut CorpusRng, k: usize, tol: &Tolerances) -> Result<Checked> {
    let r = height_bound_matrix(rng, k, 1e-3);
    let h = elliptic_height_bound(&r, 1e-6, tol)?;
    let residual_ok = h.charpoly_residual <= 1e-8;
    Ok(Checked {
        outcome: verdict(h.holds && residual_ok),
        detail: json!({ "m": h.m, "half_sgn": h.half_sgn, "bound_holds": h.holds, "charpoly_residual": h.charpoly_residual }),
        instance: to_value(&MatrixJson::from_matrix(r.matrix())),
    })
}

fn degenerate_kinds(k: usize) -> Vec<DegenerateKind> {
    let mut v = vec![DegenerateKind::ZeroB];
    if k >= 2 {
        v.push(DegenerateKind::InvertibleA3);
        v.push(DegenerateKind::ZeroA3);
    }
    if k >= 3 {
        v.push(DegenerateKind::PartialA3);
    }
    v
}

fn normal_form(rng: &mut CorpusRng, trial: usize, k: usize, tol: &Tolerances) -> Result<Checked> {
    let kinds = degenerate_kinds(k);
    let kind = kinds[(trial / 4) % kinds.len()];
    let inst = degenerate_matrix(rng, k, kind)?;
    let instance = json!({ "kind": inst.kind, "rank_b": inst.rank_b, "rank_a3": inst.rank_a3, "matrix": MatrixJson::from_matrix(inst.matrix.matrix()) });
    let rep = normal_form_l0l1(&inst.matrix, tol)?;
    let case_ok = match (kind, rep.case) {
        (DegenerateKind::ZeroB, NormalFormCase::ZeroB) | (DegenerateKind::InvertibleA3, NormalFormCase::InvertibleA3) => true,
        (DegenerateKind::ZeroA3, NormalFormCase::ZeroA3) => true,
        (DegenerateKind::PartialA3, NormalFormCase::PartialA3 { rank_a3 }) => rank_a3 == inst.rank_a3,
        _ => false,
    };
    let zero_core_ok = match (&rep.zero_core, kind) {
        (Some(z), _) => z.inertia_identities_hold && z.n_transform_class.verdict == Equivalence::Equivalent,
        (None, DegenerateKind::ZeroA3) => false,
        (None, _) => true,
    };
    let shear_ok = rep.shear_class.as_ref().map(|s| s.verdict == Equivalence::Equivalent).unwrap_or(true);
    let ok = case_ok && rep.rank_b == inst.rank_b && rep.reassembly_error <= 1e-9 && rep.invariants_preserved && zero_core_ok && shear_ok;
    Ok(Checked {
        outcome: verdict(ok),
        detail: json!({
            "case": rep.case, "rank_b": rep.rank_b,
            "reassembly_error": rep.reassembly_error,
            "invariants_preserved": rep.invariants_preserved,
            "zero_core": rep.zero_core.as_ref().map(|z| json!({ "lambda": z.lambda, "identities": z.inertia_identities_hold, "n_transform": z.n_transform_class.verdict })),
            "case_matches": case_ok,
        }),
        instance,
    })
}

fn splitting(rng: &mut CorpusRng, max_factors: usize, tol: &Tolerances) -> Result<Checked> {
    let factors = random_diamond_product(rng, max_factors);
    let mats: Vec<Mat> = factors.iter().map(|f| f.matrix().map(|m| m.into_matrix())).collect::<Result<_>>()?;
    let product = SymplecticMatrix::new(diamond_all(&mats))?;
    let mut angles: Vec<f64> = vec![0.0];
    for f in &factors {
        for a in f.unit_angles() {
            if !angles.iter().any(|b| (a - b).abs() < 1e-9) {
                angles.push(a);
            }
        }
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut rows = Vec::new();
    let mut ok = true;
    for &a in &angles {
        let w = unit(a);
        let limit = splitting_numbers_auto(&product, w, tol)?;
        let table = splitting_from_table(&factors, w)?;
        let mut summed = (0, 0);
        for (f, m) in factors.iter().zip(&mats) {
            let s = splitting_numbers_auto(&SymplecticMatrix::new(m.clone())?, w, tol)?;
            let t = splitting_from_table(std::slice::from_ref(f), w)?;
            ok &= (s.s_plus, s.s_minus) == t;
            summed.0 += s.s_plus;
            summed.1 += s.s_minus;
        }
        let here = (limit.s_plus, limit.s_minus) == table && table == summed;
        ok &= here;
        rows.push(json!({ "arg": a, "product": [limit.s_plus, limit.s_minus], "table": [table.0, table.1], "factor_sum": [summed.0, summed.1] }));
    }
    Ok(Checked { outcome: verdict(ok), detail: json!({ "angles": rows }), instance: to_value(&factors) })
}

fn bott(rng: &mut CorpusRng, trial: usize, n: usize, tol: &Tolerances) -> Result<Checked> {
    // odd trials carry a half-turn block, which gives ν_L0(γ^m) ≥ 1 for every m
    let turns = usize::from(trial % 2 == 1);
    let spec = ConvexPathSpec::sample(rng, n, trial % 4 >= 2, turns, 1e-3)?;
    let g = spec.path()?;
    let m_max = 4;
    let mut ok = true;
    let mut rows = Vec::new();
    for m in 1..=m_max {
        let idx = orbit_indices(&g, m, tol)?;
        ok &= idx.bott_holds;
        rows.push(json!({ "m": m, "i_l0": idx.l0.i, "nu_l0": idx.l0.nu, "i_l1": idx.l1.i, "i_double": idx.omega.i, "bott": idx.bott_holds }));
    }
    let monotone = if turns > 0 {
        let r = iteration_monotonicity_check(&g, m_max, tol)?;
        ok &= r.holds;
        Some(r.holds)
    } else {
        None
    };
    Ok(Checked { outcome: verdict(ok), detail: json!({ "iterates": rows, "monotone": monotone }), instance: to_value(&spec) })
}

/// `(p1, p2)`: the number of `N1(1, 1)` blocks and of positive hyperbolic pairs in
/// the `≈`-class of `m`, read off `ν_1`, `S⁺(1)` and the spectrum.
pub fn doubled_bound_counts(m: &SymplecticMatrix, tol: &Tolerances) -> Result<(usize, usize)> {
    let clusters = unit_clusters(m, tol);
    if let Some(c) = clusters.iter().find(|c| c.ambiguous) {
        return Err(Error::Indeterminate(format!("eigenvalue {} in the unit-circle band", c.center())));
    }
    let mut p2 = 0;
    let mut alg_one = 0;
    for c in &clusters {
        if c.on_unit {
            if c.arg.min(std::f64::consts::TAU - c.arg) < 1e-6 {
                alg_one += c.alg_mult;
            }
        } else if c.im.abs() < tol.cluster && c.re > 1.0 {
            p2 += c.alg_mult;
        }
    }
    if alg_one == 0 {
        return Ok((0, p2));
    }
    if alg_one % 2 != 0 {
        return Err(Error::Indeterminate(format!("odd multiplicity {alg_one} of the eigenvalue 1")));
    }
    let a = alg_one / 2;
    let nu = crate::symplectic::nu_omega_checked(m, one(), tol)?;
    let s_plus = splitting_numbers_auto(m, one(), tol)?.s_plus;
    // blocks at 1: q_I copies of I_2, q_+ of N1(1, 1), q_− of N1(1, −1)
    let q_i = nu.checked_sub(a).ok_or_else(|| Error::Indeterminate(format!("ν_1 = {nu} below half the multiplicity {alg_one}")))?;
    let q_plus = s_plus
        .checked_sub(q_i)
        .filter(|&q| q_i + q <= a)
        .ok_or_else(|| Error::Indeterminate(format!("eigenvalue 1 is not a sum of 2 × 2 blocks (ν = {nu}, S⁺ = {s_plus}, multiplicity {alg_one})")))?;
    Ok((q_plus, p2))
}

fn doubled_index_bound(rng: &mut CorpusRng, n: usize, tol: &Tolerances) -> Result<Checked> {
    let turns = usize::from(n >= 2 && rng.random_bool(0.25));
    let spec = ConvexPathSpec::sample(rng, n, true, turns, 1e-3)?;
    let g = spec.path()?;
    let (hyp, hdetail) = doubling_hypotheses(&g, tol)?;
    let p = g.endpoint();
    let p2m = p.mul(&p);
    let w = index_omega(&brake_iterate(&g, 2)?, one(), tol)?.pair;
    let s_plus = splitting_numbers_auto(&p2m, one(), tol)?.s_plus as i64;
    let (p1, p2) = doubled_bound_counts(&p2m, tol)?;
    let lhs = w.i + 2 * s_plus - w.nu as i64;
    let rhs = (n + p1 + p2) as i64;
    let outcome = if !hyp { Outcome::Skipped } else { verdict(lhs >= rhs) };
    Ok(Checked {
        outcome,
        detail: json!({ "hypotheses": hdetail, "i_double": w.i, "nu_double": w.nu, "s_plus": s_plus, "p1": p1, "p2": p2, "lhs": lhs, "rhs": rhs }),
        instance: to_value(&spec),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()).unwrap(), s);
        }
        assert!(Suite::from_name("nope").is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = SuiteConfig::new(Suite::SignCancellation, 12, 99);
        let a = serde_json::to_string(&run_suite(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn doubled_counts_of_known_products() {
        let tol = Tolerances::default();
        let n11 = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let d2 = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let id = Mat::identity(2, 2);
        let m = SymplecticMatrix::new(diamond_all(&[n11, d2, id])).unwrap();
        assert_eq!(doubled_bound_counts(&m, &tol).unwrap(), (1, 1));
    }
}
