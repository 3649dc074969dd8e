//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use brake_index::index::{
    common_index_jump_search, index_lagrangian, index_omega, mixed_concavity, one, splitting_from_table, splitting_numbers_auto, unit,
};
use brake_index::linalg::{diamond_all, eigenvalues_r, Mat};
use brake_index::orbits::{enumerate_brake_orbits, linearized_path, orbit_checks, orbit_indices, EnumerateOptions, Enumeration, GaugeHamiltonian, Symmetry};
use brake_index::path::{brake_iterate, SymplecticPath};
use brake_index::signature::signature_small_eps;
use brake_index::suites::{run_suite, Suite, SuiteConfig, SuiteReport};
use brake_index::symplectic::{n2_block, Lagrangian, NormalForm, SymplecticMatrix};
use brake_index::{index::iteration_monotonicity_check, Tolerances};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn weights(n: usize) -> Vec<f64> {
    [1.0, SQRT_2, 3f64.sqrt()][..n].to_vec()
}

/// Axis libration of `½|p|² + Σ a²q²`: `q̈ = −2a²q`, period `2π/(√2 a)`.
fn libration_periods(a: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = a.iter().map(|x| 2.0 * PI / (SQRT_2 * x)).collect();
    p.sort_by(|x, y| x.partial_cmp(y).unwrap());
    p
}

fn ellipsoid(n: usize) -> (GaugeHamiltonian, Enumeration, Duration) {
    let ham = GaugeHamiltonian::weighted_quadratic(&weights(n), 1.0).unwrap();
    let start = Instant::now();
    let e = enumerate_brake_orbits(&ham, &EnumerateOptions::default()).unwrap();
    (ham, e, start.elapsed())
}

fn ellipsoid_count(runs: &[(GaugeHamiltonian, Enumeration, Duration)]) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, (_, e, dt)) in runs.iter().enumerate().map(|(i, r)| (i + 2, r)) {
        let expect = libration_periods(&weights(n));
        let err = e.classes.iter().zip(&expect).map(|(c, t)| (c.orbit.period - t).abs()).fold(0.0, f64::max);
        let sym = e.classes.iter().all(|c| c.symmetry.class == Symmetry::Symmetric);
        let here = e.classes.len() == n && err < 1e-8 && sym && *dt < Duration::from_secs(60) && e.resonant == Some(false);
        ok &= here;
        notes.push(format!("n={n}: {} classes, period err {err:.1e}, symmetric {sym}, {:.1}s", e.classes.len(), dt.as_secs_f64()));
    }
    outcome(ok, notes.join("; "))
}

fn rotation_sharpness() -> Outcome {
    let start = Instant::now();
    let tol = Tolerances::default();
    let mut ok = true;
    let mut bad = Vec::new();
    for n in 1..=5usize {
        let g = SymplecticPath::rotation(n, PI, 128).unwrap();
        let l0 = index_lagrangian(&g, Lagrangian::L0, &tol).unwrap().pair;
        let l1 = index_lagrangian(&g, Lagrangian::L1, &tol).unwrap().pair;
        let w = index_omega(&g, one(), &tol).unwrap().pair;
        let p = g.endpoint();
        let s = splitting_numbers_auto(&p.mul(&p), one(), &tol).unwrap().s_plus as i64;
        let mc = mixed_concavity(&g, &tol).unwrap();
        let ni = n as i64;
        let here = l0.i == 0
            && l1.i == 0
            && l0.nu == n
            && l1.nu == n
            && w.i == ni
            && s == ni
            && mc.mu_01 + s == 0
            && mc.mu_10 + s == 0;
        if !here {
            bad.push(format!("n={n}: L0 {:?} L1 {:?} i {} S+ {s}", (l0.i, l0.nu), (l1.i, l1.nu), w.i));
        }
        ok &= here;
    }
    let fast = start.elapsed() < Duration::from_secs(10);
    outcome(ok && fast, if ok { "n = 1..5 exact".into() } else { bad.join("; ") })
}

fn m2(a: f64, b: f64, c: f64, d: f64) -> SymplecticMatrix {
    SymplecticMatrix::new(Mat::from_row_slice(2, 2, &[a, b, c, d])).unwrap()
}

fn signature_table() -> Outcome {
    let tol = Tolerances::default();
    let mut rows = 0;
    let mut bad = Vec::new();
    let mut check = |label: String, p: SymplecticMatrix, signs: &[f64], expect: i64| {
        for &s in signs {
            rows += 1;
            match signature_small_eps(&p, s, &tol) {
                Ok(v) if v == expect => {}
                other => bad.push(format!("{label} ε sign {s}: {other:?}, expected {expect}")),
            }
        }
    };
    for t in [0.0, PI / 3.0, PI / 2.0, PI, 4.0 * PI / 3.0, 5.0 * PI / 3.0] {
        check(format!("R({t:.3})"), m2(t.cos(), -t.sin(), t.sin(), t.cos()), &[1.0, -1.0], 0);
    }
    for a in [0.5, -0.5, 2.0, -2.0] {
        check(format!("diag({a}, 1/{a})"), m2(a, 0.0, 0.0, 1.0 / a), &[1.0, -1.0], 0);
    }
    for b in [0.5, 1.0, 2.0] {
        for s in [1.0, -1.0] {
            check(format!("{s}·[[1,{b}],[0,1]]"), m2(s, s * b, 0.0, s), &[1.0], 0);
            check(format!("{s}·[[1,0],[-{b},1]]"), m2(s, 0.0, -s * b, s), &[1.0], 0);
            check(format!("{s}·[[1,-{b}],[0,1]]"), m2(s, -s * b, 0.0, s), &[1.0], 2);
            check(format!("{s}·[[1,0],[{b},1]]"), m2(s, 0.0, s * b, s), &[1.0], -2);
        }
    }
    let ok = bad.is_empty();
    outcome(ok, if ok { format!("{rows} rows exact") } else { bad.join("; ") })
}

/// Trivial per the definition: `M·R((t − 1)α)^{⋄2}` keeps off the unit circle for
/// `t` on a grid of `[0, 1)`.
fn n2_trivial_by_definition(m: &Mat) -> bool {
    let alpha = 1e-3;
    (0..10).all(|i| {
        let a = (i as f64 / 10.0 - 1.0) * alpha;
        let r = Mat::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()]);
        let p = m * diamond_all(&[r.clone(), r]);
        eigenvalues_r(&p).iter().all(|z| (z.norm() - 1.0).abs() > 1e-6)
    })
}

fn splitting_table() -> Outcome {
    let tol = Tolerances::default();
    let mut bad = Vec::new();
    let mut rows = 0;
    let mut check = |label: String, nf: NormalForm, arg: f64, expect: (usize, usize)| {
        rows += 1;
        let m = nf.matrix().unwrap();
        let w = unit(arg);
        let limit = splitting_numbers_auto(&m, w, &tol).map(|s| (s.s_plus, s.s_minus));
        let table = splitting_from_table(&[nf], w);
        if limit != Ok(expect) || table != Ok(expect) {
            bad.push(format!("{label} at arg {arg:.3}: limit {limit:?}, table {table:?}, expected {expect:?}"));
        }
    };
    // ±N1(1, b): (1, 1) for b ∈ {1, 0}, (0, 0) for b = −1, at ±1
    for b in [1.0, 0.0, -1.0] {
        let e = if b < -0.5 { (0, 0) } else { (1, 1) };
        check(format!("N1(1,{b})"), NormalForm::N1 { lambda: 1.0, b }, 0.0, e);
        check(format!("-N1(1,{b})"), NormalForm::N1 { lambda: -1.0, b: -b }, PI, e);
    }
    for t in [PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0, 3.0 * PI / 2.0, 5.0 * PI / 3.0] {
        check(format!("R({t:.3})"), NormalForm::R { theta: t }, t, (0, 1));
    }
    let mut kinds = [0usize; 2];
    for t in [PI / 3.0, 2.0, 4.0 * PI / 3.0, 5.0] {
        for skew in [1.0, -1.0] {
            let b = n2_block(t, skew, 0.2, -0.3);
            let nf = NormalForm::N2 { theta: t, b };
            let trivial = n2_trivial_by_definition(nf.matrix().unwrap().matrix());
            kinds[usize::from(trivial)] += 1;
            check(format!("N2({t:.3}, skew {skew})"), nf, t, if trivial { (0, 0) } else { (1, 1) });
        }
    }
    for l in [2.0, -2.0] {
        for arg in [0.0, PI / 2.0, PI] {
            check(format!("D({l})"), NormalForm::D { lambda: l }, arg, (0, 0));
        }
    }
    let rep = run_suite(&SuiteConfig::new(Suite::Splitting, 100, SEED)).unwrap();
    let ok = bad.is_empty() && kinds[0] > 0 && kinds[1] > 0 && rep.all_passed() && rep.passed == 100;
    let mut detail = format!("{rows} table rows ({} trivial / {} non-trivial N2); additivity {}", kinds[1], kinds[0], summary(&rep));
    if !bad.is_empty() {
        detail = format!("{detail}; {}", bad.join("; "));
    }
    outcome(ok, detail)
}

fn summary(r: &SuiteReport) -> String {
    format!("{}/{} pass, {} fail, {} skipped, {} errors", r.passed, r.config.trials, r.failed, r.skipped, r.errors)
}

fn first_problem(r: &SuiteReport) -> String {
    r.results
        .iter()
        .find(|t| t.reproducer.is_some())
        .map(|t| format!("; first: trial {} {}", t.trial, t.detail))
        .unwrap_or_default()
}

fn suite_gate(suite: Suite, trials: usize, dims: Vec<usize>, limit: Option<Duration>) -> Outcome {
    let mut cfg = SuiteConfig::new(suite, trials, SEED);
    cfg.dims = dims;
    let start = Instant::now();
    let r = run_suite(&cfg).unwrap();
    let dt = start.elapsed();
    let ok = r.passed == trials && limit.is_none_or(|l| dt < l);
    outcome(ok, format!("{}, {:.1}s{}", summary(&r), dt.as_secs_f64(), first_problem(&r)))
}

fn mixed_concavity_bound(runs: &[(GaugeHamiltonian, Enumeration, Duration)]) -> Outcome {
    let corpus = suite_gate(Suite::MixedConcavityBound, 200, vec![1, 2, 3, 4], None);
    let tol = Tolerances::default();
    let mut orbits = 0;
    let mut bad = Vec::new();
    for (ham, e, _) in runs {
        for c in &e.classes {
            orbits += 1;
            let g = linearized_path(&c.orbit, ham).unwrap();
            match orbit_checks(&g, &tol) {
                Ok(chk) if chk.mixed_bound_l0 >= 0 && chk.mixed_bound_l1 >= 0 => {}
                other => bad.push(format!("n={} period {:.6}: {other:?}", ham.dim_half(), c.orbit.period)),
            }
        }
    }
    let ok = corpus.pass && bad.is_empty() && orbits == 5;
    outcome(ok, format!("corpus {}; {orbits} ellipsoid orbits, {} violations {}", corpus.detail, bad.len(), bad.join("; ")))
}

fn sign_and_height() -> Outcome {
    let a = suite_gate(Suite::SignCancellation, 500, vec![1, 2, 3, 4, 5, 6], None);
    let b = suite_gate(Suite::HeightBound, 200, vec![1, 2, 3, 4], None);
    outcome(a.pass && b.pass, format!("sign cancellation {}; height bound {}", a.detail, b.detail))
}

fn orbit_iterates(runs: &[(GaugeHamiltonian, Enumeration, Duration)]) -> Outcome {
    let tol = Tolerances::default();
    let mut bad = Vec::new();
    let mut count = 0;
    for (ham, e, _) in runs {
        for c in &e.classes {
            let g = linearized_path(&c.orbit, ham).unwrap();
            for m in 1..=8 {
                count += 1;
                match orbit_indices(&g, m, &tol) {
                    Ok(idx) if idx.bott_holds => {}
                    other => bad.push(format!("n={} m={m}: {other:?}", ham.dim_half())),
                }
            }
            match iteration_monotonicity_check(&g, 8, &tol) {
                Ok(r) if r.holds => {}
                other => bad.push(format!("n={} monotonicity: {other:?}", ham.dim_half())),
            }
        }
    }
    outcome(bad.is_empty(), format!("{count} orbit iterates{}", if bad.is_empty() { String::new() } else { format!(": {}", bad.join("; ")) }))
}

fn bott(runs: &[(GaugeHamiltonian, Enumeration, Duration)]) -> Outcome {
    let corpus = suite_gate(Suite::Bott, 100, vec![1, 2, 3, 4], None);
    let orbits = orbit_iterates(runs);
    outcome(corpus.pass && orbits.pass, format!("corpus {}; {}", corpus.detail, orbits.detail))
}

fn common_jump() -> Outcome {
    let tol = Tolerances::default();
    let rot = |tau: f64| SymplecticPath::rotation(1, tau, 128).unwrap();
    let paths = [rot(PI), rot(PI / 2.0)];
    let tuples = common_index_jump_search(&paths, 64, &tol).unwrap();
    let l0 = |g: &SymplecticPath, k: usize| index_lagrangian(&brake_iterate(g, k).unwrap(), Lagrangian::L0, &tol).unwrap().pair;
    let mut bad = Vec::new();
    for t in &tuples {
        for (g, &m) in paths.iter().zip(&t.m) {
            let n = g.dim_half() as i64;
            let base = l0(g, 1);
            let l1 = index_lagrangian(g, Lagrangian::L1, &tol).unwrap().pair;
            let g2 = brake_iterate(g, 2).unwrap();
            let s = splitting_numbers_auto(&g2.endpoint(), one(), &tol).unwrap().s_plus as i64;
            let (lo, hi) = (l0(g, 2 * m - 1), l0(g, 2 * m + 1));
            let i = lo.nu == base.nu && hi.nu == base.nu;
            let ii = lo.i + lo.nu as i64 == t.r - (l1.i + n + s - base.nu as i64);
            let iii = hi.i == t.r + base.i;
            if !(i && ii && iii) {
                bad.push(format!("R={} m={m}: (i) {i} (ii) {ii} (iii) {iii}", t.r));
            }
        }
    }
    let ok = tuples.len() >= 3 && bad.is_empty();
    outcome(ok, format!("{} tuples with m ≤ 64, recomputed {}", tuples.len(), if bad.is_empty() { "exact".to_string() } else { bad.join("; ") }))
}

fn main() {
    let mut all = true;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        all &= o.pass;
        println!("[{}] {id:>2} {name}: {} ({:.1}s)", if o.pass { "PASS" } else { "FAIL" }, o.detail, start.elapsed().as_secs_f64());
    };
    let runs: Vec<_> = (2..=3).map(ellipsoid).collect();
    report(1, "ellipsoid brake orbit count", &mut || ellipsoid_count(&runs));
    report(2, "rotation path sharpness", &mut rotation_sharpness);
    report(3, "symmetrization signature table", &mut signature_table);
    report(4, "splitting table and additivity", &mut splitting_table);
    report(5, "concavity identities", &mut || suite_gate(Suite::ConcavityIdentities, 200, vec![1, 2, 3, 4], Some(Duration::from_secs(300))));
    report(6, "mixed concavity bound", &mut || mixed_concavity_bound(&runs));
    report(7, "sign cancellation and height bound", &mut sign_and_height);
    report(8, "normal form round trip", &mut || suite_gate(Suite::NormalForm, 200, vec![1, 2, 3, 4], None));
    report(9, "Bott-type sum and monotonicity", &mut || bott(&runs));
    report(10, "common index jump", &mut common_jump);
    if !all {
        std::process::exit(1);
    }
}
