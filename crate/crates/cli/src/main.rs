//! `brake-index`: index, signature, brake-orbit and property-suite reports as JSON.
//!
//! Exit codes: 0 success, 1 input error or failed property, 2 numerically
//! indeterminate, 3 solver non-convergence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use brake_index::index::{index_lagrangian, index_omega, one, unit, IndexReport};
use brake_index::orbits::{enumerate_brake_orbits, linearized_path, orbit_indices, HamiltonianConfig, OrbitIndices};
use brake_index::path::{brake_iterate, json::path_from_json};
use brake_index::signature::{concavity, inertia, m_epsilon, normal_form_l0l1, signature_small_eps};
use brake_index::suites::{run_suite, run_trial, Outcome, Suite, SuiteConfig, TrialResult};
use brake_index::symplectic::{json::matrix_from_json, Lagrangian, SymplecticMatrix};
use brake_index::{Error, Result, Tolerances};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "brake-index", version, about = "Maslov-type indices, ε-signatures and brake orbits")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Master seed for property suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Multiplies every tolerance threshold; `BRAKE_INDEX_TOL_*` variables override afterwards.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Indices of a symplectic path read from JSON.
    Index(IndexArgs),
    /// Inertia of `M_ε`, the (L0, L1)-normal form, or concavity of a path.
    Signature(SignatureArgs),
    /// Enumerate brake orbits of a Hamiltonian read from TOML.
    Orbits(OrbitsArgs),
    /// Run a seeded property suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct IndexArgs {
    path: PathBuf,
    /// `re` or `re,im` on the unit circle.
    #[arg(long, conflicts_with = "omega_arg")]
    omega: Option<String>,
    /// `ω = e^{iθ}`.
    #[arg(long, allow_hyphen_values = true)]
    omega_arg: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
    lagrangian: Option<u8>,
    /// Use the k-th brake iterate of the path.
    #[arg(long, default_value_t = 1)]
    iterate: usize,
}

#[derive(Args, Debug)]
struct SignatureArgs {
    matrix: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    #[arg(long)]
    normal_form: bool,
    #[arg(long, value_name = "PATH")]
    concavity_of: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OrbitsArgs {
    hamiltonian: PathBuf,
    #[arg(long)]
    grid: Option<usize>,
    /// Index table of iterates `m = 1..=M` for every class.
    #[arg(long, value_name = "M")]
    indices: Option<usize>,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// One of the suite names; optional with `--replay`.
    suite: Option<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Comma-separated dimensions, cycled over trials.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Rerun the reproducers in a report, trial result or reproducer file.
    #[arg(long, value_name = "FILE")]
    replay: Option<PathBuf>,
}

/// A finished command: the report and the exit code it warrants.
struct Done {
    report: Value,
    code: u8,
}

impl Done {
    fn ok(report: Value) -> Self {
        Done { report, code: 0 }
    }
}

/// Input files read so far, replayed in the reproducer of a failure.
#[derive(Default)]
struct Inputs(Vec<(String, String)>);

impl Inputs {
    fn read(&mut self, p: &Path) -> Result<String> {
        let s = fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
        self.0.push((p.display().to_string(), s.clone()));
        Ok(s)
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn tolerances(g: &Global) -> Result<Tolerances> {
    if !(g.tol_scale.is_finite() && g.tol_scale > 0.0) {
        return Err(Error::Domain(format!("--tol-scale must be positive, got {}", g.tol_scale)));
    }
    let mut t = Tolerances::default().scaled(g.tol_scale);
    t.apply_env(|k| std::env::var(k).ok());
    Ok(t)
}

fn parse_omega(s: &str) -> Result<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| x.parse::<f64>().map_err(|_| Error::Parse(format!("--omega: not a number: {x:?}")));
    let w = match parts.as_slice() {
        [re] => Complex64::new(num(re)?, 0.0),
        [re, im] => Complex64::new(num(re)?, num(im)?),
        _ => return Err(Error::Parse(format!("--omega takes re or re,im, got {s:?}"))),
    };
    if (w.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("ω = {w} is not on the unit circle")));
    }
    Ok(w)
}

fn index_entry(kind: &str, r: &IndexReport) -> Value {
    json!({ "kind": kind, "i": r.pair.i, "nu": r.pair.nu, "flavor": r.pair.flavor, "routes": r.routes, "perturbation_eps": r.perturbation_eps })
}

fn cmd_index(a: &IndexArgs, tol: &Tolerances, inputs: &mut Inputs) -> Result<Done> {
    let g = path_from_json(&inputs.read(&a.path)?)?;
    if a.iterate == 0 {
        return Err(Error::Domain("--iterate must be at least 1".into()));
    }
    let g = if a.iterate > 1 { brake_iterate(&g, a.iterate)? } else { g };
    let omega = match (&a.omega, a.omega_arg) {
        (Some(s), _) => Some(parse_omega(s)?),
        (None, Some(t)) => Some(unit(t)),
        (None, None) => None,
    };
    let mut reports = Vec::new();
    let all = omega.is_none() && a.lagrangian.is_none();
    if let Some(w) = omega.or(all.then(one)) {
        reports.push(index_entry("omega", &index_omega(&g, w, tol)?));
    }
    let ls = match a.lagrangian {
        Some(0) => vec![Lagrangian::L0],
        Some(_) => vec![Lagrangian::L1],
        None if all => vec![Lagrangian::L0, Lagrangian::L1],
        None => vec![],
    };
    for l in ls {
        reports.push(index_entry("lagrangian", &index_lagrangian(&g, l, tol)?));
    }
    Ok(Done::ok(json!({
        "command": "index",
        "dim_half": g.dim_half(),
        "tau": g.tau(),
        "iterate": a.iterate,
        "reports": reports,
    })))
}

fn signature_entry(s: &brake_index::symplectic::InertiaTriple) -> Value {
    json!({ "m_plus": s.m_plus, "m_zero": s.m_zero, "m_minus": s.m_minus, "signature": s.signature() })
}

fn cmd_signature(a: &SignatureArgs, tol: &Tolerances, inputs: &mut Inputs) -> Result<Done> {
    if a.matrix.is_none() && a.concavity_of.is_none() {
        return Err(Error::Parse("signature needs a matrix file or --concavity-of".into()));
    }
    if a.matrix.is_none() && (a.eps.is_some() || a.normal_form) {
        return Err(Error::Parse("--eps and --normal-form need a matrix file".into()));
    }
    let mut report = json!({ "command": "signature" });
    if let Some(p) = &a.matrix {
        let m = SymplecticMatrix::with_tol(matrix_from_json(&inputs.read(p)?)?, tol.symplectic)?;
        report["dim_half"] = json!(m.dim_half());
        if let Some(e) = a.eps {
            let s = m_epsilon(&m, e);
            let t = inertia(&s.matrix, tol.inertia)?;
            report["m_epsilon"] = json!({ "eps": e, "matrix": s.matrix, "inertia": signature_entry(&t) });
        } else if !a.normal_form {
            report["small_eps"] = json!({
                "positive": signature_small_eps(&m, 1.0, tol)?,
                "negative": signature_small_eps(&m, -1.0, tol)?,
                "eps": tol.sig_eps,
            });
        }
        if a.normal_form {
            report["normal_form"] = to_value(&normal_form_l0l1(&m, tol)?);
        }
    }
    if let Some(p) = &a.concavity_of {
        let g = path_from_json(&inputs.read(p)?)?;
        report["concavity"] = to_value(&concavity(&g, tol)?);
    }
    Ok(Done::ok(report))
}

#[derive(Serialize)]
struct CsvRow {
    class: usize,
    m: Option<usize>,
    period: f64,
    symmetry: String,
    i_l0: Option<i64>,
    nu_l0: Option<usize>,
    i_l1: Option<i64>,
    nu_l1: Option<usize>,
}

fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    let io = |e: csv::Error| Error::Parse(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn cmd_orbits(a: &OrbitsArgs, tol: &Tolerances, inputs: &mut Inputs) -> Result<Done> {
    let cfg = HamiltonianConfig::from_toml(&inputs.read(&a.hamiltonian)?)?;
    let ham = cfg.build()?;
    let mut opts = cfg.options();
    if let Some(g) = a.grid {
        opts.grid_density = g;
    }
    let e = enumerate_brake_orbits(&ham, &opts)?;
    if e.converged == 0 {
        return Err(Error::NonConvergence(format!("no shot converged on the {} grid directions", e.directions)));
    }
    let mut classes = Vec::new();
    let mut rows = Vec::new();
    for c in &e.classes {
        let symmetry = to_value(&c.symmetry.class).as_str().unwrap_or_default().to_string();
        let table: Vec<OrbitIndices> = match a.indices {
            Some(mm) => {
                let g = linearized_path(&c.orbit, &ham)?;
                (1..=mm).map(|m| orbit_indices(&g, m, tol)).collect::<Result<_>>()?
            }
            None => Vec::new(),
        };
        if table.is_empty() {
            rows.push(CsvRow { class: c.id, m: None, period: c.orbit.period, symmetry: symmetry.clone(), i_l0: None, nu_l0: None, i_l1: None, nu_l1: None });
        }
        for t in &table {
            rows.push(CsvRow {
                class: c.id,
                m: Some(t.m),
                period: c.orbit.period,
                symmetry: symmetry.clone(),
                i_l0: Some(t.l0.i),
                nu_l0: Some(t.l0.nu),
                i_l1: Some(t.l1.i),
                nu_l1: Some(t.l1.nu),
            });
        }
        classes.push(json!({
            "id": c.id,
            "period": c.orbit.period,
            "period_divisor": c.orbit.period_divisor,
            "shots": c.shots,
            "symmetry": c.symmetry,
            "initial_state": c.orbit.samples[0],
            "residuals": c.orbit.residuals,
            "indices": table.iter().map(|t| json!({
                "m": t.m,
                "i_l0": t.l0.i, "nu_l0": t.l0.nu,
                "i_l1": t.l1.i, "nu_l1": t.l1.nu,
                "i_double": t.omega.i, "nu_double": t.omega.nu,
                "bott_holds": t.bott_holds,
            })).collect::<Vec<_>>(),
        }));
    }
    if let Some(p) = &a.csv {
        write_csv(p, &rows)?;
    }
    Ok(Done::ok(json!({
        "command": "orbits",
        "hamiltonian": e.hamiltonian,
        "grid_density": opts.grid_density,
        "directions": e.directions,
        "converged": e.converged,
        "failed": e.failed,
        "frequencies": e.frequencies,
        "resonant": e.resonant,
        "classes": classes,
    })))
}

fn verdict_code(results: &[TrialResult]) -> u8 {
    if results.iter().any(|r| r.outcome == Outcome::Fail) {
        1
    } else if results.iter().any(|r| r.outcome == Outcome::Error) {
        2
    } else {
        0
    }
}

/// Reproducers in a suite report, a trial result, or a bare reproducer.
fn reproducers(v: &Value) -> Vec<&Value> {
    if let Some(rs) = v.get("results").and_then(Value::as_array) {
        return rs.iter().filter_map(|r| r.get("reproducer")).collect();
    }
    vec![v.get("reproducer").unwrap_or(v)]
}

fn replay_one(r: &Value) -> Result<TrialResult> {
    let field = |k: &str| r.get(k).ok_or_else(|| Error::Parse(format!("reproducer lacks \"{k}\"")));
    let suite = Suite::from_name(field("suite")?.as_str().unwrap_or_default())?;
    let uint = |k: &str| field(k).and_then(|x| x.as_u64().ok_or_else(|| Error::Parse(format!("reproducer field \"{k}\" is not an unsigned integer"))));
    let tol: Tolerances = serde_json::from_value(field("tol")?.clone()).map_err(|e| Error::Parse(format!("reproducer tolerances: {e}")))?;
    Ok(run_trial(suite, uint("trial")? as usize, uint("seed")?, uint("dim")? as usize, &tol))
}

fn cmd_verify(a: &VerifyArgs, seed: u64, tol: &Tolerances, inputs: &mut Inputs) -> Result<Done> {
    if let Some(p) = &a.replay {
        let text = inputs.read(p)?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: line {}, column {}: {e}", p.display(), e.line(), e.column())))?;
        let results: Vec<TrialResult> = reproducers(&v).into_iter().map(replay_one).collect::<Result<_>>()?;
        let code = verdict_code(&results);
        return Ok(Done { report: json!({ "command": "verify", "replayed": results }), code });
    }
    let name = a.suite.as_deref().ok_or_else(|| Error::Parse("verify needs a suite name or --replay".into()))?;
    let suite = Suite::from_name(name)?;
    let mut cfg = SuiteConfig::new(suite, a.trials, seed);
    if let Some(d) = &a.dims {
        cfg.dims = d.clone();
    }
    cfg.tol = tol.clone();
    let report = run_suite(&cfg)?;
    let code = verdict_code(&report.results);
    Ok(Done { report: to_value(&report), code })
}

fn emit(out: Option<&Path>, v: &Value) -> std::io::Result<()> {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    match out {
        Some(p) => fs::write(p, s),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(s.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(j) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("brake-index: --jobs: {e}");
            return ExitCode::from(1);
        }
    }
    let mut inputs = Inputs::default();
    let tol = tolerances(&cli.global);
    let done = tol.as_ref().map_err(Clone::clone).and_then(|tol| match &cli.command {
        Command::Index(a) => cmd_index(a, tol, &mut inputs),
        Command::Signature(a) => cmd_signature(a, tol, &mut inputs),
        Command::Orbits(a) => cmd_orbits(a, tol, &mut inputs),
        Command::Verify(a) => cmd_verify(a, cli.global.seed, tol, &mut inputs),
    });
    let (report, code) = match done {
        Ok(d) => (d.report, d.code),
        Err(e) => {
            eprintln!("brake-index: {e}");
            let argv: Vec<String> = std::env::args().skip(1).collect();
            let files: serde_json::Map<String, Value> = inputs.0.into_iter().map(|(k, v)| (k, Value::String(v))).collect();
            let report = json!({
                "error": { "message": e.to_string(), "exit_code": e.exit_code() },
                "reproducer": { "args": argv, "inputs": files, "seed": cli.global.seed, "tol": tol.ok() },
            });
            (report, e.exit_code() as u8)
        }
    };
    if let Err(e) = emit(cli.global.out.as_deref(), &report) {
        eprintln!("brake-index: writing report: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
