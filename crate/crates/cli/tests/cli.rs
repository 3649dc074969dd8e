use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brake-index")).args(args).env_remove("BRAKE_INDEX_TOL_KERNEL").output().expect("binary runs")
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn reports_of<'a>(v: &'a Value, kind: &str) -> Vec<&'a Value> {
    v["reports"].as_array().unwrap().iter().filter(|r| r["flavor"]["kind"] == kind).collect()
}

#[test]
fn rotation_lagrangian_index() {
    let o = run(&["index", &data("rotation2.json"), "--lagrangian", "0"]);
    assert_eq!(code(&o), 0);
    let v = report(&o);
    let l0 = reports_of(&v, "l0");
    assert_eq!(l0.len(), 1);
    assert_eq!(l0[0]["i"], 0);
    assert_eq!(l0[0]["nu"], 2);
    assert!(reports_of(&v, "omega").is_empty());
}

#[test]
fn rotation_omega_index() {
    let o = run(&["index", &data("rotation2.json"), "--omega", "1"]);
    assert_eq!(code(&o), 0);
    let v = report(&o);
    let w = reports_of(&v, "omega");
    assert_eq!(w[0]["i"], 2);
    assert_eq!(w[0]["nu"], 0);
}

#[test]
fn default_index_reports_all_three() {
    let v = report(&run(&["index", &data("rotation2.json")]));
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);
    assert_eq!(reports_of(&v, "l1")[0]["nu"], 2);
}

#[test]
fn omega_off_the_circle_is_an_input_error() {
    assert_eq!(code(&run(&["index", &data("rotation2.json"), "--omega", "0.5"])), 1);
}

#[test]
fn malformed_json_exits_one_with_location() {
    let o = run(&["index", &data("malformed.json")]);
    assert_eq!(code(&o), 1);
    let v = report(&o);
    assert!(v["error"]["message"].as_str().unwrap().contains("line 2"));
    assert!(v["reproducer"]["inputs"].as_object().unwrap().len() == 1);
    assert!(v["reproducer"]["tol"].is_object());
}

#[test]
fn missing_file_exits_one() {
    assert_eq!(code(&run(&["index", "/nonexistent/path.json"])), 1);
}

#[test]
fn usage_error_exits_one() {
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["index", &data("rotation2.json"), "--lagrangian", "2"])), 1);
}

#[test]
fn rotation_by_third_turn_has_zero_signature() {
    let o = run(&["signature", &data("rot_pi3.json")]);
    assert_eq!(code(&o), 0);
    let v = report(&o);
    assert_eq!(v["small_eps"]["positive"], 0);
    assert_eq!(v["small_eps"]["negative"], 0);
}

#[test]
fn shear_signature_at_small_positive_eps() {
    let v = report(&run(&["signature", &data("shear.json"), "--eps", "1e-3"]));
    assert_eq!(v["m_epsilon"]["inertia"]["signature"], 2);
    let v = report(&run(&["signature", &data("shear.json")]));
    assert_eq!(v["small_eps"]["positive"], 2);
}

#[test]
fn rank_ambiguous_normal_form_exits_two() {
    let o = run(&["signature", &data("rank_ambiguous.json"), "--normal-form"]);
    assert_eq!(code(&o), 2);
    assert!(report(&o)["error"]["message"].as_str().unwrap().contains("indeterminate branch"));
}

#[test]
fn concavity_of_rotation_path() {
    let o = run(&["signature", "--concavity-of", &data("rotation2.json")]);
    assert_eq!(code(&o), 0);
    let c = &report(&o)["concavity"];
    assert_eq!(c["concav"], 0);
    assert_eq!(c["concav_star"], 0);
}

#[test]
fn planar_ellipsoid_orbits_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("classes.csv");
    let o = run(&["orbits", &data("ellipsoid.toml"), "--indices", "2", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = report(&o);
    let classes = v["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 2);
    assert!(classes.iter().all(|c| c["symmetry"]["class"] == "symmetric"));
    assert_eq!(v["resonant"], false);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "class,m,period,symmetry,i_l0,nu_l0,i_l1,nu_l1");
    assert_eq!(lines.len(), 1 + 2 * 2);
}

#[test]
fn sphere_is_resonant() {
    let o = run(&["orbits", &data("sphere.toml")]);
    assert_eq!(code(&o), 0);
    assert_eq!(report(&o)["resonant"], true);
}

#[test]
fn spatial_ellipsoid_index_table_is_monotone() {
    let o = run(&["orbits", &data("ellipsoid3.toml"), "--indices", "4"]);
    assert_eq!(code(&o), 0);
    let v = report(&o);
    let classes = v["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 3);
    for c in classes {
        let i: Vec<i64> = c["indices"].as_array().unwrap().iter().map(|r| r["i_l0"].as_i64().unwrap()).collect();
        assert_eq!(i.len(), 4);
        assert!(i.windows(2).all(|w| w[1] > w[0]), "{i:?}");
        assert!(c["indices"].as_array().unwrap().iter().all(|r| r["bott_holds"] == true));
    }
}

#[test]
fn verify_is_byte_deterministic() {
    let args = ["verify", "sign-cancellation", "--trials", "24", "--seed", "7"];
    let a = run(&args);
    let b = run(&[&args[..], &["--jobs", "1"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = report(&a);
    assert_eq!(v["passed"], 24);
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn verify_writes_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["verify", "splitting", "--trials", "4", "--dims", "1,2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["dims"], serde_json::json!([1, 2]));
    assert_eq!(v["results"][1]["dim"], 2);
}

#[test]
fn unknown_suite_exits_one() {
    assert_eq!(code(&run(&["verify", "no-such-suite"])), 1);
}

#[test]
fn replay_reruns_a_trial() {
    let v = report(&run(&["verify", "height-bound", "--trials", "3", "--seed", "11"]));
    let t = &v["results"][2];
    let repro = serde_json::json!({ "suite": "height-bound", "trial": 2, "seed": t["seed"], "dim": t["dim"], "tol": v["config"]["tol"] });
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("repro.json");
    std::fs::write(&f, repro.to_string()).unwrap();
    let o = run(&["verify", "--replay", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = &report(&o)["replayed"][0];
    assert_eq!(r["detail"], t["detail"]);
    assert_eq!(r["outcome"], "pass");
}

#[test]
fn env_override_reaches_the_reproducer() {
    let o = Command::new(env!("CARGO_BIN_EXE_brake-index"))
        .args(["--tol-scale", "10", "index", &data("malformed.json")])
        .env("BRAKE_INDEX_TOL_KERNEL", "3e-6")
        .output()
        .unwrap();
    let tol = &report(&o)["reproducer"]["tol"];
    assert_eq!(tol["kernel"], 3e-6);
    assert_eq!(tol["rank"], 1e-7);
}
