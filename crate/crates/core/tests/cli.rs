use std::path::Path;
use std::process::{Command, Output};

use contactdyn::cli::{catalog_config, Derived, CATALOG};
use contactdyn::expr::Expr;
use contactdyn::sampling::SampleBox;
use serde_json::{json, Value};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contactdyn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, config: &Value) -> String {
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn oscillator() -> Value {
    serde_json::from_str(CATALOG.iter().find(|(n, _)| *n == "damped_oscillator").unwrap().1).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn every_catalog_system_passes_all_checks() {
    let dir = tempfile::tempdir().unwrap();
    for (name, _) in CATALOG {
        let o = run(&["check", &format!("catalog:{name}")], dir.path());
        assert_eq!(o.status.code(), Some(0), "{name}:\n{}{}", stdout(&o), stderr(&o));
        let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("check-report.json")).unwrap()).unwrap();
        let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
        let mut unique = names.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), names.len(), "{name}: duplicate checks {names:?}");
    }
}

#[test]
fn unbound_parameter_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = oscillator();
    cfg["params"].as_object_mut().unwrap().remove("gamma");
    let path = write_config(dir.path(), "no_gamma", &cfg);
    let o = run(&["derive", &path], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("gamma") && err.contains("/expression"), "{err}");
}

#[test]
fn coordinate_arity_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = oscillator();
    cfg["coordinates"]["v"] = json!(["v", "w"]);
    let path = write_config(dir.path(), "arity", &cfg);
    let o = run(&["check", &path], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/coordinates/v"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_are_rejected_with_a_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = oscillator();
    cfg["integration"]["order"] = json!(4);
    let path = write_config(dir.path(), "unknown", &cfg);
    let o = run(&["simulate", &path], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/integration"), "{}", stderr(&o));
}

#[test]
fn derived_json_reproduces_the_in_memory_field() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["damped_oscillator", "gravity_friction", "parachute"] {
        let o = run(&["derive", &format!("catalog:{name}")], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let derived: Derived = serde_json::from_str(&std::fs::read_to_string(dir.path().join("derived.json")).unwrap()).unwrap();
        let loaded = catalog_config(name).unwrap().build().unwrap();
        let dynamics = loaded.dynamics.as_ref().unwrap();
        let field: Vec<Expr> = derived.field.unwrap().iter().map(|s| Expr::parse(s).unwrap()).collect();
        let reeb: Vec<Expr> = derived.reeb.unwrap().iter().map(|s| Expr::parse(s).unwrap()).collect();
        let energy = Expr::parse(&derived.energy).unwrap();
        let chart = dynamics.chart();
        for x in SampleBox::standard(chart.dim()).points(100, 3) {
            let b = chart.bind(&x);
            let pairs = field
                .iter()
                .zip(dynamics.field.components())
                .chain(reeb.iter().zip(dynamics.reeb.components()))
                .chain([(&energy, dynamics.energy())]);
            for (parsed, memory) in pairs {
                let (u, v) = (parsed.eval(&b).unwrap(), memory.eval(&b).unwrap());
                assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()), "{name}: {parsed} = {u}, {memory} = {v}");
            }
        }
    }
}

#[test]
fn simulation_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["simulate", "catalog:gravity_friction", "--seed", "7"], out);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let first = std::fs::read(a.join("gravity_friction.csv")).unwrap();
    assert_eq!(first, std::fs::read(b.join("gravity_friction.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "t,x,y,vx,vy,s,energy,momentum_x,energy_over_momentum_x");
    assert_eq!(text.lines().count(), 5002);
}

#[test]
fn zero_horizon_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = oscillator();
    cfg["integration"]["t_max"] = json!(0);
    let path = write_config(dir.path(), "damped_oscillator", &cfg);
    let o = run(&["simulate", &path], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("damped_oscillator.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0.0000000000000000e0,1.0000000000000000e0"), "{}", rows[1]);
}

#[test]
fn false_symmetry_fails_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = oscillator();
    cfg["symmetries"]["shift"] = json!(["1", "0", "0"]);
    let path = write_config(dir.path(), "shift", &cfg);
    let o = run(&["check", &path, "--suite", "symmetries"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn legendre_suite_without_companion_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = oscillator();
    cfg.as_object_mut().unwrap().remove("hamiltonian");
    let path = write_config(dir.path(), "bare", &cfg);
    let o = run(&["check", &path, "--suite", "legendre"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).to_lowercase().contains("skip"), "{}", stdout(&o));
}

#[test]
fn identically_singular_lagrangian_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = oscillator();
    cfg["expression"] = json!("q*v - q^2/2 - gamma*s");
    cfg.as_object_mut().unwrap().remove("hamiltonian");
    let path = write_config(dir.path(), "singular", &cfg);
    let o = run(&["derive", &path], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn pointwise_singularity_is_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = oscillator();
    cfg["expression"] = json!("v^4/4 - q^2/2 - gamma*s");
    cfg.as_object_mut().unwrap().remove("hamiltonian");
    let path = write_config(dir.path(), "quartic", &cfg);
    let o = run(&["derive", &path], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("not regular"), "{}", stdout(&o));
}

#[test]
fn catalog_lists_and_prints() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_contactdyn")).arg("catalog").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let names: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(names, ["damped_oscillator", "gravity_friction", "parachute"]);
    let o = Command::new(env!("CARGO_BIN_EXE_contactdyn")).args(["catalog", "nope"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["derive", "catalog:nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check", "catalog:parachute", "--box", "2,1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["check", "catalog:parachute", "--suite", "everything"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
