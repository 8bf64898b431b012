use std::io::Write;
use std::process::{Command, Output};

const EXAMPLES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/examples");
const SCRIPTS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/scripts");

fn tjurina(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tjurina"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ex41() -> String {
    format!("{EXAMPLES}/ex41.dsp")
}

#[test]
fn minors_of_the_shipped_example() {
    let o = tjurina(&["minors", &ex41()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "w^4 - y*z\ny^3*w^3 - x*z\ny^4 - x*w\n");
}

#[test]
fn check_reports_strata() {
    let o = tjurina(&["check", &ex41()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("dim V(2x2 minors) = 2"), "{out}");
    assert!(out.contains("equals its strict version: false"), "{out}");
}

#[test]
fn chart_with_elimination_and_saturation_json() {
    let o = tjurina(&[
        "--json",
        "chart",
        &ex41(),
        "--I",
        "2",
        "--eliminate",
        "--saturate",
        "y*w",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let gens: Vec<&str> = v["generators"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g.as_str().unwrap())
        .collect();
    assert!(gens.contains(&"y^2*w^2 - a1*a3"), "{gens:?}");
    assert_eq!(v["vars"], serde_json::json!(["y", "w", "a1", "a3"]));
}

#[test]
fn dim_and_smooth() {
    assert_eq!(stdout(&tjurina(&["dim", &ex41()])), "2\n");
    let o = tjurina(&["smooth", "--vars", "x y v", "--gen", "x + y + v^2*x*y"]);
    assert!(stdout(&o).starts_with("smooth"));
    let o = tjurina(&["smooth", "--vars", "x z w", "--gen", "x^2 + z^3 + w^2*x"]);
    assert_eq!(stdout(&o), "singular at (0, 0, 0)\n");
}

#[test]
fn resolve_shipped_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("e7.json");
    let o = tjurina(&[
        "resolve",
        &format!("{SCRIPTS}/e7.rsc"),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("all checks passed\n"));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["failures"], serde_json::json!([]));
    assert_eq!(v["steps"].as_array().unwrap().len(), 7);

    let o = tjurina(&["resolve", &format!("{SCRIPTS}/a4.rsc")]);
    assert!(o.status.success());
}

#[test]
fn failing_script_exits_one() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(
        f,
        "step bad\nvars x y z\nclaim x*y + z^2\nmatrix (x) (z)\nmatrix (z) (y)\n"
    )
    .unwrap();
    let o = tjurina(&["resolve", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("first at step bad (#1)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn bad_input_exits_two() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, "vars x y\ntype 2 2 3\n(x) (y)\n(y) (x)\n").unwrap();
    let o = tjurina(&["minors", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("out of range"));
    let o = tjurina(&["chart", &ex41(), "--I", "7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn model_check_runs() {
    let o = tjurina(&[
        "model-check",
        "--m",
        "2",
        "--n",
        "3",
        "--t",
        "2",
        "--seed",
        "7",
        "--trials",
        "30",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("minor ideal dimension 4 (formula 4)"));
    let o = tjurina(&[
        "--json",
        "model-check",
        "--m",
        "2",
        "--n",
        "2",
        "--t",
        "1",
        "--trials",
        "5",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["witness"]["status"], "skipped");
}

#[test]
fn resource_caps_are_forwarded() {
    let o = tjurina(&["--max-pairs", "1", "dim", &ex41()]);
    assert_eq!(o.status.code(), Some(2));
}
