use std::path::PathBuf;
use std::process::{Command, Output};

const SQUARE: &str = r#"{"vertices":[[0,0],[1,0],[1,1],[0,1]]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptorsion")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ptorsion-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn geometry_of_square() {
    let out = run(&["geometry", SQUARE]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["metrics"]["area"], 1.0);
    assert_eq!(v["metrics"]["inradius"], 0.5);
}

#[test]
fn descriptor_file_and_errors() {
    let path = scratch("square.json");
    std::fs::write(&path, SQUARE).unwrap();
    assert_eq!(run(&["geometry", path.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(run(&["geometry", "/nonexistent/shape.json"]).status.code(), Some(1));
    assert_eq!(run(&["geometry", r#"{"vertices":[[0,0],[1,0],[0.5,-0.1],[1,1],[0,1]]}"#]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["bound", SQUARE, "--p", "1"]).status.code(), Some(1));
    assert_eq!(run(&["bound", SQUARE, "--weight", "cubic"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn deficit_report_and_planted_violation() {
    let out = run(&["deficit", SQUARE, "--p", "2", "--nodes", "4000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["branch"], "large-deficit");
    assert_eq!(v["theorem2_ok"], true);
    assert!((v["T"].as_f64().unwrap() - 0.035144).abs() < 1e-4);

    // a torsion value just above the Pólya floor breaks the width estimate
    let out = run(&["deficit", SQUARE, "--t", "0.0209"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["theorem2_ok"], false);
}

#[test]
fn bound_and_profile_outputs() {
    let out = run(&["bound", SQUARE, "--p", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["F_p_window"].is_array());
    assert!((v["integral"].as_f64().unwrap() - 1.0 / 32.0).abs() < 1e-6);

    let out = run(&["profile", SQUARE, "--grid", "64", "--weight", "linear:1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,P,mu,mu_f"));
    assert_eq!(lines.count(), 65);
}

#[test]
fn solve_writes_nodal_values() {
    let csv = scratch("u.csv");
    let out = run(&["solve", r#"{"shape":"disk","R":1,"k":128}"#, "--nodes", "3000", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let t = v["T"].as_f64().unwrap();
    assert!((t - std::f64::consts::PI / 8.0).abs() < 0.01 * t);
    let u = std::fs::read_to_string(&csv).unwrap();
    assert!(u.starts_with("x,y,u\n"));
}

#[test]
fn sequence_rows_svg_and_determinism() {
    let (a, b, svg) = (scratch("seq_a.csv"), scratch("seq_b.csv"), scratch("seq.svg"));
    let args = |out: &PathBuf| {
        vec![
            "sequence".to_string(),
            "--kind".into(),
            "rectangle".into(),
            "--l".into(),
            "0.4,0.2,0.1".into(),
            "--p".into(),
            "2".into(),
            "--nodes".into(),
            "4000".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let mut first = args(&a);
    first.extend(["--svg".to_string(), svg.to_str().unwrap().to_string()]);
    let first: Vec<&str> = first.iter().map(String::as_str).collect();
    assert_eq!(run(&first).status.code(), Some(0));
    let second = args(&b);
    let second: Vec<&str> = second.iter().map(String::as_str).collect();
    assert_eq!(run(&second).status.code(), Some(0));

    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let plot = std::fs::read_to_string(&svg).unwrap();
    assert!(plot.contains("<polyline") && !plot.contains("script"));
}

#[test]
fn fuzz_summary_is_clean_and_reproducible() {
    let a = run(&["fuzz", "--n", "1000", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    let v = json(&a);
    assert_eq!(v["violations"], 0);
    assert_eq!(v["count"], 1000);
    let b = run(&["fuzz", "--n", "1000", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
}
