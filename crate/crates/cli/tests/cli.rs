use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_concentrator"));
    c.env_remove("CONCENTRATOR_WORKERS");
    c
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn schema(name: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn json_checked(args: &[&str], schema_name: &str, code: i32) -> Value {
    let (c, out, err) = run(args);
    assert_eq!(c, code, "args {args:?}\nstdout {out}\nstderr {err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let validator = jsonschema::validator_for(&schema(schema_name)).unwrap();
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
    v
}

#[test]
fn sum_exact_certified() {
    let v = json_checked(
        &[
            "sum",
            "--m",
            "1",
            "--s",
            "6",
            "--mode",
            "exact",
            "--deterministic",
        ],
        "sum-report",
        0,
    );
    assert_eq!(v["total"]["num"], "14624");
    assert_eq!(v["total"]["den"], "78039");
    assert_eq!(v["verdict"], "certified");
}

#[test]
fn sum_is_deterministic() {
    let args = [
        "sum",
        "--m",
        "4",
        "--s",
        "24",
        "--mode",
        "interval",
        "--deterministic",
    ];
    assert_eq!(run(&args).1, run(&args).1);
    let with_workers = [
        "sum",
        "--m",
        "4",
        "--s",
        "24",
        "--mode",
        "interval",
        "--deterministic",
        "--workers",
        "3",
    ];
    assert_eq!(run(&args).1, run(&with_workers).1);
}

#[test]
fn sum_refuted_and_budget() {
    json_checked(
        &["sum", "--m", "151", "--s", "906", "--mode", "interval"],
        "sum-report",
        1,
    );
    let v = json_checked(
        &["sum", "--m", "3", "--s", "18", "--budget", "1"],
        "sum-report",
        2,
    );
    assert_eq!(v["complete"], false);
}

#[test]
fn sum_csv() {
    let (c, out, _) = run(&["sum", "--m", "2", "--s", "12", "--output", "csv"]);
    assert_eq!(c, 0);
    assert!(out.starts_with("k,approx,lo,hi,num,den\n"));
    assert_eq!(out.lines().count(), 7);
}

#[test]
fn smax_reports() {
    let v = json_checked(&["smax", "--m", "5", "--deterministic"], "smax-report", 0);
    assert_eq!(v["s_max"], 30);
    let v = json_checked(&["smax", "--m", "151", "--deterministic"], "smax-report", 0);
    assert!(v["s_max"].as_u64().unwrap() < 906);
    assert!(v["note"].as_str().unwrap().contains("fails"));
    let v = json_checked(
        &["smax", "--m", "2", "--mode", "exact", "--full"],
        "smax-report",
        0,
    );
    assert_eq!(v["evaluations"].as_array().unwrap().len(), 13);
}

#[test]
fn constants_values() {
    let v = json_checked(&["constants", "--gamma", "5.05"], "constants", 0);
    assert_eq!(v["K"], "38.8");
    assert_eq!(v["K_tilde"], "35.8");
    assert_eq!(v["w2"], "72.6");
    let v = json_checked(&["constants", "--gamma", "6"], "constants", 0);
    assert_eq!(v["K"], "44.5");
    assert_eq!(run(&["constants", "--gamma", "4"]).0, 64);
    assert_eq!(run(&["constants", "--gamma", "abc"]).0, 64);
}

#[test]
fn phi_and_cstar() {
    let v = json_checked(&["phi"], "phi", 0);
    assert_eq!(v["certified"]["negative"], true);
    let v = json_checked(&["phi", "--c", "5.8", "--grid-step", "0.01"], "phi", 1);
    assert_eq!(v["certified"]["positive"], true);
    json_checked(&["phi", "--c", "6", "--grid-step", "0.01"], "phi", 2);
    let v = json_checked(&["cstar"], "cstar", 0);
    let c = v["value"].as_f64().unwrap();
    assert!(c > 5.724889 && c < 5.72489);
}

#[test]
fn search_reports() {
    let args = [
        "search", "--m", "1", "--s", "6", "--trials", "200", "--seed", "7",
    ];
    let v = json_checked(&args, "search-report", 0);
    assert_eq!(v["trials"], 200);
    assert_eq!(run(&args).1, run(&args).1);
    let out = bin()
        .args(args)
        .env("CONCENTRATOR_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), run(&args).1);
    assert_eq!(run(&["search", "--m", "5", "--s", "30"]).0, 64);
}

#[test]
fn graph_files_verify() {
    let dir = tempfile::tempdir().unwrap();
    let (c, json, _) = run(&["graph", "--m", "1", "--s", "6", "--seed", "3"]);
    assert_eq!(c, 0);
    let g: Value = serde_json::from_str(&json).unwrap();
    let validator = jsonschema::validator_for(&schema("graph")).unwrap();
    assert!(validator.is_valid(&g));
    let jp = dir.path().join("g.json");
    std::fs::write(&jp, &json).unwrap();
    let (_, el, _) = run(&[
        "graph",
        "--m",
        "1",
        "--s",
        "6",
        "--seed",
        "3",
        "--format",
        "edge-list",
    ]);
    assert!(el.starts_with("p conc 6 4 30\n"));
    let ep = dir.path().join("g.txt");
    std::fs::write(&ep, &el).unwrap();
    let a = json_checked(
        &["verify", "--input", jp.to_str().unwrap()],
        "verification",
        0,
    );
    let b = json_checked(
        &["verify", "--input", ep.to_str().unwrap()],
        "verification",
        0,
    );
    assert_eq!(a, b);
    let c = json_checked(&["census", "--input", jp.to_str().unwrap()], "census", 0);
    assert!(c["violations"].as_array().unwrap().is_empty());
    assert_eq!(run(&["census", "--input", ep.to_str().unwrap()]).0, 64);

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "p conc 6 4 1\n0 1\n").unwrap();
    let v = json_checked(
        &["verify", "--input", bad.to_str().unwrap()],
        "verification",
        1,
    );
    assert_eq!(v["counterexample"], serde_json::json!([1]));
    std::fs::write(&bad, "p conc 6 4 1\n0 x\n").unwrap();
    let (c, _, err) = run(&["verify", "--input", bad.to_str().unwrap()]);
    assert_eq!(c, 64);
    assert!(err.contains("2:3"), "{err}");
}

#[test]
fn verify_budget_refusal() {
    let (c, _, err) = run(&["verify", "--m", "3", "--s", "18", "--budget", "10"]);
    assert_eq!(c, 2);
    assert!(err.contains("budget"));
}

#[test]
fn census_from_seed() {
    json_checked(
        &["census", "--m", "1", "--s", "6", "--seed", "1"],
        "census",
        0,
    );
    let (c, out, _) = run(&["census", "--m", "1", "--s", "6", "--output", "csv"]);
    assert_eq!(c, 0);
    assert!(out.starts_with("k,l,r,pairs\n"));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["sum", "--s", "6"]).0, 64);
    assert_eq!(
        run(&["sum", "--m", "1", "--s", "6", "--mode", "fuzzy"]).0,
        64
    );
    assert_eq!(run(&["frobnicate"]).0, 64);
    assert_eq!(run(&["sum", "--m", "1", "--s", "7"]).0, 64);
    assert_eq!(run(&["phi", "--precision", "5"]).0, 64);
    assert_eq!(run(&["constants", "--gamma", "5", "--output", "csv"]).0, 64);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn certify_all_quick() {
    let v = json_checked(
        &["certify-all", "--no-stretch", "--deterministic"],
        "certify",
        0,
    );
    assert_eq!(v["passed"], true);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 11);
}
