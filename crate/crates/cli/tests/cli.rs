//! End-to-end runs of the `ewsd` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn ewsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ewsd"))
        .args(args)
        .env_remove("EWSD_PARALLEL")
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = ewsd(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn ok_text(args: &[&str]) -> String {
    let out = ewsd(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    ewsd(args).status.code().expect("exited normally")
}

fn value_of(report: &Value, method: &str) -> f64 {
    report["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["method"] == method)
        .unwrap_or_else(|| panic!("no {method} result"))["value"]
        .as_f64()
        .unwrap()
}

#[test]
fn analyze_worked_example_all_methods() {
    let ex = fixture("ex23.txt");
    let r = ok_json(&["analyze", "--generator", &ex, "--epsilon", "0.2", "--metric", "equivocation", "--method", "all"]);
    assert!((value_of(&r, "oracle") - 1.44).abs() < 1e-12);
    assert!((value_of(&r, "subspace") - 1.44).abs() < 1e-12);
    let delta = &r["deltas"][0];
    assert_eq!((delta["a"].as_str(), delta["b"].as_str()), (Some("oracle"), Some("subspace")));
    assert!(delta["abs_delta"].as_f64().unwrap() <= 1e-9);
    // No seed, so the Monte Carlo method is skipped with a note.
    assert_eq!(r["results"].as_array().unwrap().len(), 2);
    assert_eq!(r["config"]["epsilon"], 0.2);

    let r = ok_json(&["analyze", "--generator", &ex, "--epsilon", "0.2", "--metric", "chi2", "--method", "all"]);
    for m in ["oracle", "subspace"] {
        assert!((value_of(&r, m) - 1.952).abs() <= 5e-4);
    }
    assert!(r["deltas"][0]["abs_delta"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn analyze_with_seed_adds_montecarlo_and_three_deltas() {
    let ex = fixture("ex23.txt");
    let r = ok_json(&[
        "analyze", "--generator", &ex, "--epsilon", "0.2", "--metric", "equivocation", "--seed", "7",
    ]);
    let mc = &r["results"][2];
    assert_eq!(mc["method"], "montecarlo");
    let se = mc["std_error"].as_f64().unwrap();
    assert!((mc["value"].as_f64().unwrap() - 1.44).abs() <= 4.0 * se);
    assert_eq!(r["deltas"].as_array().unwrap().len(), 3);
}

#[test]
fn analyze_fixed_mu_and_tv() {
    let ex = fixture("ex23.txt");
    let r = ok_json(&["analyze", "--generator", &ex, "--mu", "2", "--metric", "equivocation"]);
    assert!(r["deltas"][0]["abs_delta"].as_f64().unwrap() <= 1e-9);
    let r = ok_json(&["analyze", "--generator", &ex, "--epsilon", "0.2", "--metric", "tv"]);
    let tv = value_of(&r, "oracle");
    assert!((0.0..=1.0).contains(&tv));
    assert_eq!(r["results"].as_array().unwrap().len(), 1);
}

#[test]
fn analyze_csv_has_stable_header() {
    let ex = fixture("ex23.txt");
    let out = ok_text(&["analyze", "--generator", &ex, "--epsilon", "0.2", "--metric", "chi2", "--format", "csv"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("metric,method,value,std_error,runtime_ms"));
    assert!(lines.next().unwrap().starts_with("chi2,oracle,1.95"));
}

#[test]
fn analyze_uniform_q_in_range() {
    let dir = std::env::temp_dir().join(format!("ewsd-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("uniform7.json");
    let path = path.to_str().unwrap();
    ok_text(&["construct", "--kappa", "3", "--type", "uniform", "--output", path]);
    let r = ok_json(&["analyze", "--q", path, "--n", "7", "--epsilon", "0.5", "--metric", "equivocation", "--method", "subspace"]);
    let v = value_of(&r, "subspace");
    // k = n − κ message bits.
    assert!(v.is_finite() && (0.0..=4.0).contains(&v), "{v}");
    // Unrealizable at n = 5: the oracle needs a generator.
    assert_eq!(code(&["analyze", "--q", path, "--n", "5", "--epsilon", "0.5", "--metric", "chi2", "--method", "oracle"]), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn construct_simplex_hadamard_and_uniform_alias() {
    let simplex = ok_text(&["construct", "--kappa", "3", "--type", "uniform", "--emit-generator"]);
    assert_eq!(simplex, "1010101\n0110011\n0001111\n");
    let hadamard = ok_text(&["construct", "--kappa", "3", "--type", "sec", "--u", "2", "--emit-generator"]);
    assert_eq!(hadamard, "0101\n0011\n1111\n");
    assert_eq!(
        ok_text(&["construct", "--kappa", "3", "--type", "sec", "--u", "0"]),
        ok_text(&["construct", "--kappa", "3", "--type", "uniform"])
    );
}

#[test]
fn verify_passes_and_detects_corrupted_constant() {
    let r = ok_json(&["verify", "--seed", "3"]);
    assert_eq!(r["passed"], true);
    let suites = r["suites"].as_array().unwrap();
    assert!(suites.len() >= 5);
    for s in suites {
        assert!(s["checks"].as_u64().unwrap() > 0, "{s}");
        assert_eq!(s["failures"], 0, "{s}");
    }

    let out = ewsd(&["verify", "--seed", "3", "--corrupt-k3"]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["passed"], false);
    let failed: Vec<&str> = r["suites"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["failures"].as_u64().unwrap() > 0)
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"equivocation-equivalence"), "{failed:?}");
}

#[test]
fn probe_uniform_is_stationary() {
    let r = ok_json(&["probe", "--construction", "uniform", "--kappa", "3", "--epsilon", "0.5"]);
    assert_eq!(r["stationary"], true);
    assert!(r["projected_gradient_norm"].as_f64().unwrap() <= 1e-9);
    assert!(r["min_curvature"].as_f64().unwrap() > 0.0);
    for key in ["construction", "constraints", "samples", "violations", "min_margin", "seed"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert!(r["violations"].is_null());
}

#[test]
fn probe_hadamard_sphere_sample_has_no_violations() {
    let args = ["probe", "--construction", "sec", "--u", "2", "--kappa", "3", "--metric", "chi2", "--mode", "sphere-sample"];
    let r = ok_json(&args);
    assert_eq!(r["violations"], 0);
    assert_eq!(r["samples"], 10_000);
    assert!(r["projected_gradient_norm"].is_null());
    assert_eq!(ok_json(&args), r, "same flags and seed give the same report");
}

#[test]
fn probe_without_min_dist_finds_violations() {
    let r = ok_json(&[
        "probe", "--construction", "sec", "--u", "1", "--kappa", "4", "--epsilon", "0.2", "--metric", "chi2",
        "--no-min-dist", "--samples", "2000",
    ]);
    assert!(r["violations"].as_u64().unwrap() > 0);
}

#[test]
fn simulate_matches_oracle() {
    let ex = fixture("ex23.txt");
    let args = ["simulate", "--generator", &ex, "--epsilon", "0.2", "--trials", "100000", "--seed", "7"];
    let r = ok_json(&args);
    let se = r["std_error"].as_f64().unwrap();
    assert!((r["value"].as_f64().unwrap() - 1.44).abs() <= 4.0 * se);
    assert_eq!(r["method"], "montecarlo");
    assert_eq!(r["seed"], 7);
    let out = Command::new(env!("CARGO_BIN_EXE_ewsd"))
        .args(args)
        .args(["--parallel", "3"])
        .output()
        .unwrap();
    let again: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(again["value"], r["value"], "worker count does not change the estimate");
}

#[test]
fn bench_emits_csv_and_crossover_summary() {
    let out = ewsd(&["bench", "--kappa-range", "3..3", "--n-range", "4..5", "--epsilon", "0.3", "--repeats", "1"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "kappa,n,method,metric,median_runtime_ms");
    // 2 blocklengths × 2 metrics × 2 methods.
    assert_eq!(lines.len(), 9);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("kappa,metric,measured_crossover_n,asymptotic_claim_n"));
}

#[test]
fn exit_codes() {
    let ex = fixture("ex23.txt");
    // Validation errors.
    assert_eq!(code(&["construct", "--kappa", "3", "--type", "sec", "--u", "3"]), 2);
    assert_eq!(code(&["analyze", "--generator", &ex, "--epsilon", "0.2", "--metric", "tv", "--method", "subspace"]), 2);
    assert_eq!(code(&["analyze", "--generator", &ex, "--mu", "2", "--metric", "chi2", "--method", "montecarlo", "--seed", "1"]), 2);
    assert_eq!(code(&["analyze", "--generator", &ex, "--epsilon", "0.2", "--metric", "chi2", "--method", "montecarlo"]), 2);
    assert_eq!(code(&["analyze", "--generator", "/nonexistent/g.txt", "--epsilon", "0.2", "--metric", "chi2"]), 2);
    assert_eq!(code(&["simulate", "--generator", &ex, "--epsilon", "0.2"]), 2);
    assert_eq!(code(&["--parallel", "0", "verify", "--seed", "1"]), 2);
    // Resource limits.
    assert_eq!(code(&["bench", "--kappa-range", "3..9", "--n-range", "4..5"]), 3);
    assert_eq!(code(&["bench", "--kappa-range", "3..4", "--n-range", "4..25"]), 3);
    assert_eq!(code(&["verify", "--seed", "1", "--n-max", "25"]), 3);
    assert_eq!(code(&["probe", "--construction", "uniform", "--kappa", "9"]), 3);
}

#[test]
fn lattice_cap_spares_the_hyperplane_path() {
    // Nine rows: beyond the full lattice, within the hyperplane transform.
    let dir = std::env::temp_dir().join(format!("ewsd-cap-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("g9.txt");
    let rows: String = (0..9).map(|i| format!("{}\n", (0..12).map(|j| if (i + j) % 3 == 0 { '1' } else { '0' }).collect::<String>())).collect();
    std::fs::write(&path, rows).unwrap();
    let g = path.to_str().unwrap();
    let base = ["analyze", "--generator", g, "--epsilon", "0.3", "--method", "subspace", "--metric"];
    assert_eq!(code(&[&base[..], &["equivocation"]].concat()), 3);
    let r = ok_json(&[&base[..], &["chi2"]].concat());
    assert!(value_of(&r, "subspace").is_finite());
    std::fs::remove_dir_all(&dir).unwrap();
}
