use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn swor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swor"))
        .env_remove("SWOR_TOL")
        .args(args)
        .output()
        .expect("swor runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn analyze_example_shows_pairwise_matrix() {
    let f = data("example_n4.json");
    let o = swor(&["analyze", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let m = &v["bivariate_marginals"];
    assert_eq!(m[0][1], "199/1200");
    assert_eq!(m[0][3], "1/12");
    assert_eq!(m[1][2], "1/12");
    assert_eq!(m[2][3], "1/1200");
    assert_eq!(v["psd"]["verdict"], "INDEFINITE");
    assert_eq!(v["arithmetic"]["tolerance"], 1e-9);
    assert_eq!(v["arithmetic"]["design"], "exact-rational");
    assert!(v["witness"]["x"].is_array());
}

#[test]
fn analyze_with_supplied_x() {
    let f = data("example_n4.json");
    let o = swor(&["analyze", f.to_str().unwrap(), "--x", ".441", "-.536", "-.536", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let without = v["variances"]["without_replacement"].as_f64().unwrap();
    let with = v["variances"]["with_replacement"].as_f64().unwrap();
    assert!((without - 0.485).abs() < 1e-3, "{without}");
    assert!((with - 0.450).abs() < 1e-3, "{with}");
}

#[test]
fn analyze_uniform_is_psd() {
    let f = data("uniform_n5.json");
    let o = swor(&["analyze", f.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("key,value\n"));
    assert!(out.contains("psd_verdict,PSD\n"));
    let min: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("min_eigenvalue,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(min.abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let f = data("example_n4.json");
    let o = swor(&["analyze", f.to_str().unwrap(), "--n", "3", "--format", "text"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("feasible         false"));

    let o = swor(&["analyze", "/nonexistent/population.json"]);
    assert_eq!(o.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"p": [0.5, "one/4", 0.25], "n": 2}"#).unwrap();
    let o = swor(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`p[1]`"));
}

#[test]
fn tolerance_from_environment() {
    let f = data("example_n4.json");
    let o = Command::new(env!("CARGO_BIN_EXE_swor"))
        .env("SWOR_TOL", "1e-6")
        .args(["analyze", f.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(json(&o)["arithmetic"]["tolerance"], 1e-6);
}

#[test]
fn polytope_commands() {
    let v = json(&swor(&["polytope", "--N", "4", "--n", "2", "--emit", "vertices"]));
    assert_eq!(v["vertices"].as_array().unwrap().len(), 8);
    assert_eq!(v["vertices"][0]["coords"][1], "1/3");

    let v = json(&swor(&["polytope", "--N", "4", "--n", "2", "--emit", "adjacency"]));
    assert_eq!(v["edges"].as_array().unwrap().len(), 12);

    let v = json(&swor(&["polytope", "--N", "5", "--n", "2", "--emit", "facets"]));
    assert_eq!(v["facets"].as_array().unwrap().len(), 10);
    assert_eq!(v["incidence"][0].as_array().unwrap().len(), 10);

    let v = json(&swor(&["polytope", "--N", "6", "--emit", "counterexample"]));
    assert!(v["min_eigenvalue"].as_f64().unwrap() < 0.0);
    assert_eq!(v["p"].as_array().unwrap().len(), 6);

    assert_eq!(swor(&["polytope", "--N", "3", "--emit", "counterexample"]).status.code(), Some(1));
}

#[test]
fn sample_single_stratum_accepts_every_proposal() {
    let f = data("strata_k1.json");
    let o = swor(&["sample", f.to_str().unwrap(), "--draws", "50", "--stats"]);
    assert_eq!(o.status.code(), Some(0));
    let stats: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(stats["acceptance_rate"], 1.0);
    for line in stdout(&o).lines() {
        let labels: Vec<usize> = serde_json::from_str(line).unwrap();
        assert_eq!(labels.len(), 3);
        assert!(labels.iter().all(|&l| (1..=8).contains(&l)));
    }
}

#[test]
fn sample_stats_respect_bound() {
    let f = data("strata_k2.json");
    let o = swor(&["sample", f.to_str().unwrap(), "--draws", "5000", "--stats"]);
    let stats: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    let c = stats["bound_c"].as_f64().unwrap();
    let it = stats["empirical_iterations_per_accept"].as_f64().unwrap();
    assert!(it <= c + 4.0 * (c * (c - 1.0) / 5000.0).sqrt());
}

#[test]
fn sample_seed_changes_stream() {
    let f = data("strata_k2.json");
    let a = swor(&["sample", f.to_str().unwrap(), "--draws", "20", "--seed", "1"]);
    let b = swor(&["sample", f.to_str().unwrap(), "--draws", "20", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn sample_rejects_oversized_n() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strata.json");
    std::fs::write(&path, r#"{"strata": [{"p": "1/5", "size": 3}, {"p": "2/15", "size": 3}], "n": 4}"#).unwrap();
    let o = swor(&["sample", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("smallest stratum size 3"));
}

#[test]
fn verify_identities_suite() {
    let o = swor(&["verify", "--suite", "identities"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("PASS identities"));
    assert!(out.contains("identity 4                   45/45"));
}
