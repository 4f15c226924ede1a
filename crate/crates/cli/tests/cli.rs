//! End-to-end tests against the built binary: exit codes, determinism,
//! file formats, and a golden report for a pinned seed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unicluster"))
        .args(args)
        .env_remove("UNICLUSTER_SEED")
        .output()
        .expect("binary runs")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

fn circles_csv(dir: &TempDir, n: &str, seed: &str) -> PathBuf {
    let path = dir.path().join(format!("circles_{n}_{seed}.csv"));
    let out = run(&[
        "generate",
        "--preset",
        "circles",
        "--n",
        n,
        "--seed",
        seed,
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    path
}

fn report(path: &Path) -> serde_json::Value {
    let text = fs::read_to_string(path).expect("report exists");
    serde_json::from_str(&text).expect("report parses")
}

fn fit_report(dir: &TempDir, name: &str, data: &Path, extra: &[&str]) -> serde_json::Value {
    let out_path = dir.path().join(format!("{name}.json"));
    let mut args = vec!["fit", "--in", data.to_str().unwrap(), "--out"];
    args.push(out_path.to_str().unwrap());
    args.extend_from_slice(extra);
    let out = run(&args);
    assert_exit(&out, 0);
    report(&out_path)
}

#[test]
fn generate_is_deterministic_and_shaped() {
    let dir = TempDir::new().unwrap();
    let a = circles_csv(&dir, "40", "7");
    let b_path = dir.path().join("again.csv");
    let out = run(&[
        "generate",
        "--preset",
        "circles",
        "--n",
        "40",
        "--seed",
        "7",
        "--out",
        b_path.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b_path).unwrap());

    let text = fs::read_to_string(&a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x0,x1,label"));
    assert_eq!(lines.count(), 40);

    let fig5 = dir.path().join("fig5.csv");
    let out = run(&[
        "generate",
        "--preset",
        "fig5",
        "--seed",
        "1",
        "--out",
        fig5.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    assert_eq!(fs::read_to_string(&fig5).unwrap().lines().count(), 1501);
}

#[test]
fn generate_usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("x.csv");
    let out = run(&[
        "generate",
        "--preset",
        "nonesuch",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_exit(&out, 2);
    let out = run(&["generate", "--preset", "circles"]);
    assert_exit(&out, 2);
}

#[test]
fn fit_is_deterministic_given_seed() {
    let dir = TempDir::new().unwrap();
    let data = circles_csv(&dir, "60", "3");
    let mut a = fit_report(&dir, "a", &data, &["--algo", "kmeans", "--k", "2", "--seed", "5"]);
    let mut b = fit_report(&dir, "b", &data, &["--algo", "kmeans", "--k", "2", "--seed", "5"]);
    assert_eq!(a["labels"], b["labels"]);
    a.as_object_mut().unwrap().remove("wall_time_ms");
    b.as_object_mut().unwrap().remove("wall_time_ms");
    assert_eq!(a, b);
}

#[test]
fn dbscan_formulations_agree() {
    let dir = TempDir::new().unwrap();
    let data = circles_csv(&dir, "80", "11");
    let flags = ["--eps", "0.9", "--min-pts", "3"];
    let graph = fit_report(&dir, "g", &data, &[&["--algo", "dbscan"], &flags[..]].concat());
    let spectral = fit_report(
        &dir,
        "s",
        &data,
        &[&["--algo", "dbscan-spectral"], &flags[..]].concat(),
    );
    assert_eq!(graph["labels"], spectral["labels"]);

    // At min-pts 1 the climbing formulation performs no moves and agrees too.
    let one = ["--eps", "0.9", "--min-pts", "1"];
    let graph1 = fit_report(&dir, "g1", &data, &[&["--algo", "dbscan"], &one[..]].concat());
    let climb1 = fit_report(
        &dir,
        "c1",
        &data,
        &[&["--algo", "dbscan-climb"], &one[..]].concat(),
    );
    assert_eq!(graph1["labels"], climb1["labels"]);
}

#[test]
fn fit_flag_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let data = circles_csv(&dir, "40", "1");
    let data = data.to_str().unwrap();
    let out = run(&["fit", "--algo", "sc", "--k", "2", "--in", data]);
    assert_exit(&out, 2);
    let out = run(&["fit", "--algo", "nonesuch", "--k", "2", "--in", data]);
    assert_exit(&out, 2);
    let out = run(&["fit", "--algo", "dbscan", "--eps", "-1", "--min-pts", "3", "--in", data]);
    assert_exit(&out, 2);
    let out = run(&[
        "fit", "--algo", "kkmeans", "--k", "2", "--kernel", "gaussian", "--in", data,
    ]);
    assert_exit(&out, 2);
}

#[test]
fn fit_io_errors_exit_3() {
    let out = run(&[
        "fit",
        "--algo",
        "kmeans",
        "--k",
        "2",
        "--in",
        "/nonexistent/data.csv",
    ]);
    assert_exit(&out, 3);
}

#[test]
fn fit_algorithm_errors_exit_4_with_error_name() {
    let dir = TempDir::new().unwrap();
    let data = circles_csv(&dir, "10", "1");
    let out = run(&[
        "fit",
        "--algo",
        "gmm",
        "--k",
        "50",
        "--in",
        data.to_str().unwrap(),
    ]);
    assert_exit(&out, 4);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("InvalidParam"), "stderr: {stderr}");
}

#[test]
fn every_algorithm_dispatches() {
    let dir = TempDir::new().unwrap();
    let data = circles_csv(&dir, "60", "2");
    let cases: &[(&str, &[&str])] = &[
        ("gmm", &["--algo", "gmm", "--k", "2"]),
        ("kmeans", &["--algo", "kmeans", "--k", "2"]),
        ("kkmeans", &["--algo", "kkmeans", "--k", "2"]),
        (
            "kkmeans",
            &["--algo", "kkmeans", "--k", "2", "--kernel", "gaussian", "--sigma", "1.0"],
        ),
        (
            "kkmeans",
            &["--algo", "kkmeans", "--k", "2", "--kernel", "polynomial", "--poly-b", "3"],
        ),
        ("njw-sc", &["--algo", "sc", "--k", "2", "--sigma", "0.7"]),
        ("dbscan", &["--algo", "dbscan", "--eps", "0.9", "--min-pts", "3"]),
        (
            "dbscan-spectral",
            &["--algo", "dbscan-spectral", "--eps", "0.9", "--min-pts", "3"],
        ),
        (
            "dbscan-climb",
            &["--algo", "dbscan-climb", "--eps", "0.9", "--min-pts", "3"],
        ),
        ("meanshift", &["--algo", "meanshift", "--eps", "0.9"]),
    ];
    for (i, (algorithm, flags)) in cases.iter().enumerate() {
        let r = fit_report(&dir, &format!("case{i}"), &data, flags);
        assert_eq!(r["algorithm"], *algorithm, "case {i}");
        assert_eq!(r["labels"].as_array().unwrap().len(), 60, "case {i}");
    }
}

#[test]
fn gmm_report_carries_the_mixture() {
    let dir = TempDir::new().unwrap();
    let data = circles_csv(&dir, "40", "4");
    let r = fit_report(&dir, "gmm", &data, &["--algo", "gmm", "--k", "2", "--seed", "1"]);
    let mixture = &r["mixture"];
    assert_eq!(mixture["weights"].as_array().unwrap().len(), 2);
    assert_eq!(mixture["means"][0].as_array().unwrap().len(), 2);
    assert_eq!(mixture["covariances"][0][1].as_array().unwrap().len(), 2);
    let trace = r["loglik_trace"].as_array().unwrap();
    assert!(!trace.is_empty());
}

#[test]
fn score_reports_unity_for_identical_labelings() {
    let dir = TempDir::new().unwrap();
    let data = circles_csv(&dir, "40", "9");
    let data = data.to_str().unwrap();
    let out = run(&["score", "--pred", data, "--truth", data]);
    assert_exit(&out, 0);
    let value: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("score JSON");
    assert_eq!(value["ami"], 1.0);
    assert_eq!(value["ari"], 1.0);
}

#[test]
fn score_length_mismatch_exits_2() {
    let dir = TempDir::new().unwrap();
    let a = circles_csv(&dir, "40", "1");
    let b = circles_csv(&dir, "42", "1");
    let out = run(&["score", "--pred", a.to_str().unwrap(), "--truth", b.to_str().unwrap()]);
    assert_exit(&out, 2);
}

#[test]
fn env_seed_is_the_fallback() {
    let dir = TempDir::new().unwrap();
    let data = circles_csv(&dir, "60", "3");
    let flagged = fit_report(&dir, "f", &data, &["--algo", "kmeans", "--k", "2", "--seed", "9"]);
    let out_path = dir.path().join("env.json");
    let out = Command::new(env!("CARGO_BIN_EXE_unicluster"))
        .args([
            "fit",
            "--algo",
            "kmeans",
            "--k",
            "2",
            "--in",
            data.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ])
        .env("UNICLUSTER_SEED", "9")
        .output()
        .expect("binary runs");
    assert_exit(&out, 0);
    let env_report = report(&out_path);
    assert_eq!(flagged["labels"], env_report["labels"]);
    assert_eq!(env_report["seed"], 9);
}

#[test]
fn plot_data_has_one_row_per_point() {
    let dir = TempDir::new().unwrap();
    let data = circles_csv(&dir, "50", "6");
    let tsv = dir.path().join("plot.tsv");
    let out_path = dir.path().join("fit.json");
    let out = run(&[
        "fit",
        "--algo",
        "kmeans",
        "--k",
        "2",
        "--in",
        data.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
        "--emit-plot-data",
        tsv.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let text = fs::read_to_string(&tsv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x\ty\tlabel"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r.split('\t').count() == 3));
}

#[test]
fn golden_kmeans_report_is_stable() {
    let dir = TempDir::new().unwrap();
    let data = circles_csv(&dir, "40", "1");
    let mut fresh = fit_report(
        &dir,
        "golden",
        &data,
        &["--algo", "kmeans", "--k", "2", "--seed", "0", "--restarts", "2"],
    );
    fresh.as_object_mut().unwrap().remove("wall_time_ms");
    let stored: serde_json::Value = serde_json::from_str(include_str!("goldens/kmeans_circles.json"))
        .expect("golden parses");
    assert_eq!(fresh, stored);
}
