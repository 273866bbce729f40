use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_disclocus"));
    c.env_remove("DISCLOCUS_SEED");
    c
}

fn run(dir: &Path, args: &[&str]) -> String {
    let out = bin().current_dir(dir).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fail(dir: &Path, args: &[&str]) -> Output {
    let out = bin().current_dir(dir).args(args).output().unwrap();
    assert!(!out.status.success(), "{args:?} should fail");
    out
}

/// `(label, category)` of every row.
fn rows(path: &Path) -> Vec<(usize, String)> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let n = f.len();
            (f[n - 3].parse().unwrap(), f[n - 2].to_string())
        })
        .collect()
}

#[test]
fn quadratic_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let box_args = ["--box", "-1", "1", "-1", "1"];
    let mut gen = vec!["generate", "--model", "quadratic"];
    gen.extend(box_args);
    gen.extend(["--uniform", "1000", "--lines", "200", "--seed", "7", "--out", "q.csv"]);
    run(d, &gen);
    let cats: BTreeSet<String> = rows(&d.join("q.csv")).into_iter().map(|r| r.1).collect();
    assert_eq!(cats.len(), 3);
    assert!(d.join("q.csv.meta.json").exists() && d.join("q.csv.manifest.json").exists());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("q.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "generate");
    assert_eq!(manifest["seed"], 7);

    run(d, &["train", "--data", "q.csv", "--categories", "near_boundary,near_center", "--out", "m.json"]);
    let out = run(d, &[
        "eval", "--model-file", "m.json", "--data", "q.csv",
        "--categories", "near_boundary,near_center", "--results", "r.csv",
    ]);
    assert!(out.contains("accuracy 1 "), "{out}");
    run(d, &["eval", "--model-file", "m.json", "--data", "q.csv", "--categories", "uniform", "--results", "r.csv"]);
    let table = fs::read_to_string(d.join("r.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "train,test,accuracy,count");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("q:near_boundary+near_center,q:near_boundary+near_center,1,"));
}

#[test]
fn kuramoto3_and_conjsquare_labels() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &["generate", "--model", "kuramoto3", "--uniform", "100", "--lines", "20", "--out", "k.csv"]);
    let labels: BTreeSet<usize> = rows(&d.join("k.csv")).into_iter().map(|r| r.0).collect();
    assert!(labels.is_subset(&[0, 2, 4, 6].into()), "{labels:?}");

    run(d, &["generate", "--model", "conjsquare", "--lines", "50", "--out", "c.csv"]);
    let r = rows(&d.join("c.csv"));
    assert!(r.iter().all(|(l, c)| *l == 2 && c != "near_boundary"));
}

#[test]
fn kuramoto3_witness_degree() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["witness", "--model", "kuramoto3", "--seed", "3"]);
    assert!(out.contains("degree_observed: 12"), "{out}");
    let out = run(dir.path(), &["witness", "--model", "quadratic", "--point", "0,0", "--direction", "0.6,0.8"]);
    assert!(out.contains("degree_observed: 2"), "{out}");
}

/// Same seed, different worker counts: identical dataset, grid CSV and PPM bytes.
#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (tag, jobs) in [("a", "1"), ("b", "3")] {
        let data = format!("{tag}.csv");
        let model = format!("{tag}.json");
        let grid = format!("{tag}.grid");
        run(d, &[
            "--jobs", jobs, "generate", "--model", "cubic", "--uniform", "200", "--lines", "40",
            "--seed", "5", "--store-solutions", "--out", &data,
        ]);
        run(d, &[
            "--jobs", jobs, "train", "--data", &data, "--kind", "mlp", "--arch", "8,8",
            "--max-epochs", "200", "--seed", "5", "--out", &model,
        ]);
        run(d, &["--jobs", jobs, "grid", "--model-file", &model, "--data", &data, "--resolution", "48", "--out", &grid]);
    }
    for suffix in [".csv", ".csv.meta.json", ".csv.solutions.jsonl", ".grid.csv", ".grid.ppm"] {
        let a = fs::read(d.join(format!("a{suffix}"))).unwrap();
        let b = fs::read(d.join(format!("b{suffix}"))).unwrap();
        assert!(a == b, "{suffix} differs");
    }
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &["generate", "--model", "quadratic", "--uniform", "50", "--seed", "9", "--out", "flag.csv"]);
    let out = bin()
        .current_dir(d)
        .env("DISCLOCUS_SEED", "9")
        .args(["generate", "--model", "quadratic", "--uniform", "50", "--out", "env.csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(d.join("flag.csv")).unwrap(), fs::read(d.join("env.csv")).unwrap());
}

#[test]
fn bad_inputs_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &["generate", "--model", "quadratic", "--uniform", "20", "--out", "q.csv"]);
    // A dataset sidecar is not a model file.
    let out = fail(d, &["eval", "--model-file", "q.csv.meta.json", "--data", "q.csv"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));

    let mut text = fs::read_to_string(d.join("q.csv")).unwrap();
    text.push_str("0.1,oops,2,uniform,-1\n");
    fs::write(d.join("q.csv"), text).unwrap();
    let out = fail(d, &["train", "--data", "q.csv", "--out", "m.json"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("q.csv:22:"), "{err}");
}

#[test]
fn real_solve_and_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    run(d, &[
        "generate", "--model", "quadratic", "--uniform", "200", "--lines", "50",
        "--store-solutions", "--out", "q.csv", "--start-cache", "q.start",
    ]);
    assert!(d.join("q.start").exists() && d.join("q.start.critical").exists());
    let out = run(d, &[
        "solve-real", "--model", "quadratic", "--bank", "q.csv", "--point", "0,-1", "--point", "0.5,0.9", "--verify",
        "--start-cache", "q.start",
    ]);
    let reports: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["solutions"].as_array().unwrap().len(), 2);
    assert_eq!(reports[1]["solutions"].as_array().unwrap().len(), 0);

    let out = run(d, &["benchmark", "--model", "quadratic", "--bank", "q.csv", "--queries", "30", "--out", "b.csv"]);
    assert!(out.contains("ratio"), "{out}");
    let csv = fs::read_to_string(d.join("b.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("tracked_paths,count,avg_seconds,success_rate"));
    let counts: usize = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(counts, 30);
}
