use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use swkit::color::read_image;

fn swkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swkit")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = swkit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn flow_descends_writes_a_manifest_and_reproduces() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        ok(&[
            "flow", "--dataset", "swiss", "--n", "100", "--iters", "500", "--eval-every", "100", "--lr", "1",
            "--out", dir.to_str().unwrap(),
        ]);
        dir
    };
    let first = run("a");
    let rows = csv_rows(&first.join("trace.csv"));
    assert_eq!(rows[0], ["iteration", "w2"]);
    let w2: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(w2.len(), 6);
    assert!(w2.last().unwrap() < &w2[0]);

    let m = manifest(&first);
    assert_eq!(m["command"], "flow");
    assert_eq!(m["params"]["problem"]["iters"], 500);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);

    let second = run("b");
    for f in ["trace.csv", "final.csv"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn sweep_expands_the_grid_flags_the_best_and_divergence() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s");
    ok(&[
        "sweep", "--dataset", "knot", "--n", "40", "--iters", "50", "--eval-every", "50",
        "--lr-grid", "{1,3,5,8}e{-2..0}", "--out", dir.to_str().unwrap(),
    ]);
    let rows = csv_rows(&dir.join("sweep.csv"));
    assert_eq!(rows.len(), 1 + 12);
    assert_eq!(rows[1..].iter().filter(|r| r[4] == "true").count(), 1);

    let dir = tmp.path().join("d");
    ok(&[
        "sweep", "--n", "40", "--iters", "200", "--eval-every", "50", "--lr-grid", "1,1e12",
        "--out", dir.to_str().unwrap(),
    ]);
    let rows = csv_rows(&dir.join("sweep.csv"));
    assert_eq!(rows[2][2], "true");
    assert_eq!(rows[2][1], "");
    assert!(!rows.iter().flatten().any(|c| c.contains("NaN")));
}

#[test]
fn validate_rows_cover_the_grid_and_the_identity_control() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("v");
    ok(&[
        "validate", "--d-grid", "10,30", "--k", "2", "--k-grid", "1000", "--d", "1000", "--p", "1",
        "--runs", "4", "--out", dir.to_str().unwrap(),
    ]);
    let rows = csv_rows(&dir.join("validate.csv"));
    assert_eq!(rows[0], ["sweep", "d", "k", "p", "run", "seed", "ratio_hat", "exact"]);
    assert_eq!(rows.len(), 1 + 3 * 4);
    let control: Vec<f64> = rows
        .iter()
        .filter(|r| r[1] == "1000" && r[2] == "1000")
        .map(|r| r[6].parse().unwrap())
        .collect();
    assert_eq!(control.len(), 4);
    let mean = control.iter().sum::<f64>() / 4.0;
    assert!((mean - 1.0).abs() < 0.05, "{control:?}");
}

#[test]
fn essf_table_is_sorted_and_seeded() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("e");
    ok(&[
        "essf", "--d", "50,20", "--k", "10,2", "--p", "2,1", "--slices-grid", "100,10", "--runs", "20", "--seed", "9",
        "--out", dir.to_str().unwrap(),
    ]);
    let rows = csv_rows(&dir.join("essf.csv"));
    assert_eq!(rows[0], ["d", "k", "p", "L", "runs", "exact", "mean", "std", "seed"]);
    let keys: Vec<(usize, usize, usize)> = rows[1..]
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    assert_eq!(keys.len(), 2 * 2 * 2 * 2);
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));
    assert!(rows[1..].iter().all(|r| r[8] == "9"));
}

#[test]
fn bench_reports_every_variant_and_orders_max_sw_last() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("b");
    ok(&[
        "bench", "--variants", "classical,max-sw", "--d", "20", "--n", "200", "--slices", "50", "--reps", "3",
        "--out", dir.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(dir.join("bench.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::from_str::<serde_json::Value>(&v.to_string()).unwrap(), v);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0]["records"].as_array().unwrap().len(), 3);
    let mean = |i: usize| results[i]["mean_s"].as_f64().unwrap();
    assert!(mean(0) < mean(1));
    assert_eq!(v["L"], 50);
}

#[test]
fn color_transfer_round_trip_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let imgs = tmp.path().join("imgs");
    ok(&["generate", "--kind", "images", "--size", "24", "--out", imgs.to_str().unwrap()]);
    let cool = imgs.join("cool.ppm");
    let warm = imgs.join("warm.ppm");
    let out = tmp.path().join("out/recolored.png");
    let report = tmp.path().join("out/report.json");
    ok(&[
        "color-transfer", "--source", cool.to_str().unwrap(), "--target", warm.to_str().unwrap(),
        "--out", out.to_str().unwrap(), "--clusters", "40", "--iters", "300", "--w2-sample", "200",
        "--report", report.to_str().unwrap(),
    ]);
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(r["w2"].as_f64().unwrap() < 0.2);
    assert_eq!(manifest(&tmp.path().join("out"))["inputs"].as_array().unwrap().len(), 2);

    let same = tmp.path().join("same/out.ppm");
    ok(&[
        "color", "--source", cool.to_str().unwrap(), "--target", cool.to_str().unwrap(),
        "--out", same.to_str().unwrap(), "--clusters", "40", "--iters", "50",
    ]);
    let a = read_image(&cool).unwrap();
    let b = read_image(&same).unwrap();
    assert!(a.max_channel_delta(&b).unwrap() <= 1);
}

#[test]
fn config_files_supply_flags_and_explicit_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# tiny run\nn = 30\niters = 20\neval_every = 10\nlr = 0.5\n").unwrap();
    let dir = tmp.path().join("f");
    ok(&[
        "--threads", "1", "--config", cfg.to_str().unwrap(), "flow", "--lr", "2", "--out", dir.to_str().unwrap(),
    ]);
    let m = manifest(&dir);
    assert_eq!(m["params"]["lr"], 2.0);
    assert_eq!(m["params"]["problem"]["n"], 30);
    assert_eq!(csv_rows(&dir.join("trace.csv")).len(), 1 + 3);
}

#[test]
fn generate_writes_embedded_clouds() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("g");
    ok(&["generate", "--kind", "8gaussians", "--n", "16", "--ambient-d", "5", "--out", dir.to_str().unwrap()]);
    let rows = csv_rows(&dir.join("8gaussians.csv"));
    assert_eq!(rows.len(), 17);
    assert_eq!(rows[1].len(), 6);
}

#[test]
fn failures_exit_nonzero_with_a_reason() {
    let out = swkit(&["flow", "--source-csv", "/definitely/missing.csv", "--out", "/tmp/unused-swkit"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/definitely/missing.csv"));
    assert!(!swkit(&["sweep", "--lr-grid", "{1,2", "--out", "/tmp/unused-swkit"]).status.success());
    assert!(!swkit(&["no-such-command"]).status.success());
    assert!(swkit(&["--help"]).status.success());
}
