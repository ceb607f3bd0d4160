use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn covshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covshift")).args(args).env("RUST_LOG", "error").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn csv_values(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

#[test]
fn ratio_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.csv", "x\n0\n");
    let out = dir.path().join("b.csv");
    let o = covshift(&[
        "ratio", "--kernel", "gaussian:1", "--lambda", "1", "--source", &s, "--target", &s, "--eval-grid", "0:0:1",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out).unwrap();
    assert!(text.starts_with("x,beta_hat\n"));
    let v = csv_values(&text);
    assert_eq!(v.len(), 1);
    assert!((v[0].1 - 0.5).abs() < 1e-15);
}

#[test]
fn ratio_with_schedule_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.csv", "-0.5\n0.0\n0.5\n0.9\n");
    let t = write(dir.path(), "t.csv", "0.2\n0.4\n0.8\n");
    let o = covshift(&["ratio", "--kernel", "gaussian:0.5", "--filter", "itik:2", "--lambda", "schedule", "--source", &s, "--target", &t, "--eval-grid", "-1:1:5"]);
    assert!(o.status.success());
    assert_eq!(csv_values(&String::from_utf8(o.stdout).unwrap()).len(), 5);
}

#[test]
fn fit_writes_model_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", "x,y\n0,2\n");
    let model = dir.path().join("m.txt");
    let grid = dir.path().join("g.csv");
    let o = covshift(&[
        "fit", "--kernel", "gaussian:1", "--train", &train, "--lambda", "1", "--out", model.to_str().unwrap(),
        "--eval-grid", "0:1:2", "--eval-out", grid.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(model.exists());
    let v = csv_values(&fs::read_to_string(grid).unwrap());
    assert!((v[0].1 - 1.0).abs() < 1e-12);
    assert!((v[1].1 - (-0.5f64).exp()).abs() < 1e-12);
}

#[test]
fn fit_with_exact_and_embedded_weights() {
    let dir = tempfile::tempdir().unwrap();
    let train = write(dir.path(), "train.csv", "-0.5,0.1\n0,0.3\n0.5,0.2\n");
    let w = write(dir.path(), "w.csv", "1\n2\n0.5\n");
    let model = dir.path().join("m.txt");
    let m = model.to_str().unwrap();
    let exact = format!("exact:{w}");
    let o = covshift(&["fit", "--kernel", "gaussian:1", "--train", &train, "--weights", &exact, "--lambda", "0.1", "--out", m]);
    assert!(o.status.success());
    let short = write(dir.path(), "short.csv", "1\n");
    let bad = format!("exact:{short}");
    let o = covshift(&["fit", "--kernel", "gaussian:1", "--train", &train, "--weights", &bad, "--lambda", "0.1", "--out", m]);
    assert_eq!(o.status.code(), Some(3));
    let src = write(dir.path(), "src.csv", "-0.8\n-0.2\n0.3\n0.7\n");
    let tgt = write(dir.path(), "tgt.csv", "0.1\n0.5\n");
    let o = covshift(&[
        "fit", "--kernel", "gaussian:1", "--train", &train, "--weights", "embedded", "--rn-source", &src, "--rn-target", &tgt,
        "--lambda", "0.1", "--out", m,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = covshift(&["fit", "--kernel", "gaussian:1", "--train", &train, "--weights", "embedded", "--lambda", "0.1", "--out", m]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn aggregate_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..30).map(|i| {
        let x = -1.0 + i as f64 / 15.0;
        format!("{x},{}\n", (2.0 * x).sin())
    }).collect();
    let train = write(dir.path(), "train.csv", &rows);
    let unl = write(dir.path(), "u.csv", &(0..20).map(|i| format!("{}\n", -0.5 + i as f64 / 20.0)).collect::<String>());
    let model = dir.path().join("agg.txt");
    let diag = dir.path().join("d.jsonl");
    let o = covshift(&[
        "aggregate", "--kernel", "gaussian:0.5", "--train", &train, "--target-unlabeled", &unl, "--lambda-grid", "1e-4:1:5",
        "--gamma-l", "inf", "--out", model.to_str().unwrap(), "--diagnostics", diag.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> =
        fs::read_to_string(diag).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 5);
    for l in &lines {
        for key in ["lambda_k", "norm_k", "kept", "c_k", "solver_note"] {
            assert!(l.get(key).is_some(), "{key}");
        }
        assert_eq!(l["kept"], true);
    }
    let o = covshift(&[
        "aggregate", "--kernel", "gaussian:0.5", "--train", &train, "--target-unlabeled", &unl, "--gamma-l", "0",
        "--out", model.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_rates_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.cfg",
        "problem = shift1d-mild\nsizes = 40,40,40,40; 80,80,80,80; 160,160,160,160\ntrials = 2\nmeasurements = beta_rkhs\n",
    );
    let csv = dir.path().join("r.csv");
    let c = csv.to_str().unwrap();
    let o = covshift(&["--threads", "1", "sweep", "--config", &cfg, "--out", c]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 1 + 3 * 2);

    let o = covshift(&["rates", "--csv", c, "--measure", "beta_rkhs", "--independent", "MN"]);
    assert!(o.status.success());
    let rec: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rec["slope"].is_number());
    assert!((rec["theoretical_exponent"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(rec["points"].as_array().unwrap().len(), 3);

    let out_dir = dir.path().join("rep");
    let o = covshift(&["report", "--csv", c, "--out-dir", out_dir.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(out_dir.join("summary.txt").exists() && out_dir.join("plots.gp").exists());
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_cfg = write(dir.path(), "bad.cfg", "sizes = 10,10,10,10\ntrials = 0\n");
    let out = dir.path().join("o.csv");
    assert_eq!(covshift(&["sweep", "--config", &bad_cfg, "--out", out.to_str().unwrap()]).status.code(), Some(2));
    let garbage = write(dir.path(), "g.csv", "x\n1\nabc\n");
    let o = covshift(&["ratio", "--kernel", "gaussian:1", "--lambda", "1", "--source", &garbage, "--target", &garbage, "--eval-grid", "0:1:3"]);
    assert_eq!(o.status.code(), Some(3));
    let s = write(dir.path(), "s.csv", "0\n");
    let o = covshift(&["ratio", "--kernel", "gaussian:1", "--lambda", "-1", "--source", &s, "--target", &s, "--eval-grid", "0:1:3"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(covshift(&["ratio", "--kernel", "laplace:1"]).status.code(), Some(2));
    assert_eq!(covshift(&["--threads", "0", "report", "--csv", "x", "--out-dir", "y"]).status.code(), Some(2));
    let missing = dir.path().join("missing.csv");
    let o = covshift(&["rates", "--csv", missing.to_str().unwrap(), "--measure", "beta_rkhs", "--independent", "MN"]);
    assert_eq!(o.status.code(), Some(3));
}
