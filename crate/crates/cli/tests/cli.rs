use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rbfshapenet::bench::parse_csv;
use rbfshapenet::neural::load_model;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbfshapenet"))
        .args(args)
        .env("RBFSN_DETERMINISTIC", "1")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let o = cli(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    cli(args).status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_dataset(dir: &Path, dim: &str, n: &str) {
    ok(&["gen-data", "--dim", dim, "-n", n, "--train", "60", "--valid", "20", "--seed", "5", "--out", p(dir)]);
}

fn tiny_model(dir: &Path) -> std::path::PathBuf {
    let data = dir.join("data");
    small_dataset(&data, "1", "10");
    let model = dir.join("m.txt");
    ok(&[
        "train", "--data", p(&data), "--max-epochs", "4", "--patience", "2", "--batch-size", "20",
        "--log-every", "0", "--out", p(&model),
    ]);
    model
}

#[test]
fn gen_data_is_deterministic_and_sized() {
    let t = tempfile::tempdir().unwrap();
    let out = ok(&["gen-data", "--out", p(&t.path().join("a")), "--seed", "42"]);
    assert!(out.contains("4400 train + 1100 valid") && out.contains("feature dim 9"), "{out}");
    ok(&["gen-data", "--out", p(&t.path().join("b")), "--seed", "42"]);
    for f in ["train.txt", "valid.txt", "stats.txt"] {
        assert_eq!(
            fs::read(t.path().join("a").join(f)).unwrap(),
            fs::read(t.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    let out = ok(&["gen-data", "--dim", "2", "-n", "9", "--train", "10", "--valid", "5", "--out", p(&t.path().join("c"))]);
    assert!(out.contains("feature dim 8"), "{out}");
}

#[test]
fn train_writes_model_and_trace() {
    let t = tempfile::tempdir().unwrap();
    let model_path = tiny_model(t.path());
    let model = load_model(&model_path).unwrap();
    assert_eq!(model.provenance("learning_rate"), Some("0.0001"));
    assert_eq!(model.provenance("reg_beta"), Some("0.00001"));
    assert_eq!(model.provenance("batch_size"), Some("20"));

    let trace = fs::read_to_string(t.path().join("m.trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("epoch,train_loss,valid_loss"));
    let valid: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(!valid.is_empty() && valid.len() <= 4);
    let best: usize = model.provenance("best_epoch").unwrap().parse().unwrap();
    let at_best = valid[best - 1];
    assert!(valid[..best].iter().all(|v| *v >= at_best));
}

#[test]
fn predict_prints_eps_and_cond() {
    let t = tempfile::tempdir().unwrap();
    let model = tiny_model(t.path());
    let pts: Vec<String> = (0..10).map(|i| (i as f64 / 9.0).to_string()).collect();
    let mut args = vec!["predict", "--model", p(&model)];
    args.extend(pts.iter().map(String::as_str));
    let out = ok(&args);
    let eps: f64 = out.lines().next().unwrap().strip_prefix("eps ").unwrap().parse().unwrap();
    assert!(eps > 0.0);
    assert!(out.lines().nth(1).unwrap().starts_with("cond "));

    let shifted: Vec<String> = (0..10).map(|i| (i as f64 / 9.0 + 3.0).to_string()).collect();
    let mut args = vec!["predict", "--model", p(&model)];
    args.extend(shifted.iter().map(String::as_str));
    let out2 = ok(&args);
    assert_eq!(out.lines().next(), out2.lines().next());

    let file = t.path().join("stencil.txt");
    fs::write(&file, pts.join("\n")).unwrap();
    assert_eq!(ok(&["predict", "--model", p(&model), "--file", p(&file)]), out);

    let o = cli(&["predict", "--model", p(&model), "0", "0.5", "1"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model mismatch"));
}

#[test]
fn heat_bench_is_deterministic_and_schema_clean() {
    let t = tempfile::tempdir().unwrap();
    let run = |dir: &Path| {
        ok(&[
            "heat-bench", "--ic", "sine", "--points", "nonequi", "--strategy", "const:10", "--strategy", "hardy",
            "--ladder", "10,19", "--out", p(dir),
        ])
    };
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    run(&a);
    run(&b);
    for f in ["heat-sine-nonequi_imq_const-10.csv", "heat-sine-nonequi_imq_hardy.csv"] {
        let text = fs::read_to_string(a.join(f)).unwrap();
        assert_eq!(text, fs::read_to_string(b.join(f)).unwrap());
        let rows = parse_csv(&text).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![10, 10, 19, 19]);
        assert!(a.join(f.replace(".csv", ".gp")).exists());
    }
    let index = fs::read_to_string(a.join("index.csv")).unwrap();
    assert_eq!(index.lines().count(), 3);
}

#[test]
fn blowups_are_rows_not_crashes() {
    let t = tempfile::tempdir().unwrap();
    ok(&["heat-bench", "--strategy", "const:1", "--ladder", "10,19,37", "--out", p(t.path())]);
    let rows = parse_csv(&fs::read_to_string(t.path().join("heat-quad_imq_const-1.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().any(|r| r.status != "ok"));
}

#[test]
fn interp_and_poisson_benches_share_an_index() {
    let t = tempfile::tempdir().unwrap();
    ok(&["interp-bench", "--case", "one-equi", "--strategy", "franke", "--ladder", "10,19", "--out", p(t.path())]);
    ok(&["poisson-bench", "--strategy", "const:10", "--ladder", "10,20", "--out", p(t.path())]);
    ok(&["interp-bench", "--case", "interp2d-f3", "--kernel", "gaussian", "--strategy", "const:10", "--ladder", "10", "--out", p(t.path())]);
    let index = fs::read_to_string(t.path().join("index.csv")).unwrap();
    assert_eq!(index.lines().count(), 4, "{index}");
    for entry in fs::read_dir(t.path()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") && !path.ends_with("index.csv") {
            parse_csv(&fs::read_to_string(&path).unwrap()).unwrap();
        }
    }
    let one = parse_csv(&fs::read_to_string(t.path().join("one-equi_imq_franke.csv")).unwrap()).unwrap();
    assert!(one.iter().all(|r| r.l1_error < 1e-9));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["no-such-command"]), 2);
    assert_eq!(code(&["interp-bench", "--case", "f9-equi", "--strategy", "hardy"]), 2);
    assert_eq!(code(&["interp-bench", "--case", "f1-equi", "--strategy", "const:-1"]), 2);
    assert_eq!(code(&["interp-bench", "--case", "f1-equi"]), 2);
    assert_eq!(code(&["predict", "--model", "/definitely/missing.txt", "0", "1"]), 4);
    assert_eq!(code(&["train", "--data", "/definitely/missing", "--out", "/tmp/x.txt"]), 4);
    assert_eq!(code(&["gen-data"]), 2);
}
