//! End-to-end runs of the `cauchynet` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cauchynet_cli::output::{sha256_hex, Manifest, RunStatus};

fn cauchynet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cauchynet"))
        .args(args)
        .env_remove("CAUCHYNET_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tiny_train(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "train",
        "--preset",
        "exp1",
        "--set",
        "train.epochs=2",
        "--set",
        "model.hidden=4",
        "--set",
        "baseline.hidden=4",
        "--out",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    cauchynet(&args)
}

#[test]
fn lists_every_preset() {
    let out = cauchynet(&["list-experiments"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for name in ["exp1", "exp2-gap", "exp2-disk", "exp3-surface", "exp4-csv", "exp5-lambda", "exp5-grid", "intro-spike"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
    let shown = stdout(&cauchynet(&["list-experiments", "--show", "exp1"]));
    assert!(shown.contains("target = \"exp1\""));
}

#[test]
fn train_writes_hashed_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiny_train(dir.path(), &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = Manifest::load(dir.path()).unwrap();
    assert_eq!(manifest.status, RunStatus::Complete);
    for entry in &manifest.files {
        let bytes = fs::read(dir.path().join(&entry.path)).unwrap();
        assert_eq!(sha256_hex(&bytes), entry.sha256, "{}", entry.path);
    }
    let preds = fs::read_to_string(dir.path().join("predictions.csv")).unwrap();
    assert_eq!(preds.lines().next().unwrap(), "split,x0,y_true,y_pred,e_pred,abs_err");
    assert_eq!(preds.lines().count(), 301);
    let log = fs::read_to_string(dir.path().join("trainlog.csv")).unwrap();
    assert_eq!(log.lines().next().unwrap(), "epoch,lr,train_loss,val_loss,wall_ms");
    assert!(log.lines().nth(1).unwrap().ends_with(','));
}

#[test]
fn seed_variable_and_set_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, env: Option<&str>, extra: &[&str]| {
        let out_dir = dir.path().join(sub);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_cauchynet"));
        cmd.args(["train", "--preset", "exp1", "--set", "train.epochs=1", "--set", "model.hidden=2"])
            .args(["--set", "baseline.hidden=2", "--out", out_dir.to_str().unwrap()])
            .args(extra)
            .env_remove("CAUCHYNET_SEED");
        if let Some(v) = env {
            cmd.env("CAUCHYNET_SEED", v);
        }
        assert!(cmd.output().unwrap().status.success());
        Manifest::load(&out_dir).unwrap().seed
    };
    assert_eq!(run("a", None, &[]), 10);
    assert_eq!(run("b", Some("3"), &[]), 3);
    assert_eq!(run("c", Some("3"), &["--set", "train.seed=4"]), 4);
}

#[test]
fn timings_only_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tiny_train(dir.path(), &["--set", "output.record_timings=true"])), 0);
    let log = fs::read_to_string(dir.path().join("trainlog.csv")).unwrap();
    assert!(!log.lines().nth(1).unwrap().ends_with(','));
}

#[test]
fn evaluate_rescored_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tiny_train(dir.path(), &[])), 0);
    let eval = dir.path().join("eval");
    let ckpt = dir.path().join("checkpoint.json");
    let out = cauchynet(&[
        "evaluate",
        "--preset",
        "exp1",
        "--set",
        "model.hidden=4",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--out",
        eval.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(eval.join("predictions.csv")).unwrap(),
        fs::read(dir.path().join("predictions.csv")).unwrap()
    );
}

#[test]
fn validation_errors_exit_2_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("r");
    let d = d.to_str().unwrap();
    for args in [
        vec!["train", "--preset", "nope", "--out", d],
        vec!["train", "--preset", "exp1", "--set", "data.target=nope", "--out", d],
        vec!["train", "--preset", "exp1", "--set", "train.epochs=0", "--out", d],
        vec!["train", "--preset", "exp1", "--set", "bogus", "--out", d],
        vec!["impute", "--preset", "exp1", "--out", d],
        vec!["ablate-lambda", "--preset", "exp1", "--lambdas", "", "--out", d],
        vec!["kernel-demo", "--function", "inv2", "--a", "2", "--b", "1", "--out", d],
    ] {
        let out = cauchynet(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(!Path::new(d).exists(), "nothing written for rejected specs");
}

#[test]
fn io_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = cauchynet(&[
        "decompose",
        "--input",
        dir.path().join("missing.csv").to_str().unwrap(),
        "--column",
        "y",
        "--period",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
}

#[test]
fn divergence_exits_3_with_partial_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = tiny_train(dir.path(), &["--set", "train.lr=1e308", "--set", "train.weight_decay=0"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = Manifest::load(dir.path()).unwrap();
    assert_eq!(manifest.status, RunStatus::Partial);
    assert!(manifest.error.is_some());
    assert!(manifest.file("trainlog.csv").is_some());
    assert!(manifest.file("checkpoint.json").is_none());
}

#[test]
fn kernel_demo_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = cauchynet(&["kernel-demo", "--function", "square", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("kernel_convergence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "nodes,sup_error");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("16,"));
    let coarse = cauchynet(&["kernel-demo", "--nodes", "4", "--grid", "11", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&coarse), 0);
}

#[test]
fn decompose_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.csv");
    let mut text = String::from("t,y\n");
    for i in 0..24 {
        text += &format!("{i},{}\n", 10.0 * [0.5, 1.5, 1.2, 0.8][i % 4]);
    }
    fs::write(&input, text).unwrap();
    let out = cauchynet(&[
        "decompose",
        "--input",
        input.to_str().unwrap(),
        "--column",
        "y",
        "--period",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("0.5000 1.5000 1.2000 0.8000"));
    let csv = fs::read_to_string(dir.path().join("decomposition.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "index,value,trend,seasonal,residual");
    assert!(csv.lines().nth(1).unwrap().starts_with("0,5,,"));
}

#[test]
fn ablation_and_sweep_tables() {
    let dir = tempfile::tempdir().unwrap();
    let ab = dir.path().join("ab");
    let out = cauchynet(&[
        "ablate-lambda",
        "--preset",
        "exp5-lambda",
        "--set",
        "train.epochs=3",
        "--set",
        "model.hidden=4",
        "--lambdas",
        "0,1",
        "--out",
        ab.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(ab.join("lambda_ablation.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "lambda,seed,epoch,test_mse");
    assert_eq!(csv.lines().count(), 7);

    let sw = dir.path().join("sw");
    let out = cauchynet(&[
        "sweep",
        "--preset",
        "exp5-grid",
        "--set",
        "train.epochs=2",
        "--set",
        "sweep=[{hidden=[2,3]},{lrs=[0.01,1e308],wds=[0.0]}]",
        "--threads",
        "2",
        "--out",
        sw.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(sw.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "h,n,lr,wd,test_mse,note");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].contains("NaN"), "{csv}");

    let all_bad = dir.path().join("bad");
    let out = cauchynet(&[
        "sweep",
        "--preset",
        "exp5-grid",
        "--set",
        "train.epochs=2",
        "--set",
        "train.weight_decay=0",
        "--set",
        "sweep=[{lrs=[1e308]}]",
        "--out",
        all_bad.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    assert!(all_bad.join("sweep.csv").exists());
}
