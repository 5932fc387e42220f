//! End-to-end checks of the command-line interface.

use std::path::Path;
use std::process::{Command, Output};

fn kgem(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgem"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn generate_args<'a>(out: &'a str, seed: &'a str) -> Vec<&'a str> {
    vec![
        "generate",
        "--generator",
        "clustered",
        "--entities",
        "30",
        "--relations",
        "3",
        "--seed",
        seed,
        "--out",
        out,
    ]
}

#[test]
fn generate_train_eval_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    let out = kgem(&generate_args("kg", "7"), dir);
    assert!(out.status.success(), "generate failed: {}", String::from_utf8_lossy(&out.stderr));
    for file in ["train.txt", "valid.txt", "test.txt"] {
        assert!(dir.join("kg").join(file).exists(), "{file} missing");
    }

    let train_args = [
        "train",
        "--train",
        "kg/train.txt",
        "--valid",
        "kg/valid.txt",
        "--test",
        "kg/test.txt",
        "--loss",
        "aml-exp",
        "--gamma",
        "2",
        "--norm",
        "l2",
        "--dim",
        "8",
        "--batch",
        "16",
        "--max-iter",
        "300",
        "--eval-every",
        "100",
        "--lr",
        "0.1",
        "--normalize",
        "false",
        "--seed",
        "3",
        "--workers",
        "1",
        "--out",
        "run",
    ];
    let out = kgem(&train_args, dir);
    assert!(out.status.success(), "train failed: {}", String::from_utf8_lossy(&out.stderr));
    for file in ["model.ckpt", "trainlog.tsv", "report.tsv", "ranks.tsv"] {
        assert!(dir.join("run").join(file).exists(), "{file} missing");
    }

    // the resolved config is embedded in both outputs
    let report = std::fs::read_to_string(dir.join("run/report.tsv")).unwrap();
    assert!(report.contains("config.loss\taml-exp"));
    assert!(report.contains("config.gamma\t2"));
    assert!(report.contains("hits_at_10_filtered"));
    let log = std::fs::read_to_string(dir.join("run/trainlog.tsv")).unwrap();
    assert!(log.starts_with("# loss = aml-exp"));
    assert_eq!(log.lines().filter(|l| !l.starts_with('#')).count(), 3);

    // eval on the checkpoint reproduces the training report exactly
    let eval_args = [
        "eval",
        "--checkpoint",
        "run/model.ckpt",
        "--train",
        "kg/train.txt",
        "--valid",
        "kg/valid.txt",
        "--test",
        "kg/test.txt",
        "--out",
        "eval",
    ];
    let out = kgem(&eval_args, dir);
    assert!(out.status.success(), "eval failed: {}", String::from_utf8_lossy(&out.stderr));
    let eval_report = std::fs::read_to_string(dir.join("eval/report.tsv")).unwrap();
    assert_eq!(report, eval_report);

    // identical config and seed give a bit-identical run
    let out = kgem(
        &train_args.map(|a| if a == "run" { "run2" } else { a }),
        dir,
    );
    assert!(out.status.success());
    for file in ["model.ckpt", "trainlog.tsv", "report.tsv", "ranks.tsv"] {
        assert_eq!(
            std::fs::read(dir.join("run").join(file)).unwrap(),
            std::fs::read(dir.join("run2").join(file)).unwrap(),
            "{file} differs between identical runs"
        );
    }
}

#[test]
fn generate_is_deterministic_and_atomic() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert!(kgem(&generate_args("a", "9"), dir).status.success());
    assert!(kgem(&generate_args("b", "9"), dir).status.success());
    for file in ["train.txt", "valid.txt", "test.txt"] {
        assert_eq!(
            std::fs::read(dir.join("a").join(file)).unwrap(),
            std::fs::read(dir.join("b").join(file)).unwrap()
        );
    }

    // a degenerate spec exits nonzero and writes nothing
    let out = kgem(
        &["generate", "--generator", "chain", "--entities", "1", "--relations", "1", "--out", "bad"],
        dir,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.join("bad").exists());
}

#[test]
fn missing_loss_hyperparameter_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert!(kgem(&generate_args("kg", "1"), dir).status.success());
    let out = kgem(
        &["train", "--train", "kg/train.txt", "--loss", "rs", "--max-iter", "10", "--out", "run"],
        dir,
    );
    assert_eq!(out.status.code(), Some(2), "expected config-error exit");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("gamma1"), "stderr was: {stderr}");
}

#[test]
fn checkpoint_dataset_mismatch_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert!(kgem(&generate_args("kg", "7"), dir).status.success());
    let out = kgem(
        &[
            "train",
            "--train",
            "kg/train.txt",
            "--valid",
            "kg/valid.txt",
            "--test",
            "kg/test.txt",
            "--loss",
            "mrl",
            "--gamma",
            "1",
            "--dim",
            "4",
            "--max-iter",
            "20",
            "--out",
            "run",
        ],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // different graph, different entity count
    let out = kgem(
        &["generate", "--generator", "chain", "--entities", "9", "--relations", "1", "--out", "other"],
        dir,
    );
    assert!(out.status.success());
    let out = kgem(
        &[
            "eval",
            "--checkpoint",
            "run/model.ckpt",
            "--train",
            "other/train.txt",
            "--test",
            "other/train.txt",
            "--out",
            "eval",
        ],
        dir,
    );
    assert_eq!(out.status.code(), Some(3), "expected data-error exit");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mismatch"), "stderr was: {stderr}");
}

#[test]
fn config_file_fills_gaps_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert!(kgem(&generate_args("kg", "2"), dir).status.success());
    std::fs::write(
        dir.join("run.conf"),
        "loss = mrl\ngamma = 9\ndim = 4\nmax_iter = 20\ntrain = kg/train.txt\ntest = kg/test.txt\n",
    )
    .unwrap();
    // --gamma overrides the file's 9
    let out = kgem(
        &["train", "--config", "run.conf", "--gamma", "1", "--out", "run"],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("run/report.tsv")).unwrap();
    assert!(report.contains("config.gamma\t1"), "report was: {report}");
    assert!(report.contains("config.dim\t4"));
}

#[test]
fn mrl_with_unit_margin_trains_the_classic_setup() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert!(kgem(&generate_args("kg", "4"), dir).status.success());
    let out = kgem(
        &[
            "train",
            "--train",
            "kg/train.txt",
            "--valid",
            "kg/valid.txt",
            "--test",
            "kg/test.txt",
            "--loss",
            "mrl",
            "--gamma",
            "1",
            "--norm",
            "l2",
            "--dim",
            "8",
            "--batch",
            "16",
            "--max-iter",
            "400",
            "--eval-every",
            "200",
            "--lr",
            "0.1",
            "--normalize",
            "false",
            "--seed",
            "1",
            "--out",
            "run",
        ],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("run/report.tsv")).unwrap();
    let hits: f64 = report
        .lines()
        .find(|l| l.starts_with("hits_at_10_filtered"))
        .and_then(|l| l.split('\t').nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!(hits > 50.0, "classic margin-ranking run ranked poorly: {hits}");
}
