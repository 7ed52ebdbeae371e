//! The `multifit` binary end to end on small synthetic IDX files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use multifit_core::dataset::RawDataset;
use multifit_core::idx;

fn write_idx(dir: &Path, n: usize, side: usize) {
    let labels: Vec<u8> = (0..n).map(|i| (i % 10) as u8).collect();
    let pixels = labels
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| {
            (0..side * side).map(move |p| {
                if (p + c as usize) % 10 < 3 {
                    220
                } else {
                    ((i * 13 + p * 7) % 50) as u8
                }
            })
        })
        .collect();
    let raw = RawDataset::new(side, side, pixels, labels).unwrap();
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(
        dir.join("train-images-idx3-ubyte"),
        idx::encode_images(&raw),
    )
    .unwrap();
    std::fs::write(
        dir.join("train-labels-idx1-ubyte"),
        idx::encode_labels(raw.labels()),
    )
    .unwrap();
}

struct Env {
    _tmp: tempfile::TempDir,
    data: PathBuf,
    out: PathBuf,
}

impl Env {
    fn new(n: usize) -> Self {
        let tmp = tempfile::tempdir().unwrap();
        let data = tmp.path().join("data");
        write_idx(&data, n, 6);
        let out = tmp.path().join("out");
        Env {
            _tmp: tmp,
            data,
            out,
        }
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_multifit"))
            .arg("--out-dir")
            .arg(&self.out)
            .env("MULTIFIT_DATA_DIR", &self.data)
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let o = self.run(args);
        assert!(
            o.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        String::from_utf8(o.stdout).unwrap()
    }
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn prepare_counts_and_manifest() {
    let env = Env::new(10000);
    let out = env.ok(&["prepare"]);
    assert!(out.contains("validation") && out.contains("2000 rows"));
    let manifest = std::fs::read_to_string(env.out.join("prepared/manifest.toml")).unwrap();
    for (name, sigma) in [("gamma1", "0.0"), ("gamma2", "0.1"), ("gamma3", "0.2")] {
        assert!(manifest.contains(&format!("name = \"{name}\"")));
        assert!(manifest.contains(&format!("source_sigma = {sigma}")));
    }
    let rows: usize = manifest
        .lines()
        .filter_map(|l| l.strip_prefix("rows = "))
        .map(|v| v.parse::<usize>().unwrap())
        .sum();
    assert_eq!(rows, 10000);
    assert!(manifest.contains("rows = 2000"));

    let first = std::fs::read(env.out.join("prepared/gamma2.inputs.idx")).unwrap();
    env.ok(&["prepare"]);
    assert_eq!(
        std::fs::read(env.out.join("prepared/gamma2.inputs.idx")).unwrap(),
        first
    );
    assert_eq!(
        std::fs::read_to_string(env.out.join("prepared/manifest.toml")).unwrap(),
        manifest
    );
}

#[test]
fn missing_data_names_the_file() {
    let env = Env::new(10);
    let o = env.run(&["--data-dir", "/nonexistent/mnist", "prepare"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/mnist/train-images-idx3-ubyte"));
}

#[test]
fn train_is_reproducible_and_refuses_bad_epsilon() {
    let env = Env::new(300);
    env.ok(&["prepare"]);
    let run = env.out.join("runs/mlp-eps0.005-seed0");
    env.ok(&["train", "--epsilon", "0.005", "--epochs", "2"]);
    let first = std::fs::read(run.join("checkpoint.txt")).unwrap();
    env.ok(&["train", "--epsilon", "0.005", "--epochs", "2"]);
    assert_eq!(std::fs::read(run.join("checkpoint.txt")).unwrap(), first);
    let history = std::fs::read_to_string(run.join("history.csv")).unwrap();
    assert!(history
        .starts_with("epoch,scalarized_loss,dfe_mean_gamma1,dfe_mean_gamma2,dfe_mean_gamma3\n0,"));
    assert_eq!(history.lines().count(), 4);

    let o = env.run(&["train", "--epsilon", "0.9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("negative"), "{}", stderr(&o));
    assert!(stderr(&o).contains("properly efficient"));
}

#[test]
fn sweep_report_and_flag_precedence() {
    let env = Env::new(300);
    let config = env.out.with_file_name("exp.toml");
    std::fs::write(&config, "epochs = 50\nseeds = [3]\n").unwrap();
    let c = config.to_str().unwrap();
    env.ok(&["--config", c, "prepare"]);
    env.ok(&[
        "--config",
        c,
        "sweep",
        "--epochs",
        "2",
        "--epsilons",
        "0.001,0.0055,0.01",
        "--jobs",
        "2",
    ]);
    let csv = std::fs::read_to_string(env.out.join("sweep/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epsilon,seed,arch,train_acc,val_acc,final_loss");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,3,mlp,"));
    let history =
        std::fs::read_to_string(env.out.join("runs/mlp-eps0.01-seed3/history.csv")).unwrap();
    assert_eq!(history.lines().count(), 4, "--epochs wins over the file");
    for svg in ["sweep_train.svg", "sweep_val.svg"] {
        let s = std::fs::read_to_string(env.out.join("sweep").join(svg)).unwrap();
        assert_eq!(s.matches("<polyline").count(), 2);
    }

    let table = env.ok(&["report"]);
    assert!(table.contains("benchmark") && table.contains("best-train"));
    let report = std::fs::read_to_string(env.out.join("report.csv")).unwrap();
    assert!(report.starts_with("row,epsilon,train_acc,val_acc\nbenchmark,0,"));

    let no_bench = env.out.join("no_bench.csv");
    std::fs::write(&no_bench, format!("{}\n", lines[0]) + lines[2] + "\n").unwrap();
    let o = env.run(&["report", "--sweep-csv", no_bench.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("benchmark"));
}

#[test]
fn verify_writes_csv_and_exit_status() {
    let env = Env::new(10);
    let out = env.ok(&["verify", "prop1", "--trials", "50"]);
    assert!(out.contains("0 violations"));
    let csv = std::fs::read_to_string(env.out.join("verify/prop1.csv")).unwrap();
    assert!(csv.starts_with("trial,lhs,rhs,holds,note\n"));
    assert_eq!(csv.lines().count(), 51);
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(3) == Some("true")));

    env.ok(&["verify", "scalarization", "--trials", "20"]);
    let o = env.run(&["verify", "prop9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("prop1"));
}
