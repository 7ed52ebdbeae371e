//! The experiment pipeline: `prepare`, `train`, `sweep`, `verify`, `report`.
//!
//! Output layout under `out_dir`:
//!
//! ```text
//! prepared/manifest.toml, gamma<i>.{inputs,labels}.idx, validation.*
//! runs/<arch>-eps<epsilon>-seed<seed>/{checkpoint.txt, history.csv, summary.csv}
//! sweep/{sweep.csv, sweep_detail.csv, sweep_summary.csv, sweep_train.svg, sweep_val.svg}
//! report.csv
//! verify/<suite>.csv
//! ```
//!
//! Every CSV is a deterministic function of the configuration and seeds;
//! wall times are only printed.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use multifit_core::dataset::{
    add_gaussian_noise, normalize, permutation, split, LabeledDataset, SplitSpec,
};
use multifit_core::dfe::epsilon_weights;
use multifit_core::network::{init_network, Network};
use multifit_core::rng::derive_seed;
use multifit_core::train::{accuracy, sgd_train, TrainConfig, TrainHistory};
use multifit_core::verification::{run_suite, Suite, SuiteReport};
use serde::{Deserialize, Serialize};

use crate::checkpoint;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::io::{self, read_bytes, sha256_hex, write_bytes};
use crate::svg::LineChart;

/// Header of `sweep.csv`.
pub const SWEEP_HEADER: [&str; 6] = [
    "epsilon",
    "seed",
    "arch",
    "train_acc",
    "val_acc",
    "final_loss",
];

// seed streams derived from the data seed
const STREAM_VALIDATION: u64 = 1;
const STREAM_SPLIT: u64 = 2;
const STREAM_NOISE: u64 = 100;
// seed streams derived from a run seed
const STREAM_INIT: u64 = 10;
const STREAM_SHUFFLE: u64 = 11;

// TOML integers are i64; derived seeds use the full u64 range.
mod seed_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| t.parse().map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    /// `train` or `validation`.
    pub role: String,
    pub rows: usize,
    pub source_sigma: f64,
    #[serde(with = "seed_text::option", default)]
    pub noise_seed: Option<u64>,
    pub inputs_sha256: String,
    pub labels_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub sample_count: usize,
    pub crop: Option<usize>,
    pub image_rows: usize,
    pub image_cols: usize,
    pub validation_fraction: f64,
    #[serde(with = "seed_text")]
    pub validation_seed: u64,
    #[serde(with = "seed_text")]
    pub split_seed: u64,
    pub datasets: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn path(dir: &Path) -> PathBuf {
        dir.join("manifest.toml")
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = Self::path(dir);
        let text = String::from_utf8(read_bytes(&path)?).map_err(|e| Error::ConfigFile {
            path: path.clone(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| Error::ConfigFile {
            path,
            message: e.to_string(),
        })
    }
}

/// Loads the IDX files, carves out validation data, splits the rest into
/// `parts` subsets and adds noise to each. Writes everything under
/// `prepared/` with a manifest of seeds and checksums.
pub fn cmd_prepare(config: &ExperimentConfig) -> Result<Manifest> {
    config.validate()?;
    let mut raw = io::load_idx(&config.images_path(), &config.labels_path())?;
    if let Some(n) = config.sample_count {
        if n > raw.len() {
            return Err(Error::Config(format!(
                "sample_count {n} exceeds the {} available samples",
                raw.len()
            )));
        }
        raw = raw.truncate(n);
    }
    if let Some(c) = config.crop {
        raw = raw.center_crop(c)?;
    }
    let data = normalize(&raw)?;
    let n = data.len();
    let val_count = (n as f64 * config.validation_fraction).round() as usize;
    if val_count == 0 || val_count + config.parts > n {
        return Err(Error::Config(format!(
            "{n} samples cannot provide {val_count} validation rows and {} training parts",
            config.parts
        )));
    }
    let validation_seed = derive_seed(config.seed, STREAM_VALIDATION);
    let perm = permutation(n, validation_seed);
    let mut val_idx = perm[..val_count].to_vec();
    let mut train_idx = perm[val_count..].to_vec();
    val_idx.sort_unstable();
    train_idx.sort_unstable();
    let validation = data.select(&val_idx).with_name("validation");
    let train = data.select(&train_idx).with_name("train");

    let split_seed = derive_seed(config.seed, STREAM_SPLIT);
    let spec = SplitSpec::new(config.parts, split_seed, config.sigmas.clone())?;
    let dir = config.prepared_dir();
    let mut entries = Vec::with_capacity(config.parts + 1);
    for (i, part) in split(&train, &spec)?.into_iter().enumerate() {
        let name = format!("gamma{}", i + 1);
        let noise_seed = derive_seed(config.seed, STREAM_NOISE + i as u64);
        let sigma = spec.sigmas[i];
        let noisy = add_gaussian_noise(&part, sigma, noise_seed)?.with_name(name.clone());
        let (inputs_sha256, labels_sha256) = io::write_dataset(&dir, &name, &noisy)?;
        entries.push(ManifestEntry {
            name,
            role: "train".into(),
            rows: noisy.len(),
            source_sigma: sigma,
            noise_seed: Some(noise_seed),
            inputs_sha256,
            labels_sha256,
        });
    }
    let (inputs_sha256, labels_sha256) = io::write_dataset(&dir, "validation", &validation)?;
    entries.push(ManifestEntry {
        name: "validation".into(),
        role: "validation".into(),
        rows: validation.len(),
        source_sigma: 0.0,
        noise_seed: None,
        inputs_sha256,
        labels_sha256,
    });
    let manifest = Manifest {
        seed: config.seed,
        sample_count: n,
        crop: config.crop,
        image_rows: raw.image_rows(),
        image_cols: raw.image_cols(),
        validation_fraction: config.validation_fraction,
        validation_seed,
        split_seed,
        datasets: entries,
    };
    let text = toml::to_string(&manifest).expect("manifest serializes");
    write_bytes(&Manifest::path(&dir), text.as_bytes())?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub manifest: Manifest,
    pub train: Vec<LabeledDataset>,
    pub validation: LabeledDataset,
}

/// Reads the prepared datasets and checks them against the manifest digests.
pub fn load_prepared(dir: &Path) -> Result<PreparedData> {
    let manifest = Manifest::load(dir)?;
    let mut train = Vec::new();
    let mut validation = None;
    for e in &manifest.datasets {
        for (path, expected) in [
            (io::inputs_path(dir, &e.name), &e.inputs_sha256),
            (io::labels_path(dir, &e.name), &e.labels_sha256),
        ] {
            if sha256_hex(&read_bytes(&path)?) != *expected {
                return Err(Error::in_file(
                    &path,
                    multifit_core::Error::Inconsistent("checksum differs from the manifest".into()),
                ));
            }
        }
        let data = io::read_dataset(dir, &e.name, e.source_sigma)?;
        match e.role.as_str() {
            "train" => train.push(data),
            "validation" => validation = Some(data),
            other => return Err(Error::Config(format!("unknown dataset role '{other}'"))),
        }
    }
    let validation =
        validation.ok_or_else(|| Error::Config("manifest lists no validation set".into()))?;
    if train.is_empty() {
        return Err(Error::Config("manifest lists no training sets".into()));
    }
    Ok(PreparedData {
        manifest,
        train,
        validation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub epsilon: f64,
    pub seed: u64,
    pub arch: String,
    pub betas: Vec<f64>,
    /// Accuracy on each training subset.
    pub train_acc_parts: Vec<f64>,
    /// Accuracy on the union of the training subsets.
    pub train_acc: f64,
    pub val_acc: f64,
    /// Scalarized loss on the full training subsets after the last epoch.
    pub final_loss: f64,
    pub history: TrainHistory,
}

/// Trains one model with weights `epsilon_weights(parts, epsilon)`.
pub fn train_run(
    config: &ExperimentConfig,
    data: &PreparedData,
    epsilon: f64,
    seed: u64,
) -> Result<(Network, RunSummary)> {
    config.validate()?;
    let arch = config.architecture()?;
    let weights = epsilon_weights(data.train.len(), epsilon)?;
    let first = &data.train[0];
    let dims = config.dims(first.input_dim(), first.classes())?;
    let net = init_network(arch, &dims, derive_seed(seed, STREAM_INIT))?
        .with_shortcut_placement(config.placement()?);
    let tc = TrainConfig {
        datasets: &data.train,
        metric: config.training_metric()?,
        weights: weights.clone(),
        epochs: config.epochs,
        batch_size: config.batch_size,
        learning_rate: config.learning_rate()?,
        seed: derive_seed(seed, STREAM_SHUFFLE),
        param_box: config.param_box,
    };
    let (net, history) = sgd_train(net, &tc)?;
    let sizes: Vec<usize> = data.train.iter().map(LabeledDataset::len).collect();
    let hits: f64 = history
        .final_accuracy
        .iter()
        .zip(&sizes)
        .map(|(a, &n)| (a * n as f64).round())
        .sum();
    let train_acc = hits / sizes.iter().sum::<usize>() as f64;
    let val_acc = accuracy(&net, &data.validation)?;
    let summary = RunSummary {
        epsilon,
        seed,
        arch: config.arch.clone(),
        betas: weights.betas().to_vec(),
        train_acc_parts: history.final_accuracy.clone(),
        train_acc,
        val_acc,
        final_loss: *history.epoch_loss.last().expect("epochs >= 1"),
        history,
    };
    Ok((net, summary))
}

pub fn run_dir(config: &ExperimentConfig, epsilon: f64, seed: u64) -> PathBuf {
    config
        .out_dir
        .join("runs")
        .join(format!("{}-eps{epsilon}-seed{seed}", config.arch))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn write_run_artifacts(dir: &Path, net: &Network, s: &RunSummary) -> Result<()> {
    checkpoint::save(&dir.join("checkpoint.txt"), net)?;
    let m = s.train_acc_parts.len();
    let mut w = csv_writer(&dir.join("history.csv"))?;
    let mut header = vec!["epoch".to_string(), "scalarized_loss".to_string()];
    header.extend((1..=m).map(|i| format!("dfe_mean_gamma{i}")));
    w.write_record(&header)?;
    let h = &s.history;
    let rows = std::iter::once((&h.initial_loss, &h.initial_dfe_means))
        .chain(h.epoch_loss.iter().zip(&h.epoch_dfe_means));
    for (epoch, (loss, means)) in rows.enumerate() {
        let mut rec = vec![epoch.to_string(), num(*loss)];
        rec.extend(means.iter().map(|v| num(*v)));
        w.write_record(&rec)?;
    }
    w.flush()
        .map_err(|e| Error::io(dir.join("history.csv"), e))?;

    let mut w = csv_writer(&dir.join("summary.csv"))?;
    let mut header: Vec<String> = SWEEP_HEADER.iter().map(|s| s.to_string()).collect();
    header.extend((1..=m).map(|i| format!("train_acc_gamma{i}")));
    header.extend((1..=m).map(|i| format!("beta{i}")));
    w.write_record(&header)?;
    let mut rec = vec![
        num(s.epsilon),
        s.seed.to_string(),
        s.arch.clone(),
        num(s.train_acc),
        num(s.val_acc),
        num(s.final_loss),
    ];
    rec.extend(s.train_acc_parts.iter().map(|v| num(*v)));
    rec.extend(s.betas.iter().map(|v| num(*v)));
    w.write_record(&rec)?;
    w.flush()
        .map_err(|e| Error::io(dir.join("summary.csv"), e))?;
    Ok(())
}

/// Trains one model on the prepared data and writes its checkpoint, history
/// and summary under `runs/`.
pub fn cmd_train(config: &ExperimentConfig, epsilon: f64) -> Result<RunSummary> {
    let data = load_prepared(&config.prepared_dir())?;
    let (net, summary) = train_run(config, &data, epsilon, config.seed)?;
    write_run_artifacts(&run_dir(config, epsilon, config.seed), &net, &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub seed: u64,
    pub arch: String,
    pub outcome: std::result::Result<RunSummary, String>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Ordered by seed, then benchmark first followed by the grid in
    /// configuration order.
    pub rows: Vec<SweepRow>,
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummaryRow {
    pub epsilon: f64,
    pub runs: usize,
    pub train_mean: f64,
    pub train_std: f64,
    pub val_mean: f64,
    pub val_std: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean and sample standard deviation over seeds per epsilon, in order of
/// first appearance.
pub fn summarize(rows: &[SweepRow]) -> Vec<SweepSummaryRow> {
    let mut eps: Vec<f64> = Vec::new();
    for r in rows {
        if !eps.contains(&r.epsilon) {
            eps.push(r.epsilon);
        }
    }
    eps.into_iter()
        .map(|e| {
            let ok: Vec<&RunSummary> = rows
                .iter()
                .filter(|r| r.epsilon == e)
                .filter_map(|r| r.outcome.as_ref().ok())
                .collect();
            let (train_mean, train_std) =
                mean_std(&ok.iter().map(|s| s.train_acc).collect::<Vec<_>>());
            let (val_mean, val_std) = mean_std(&ok.iter().map(|s| s.val_acc).collect::<Vec<_>>());
            SweepSummaryRow {
                epsilon: e,
                runs: ok.len(),
                train_mean,
                train_std,
                val_mean,
                val_std,
            }
        })
        .collect()
}

/// Epsilon values of a sweep: the benchmark `0` followed by the grid, with
/// duplicates removed.
pub fn sweep_epsilons(config: &ExperimentConfig) -> Vec<f64> {
    let mut eps = vec![0.0];
    for &e in &config.epsilon_grid {
        if !eps.contains(&e) {
            eps.push(e);
        }
    }
    eps
}

/// Runs every `(seed, epsilon)` cell, possibly concurrently, and writes the
/// sweep CSVs and charts. Failed cells are recorded and the sweep goes on.
pub fn cmd_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let data = load_prepared(&config.prepared_dir())?;
    let cells: Vec<(u64, f64)> = config
        .sweep_seeds()
        .into_iter()
        .flat_map(|s| sweep_epsilons(config).into_iter().map(move |e| (s, e)))
        .collect();
    let jobs = match config.jobs {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        j => j,
    }
    .min(cells.len())
    .max(1);

    let results: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(seed, epsilon)) = cells.get(i) else {
                    break;
                };
                let start = Instant::now();
                let outcome = match train_run(config, &data, epsilon, seed) {
                    Ok((net, summary)) => {
                        if let Err(e) =
                            write_run_artifacts(&run_dir(config, epsilon, seed), &net, &summary)
                        {
                            failure.lock().expect("lock").get_or_insert(e);
                        }
                        Ok(summary)
                    }
                    Err(e) => Err(e.to_string()),
                };
                results.lock().expect("lock")[i] = Some(SweepRow {
                    epsilon,
                    seed,
                    arch: config.arch.clone(),
                    outcome,
                    wall_seconds: start.elapsed().as_secs_f64(),
                });
            });
        }
    });
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    let rows: Vec<SweepRow> = results
        .into_inner()
        .expect("lock")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect();
    let dir = config.out_dir.join("sweep");
    write_sweep(&dir, &rows, data.train.len())?;
    Ok(SweepResult { rows, dir })
}

fn write_sweep(dir: &Path, rows: &[SweepRow], parts: usize) -> Result<()> {
    let path = dir.join("sweep.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        let (a, b, c) = match &r.outcome {
            Ok(s) => (num(s.train_acc), num(s.val_acc), num(s.final_loss)),
            Err(_) => (String::new(), String::new(), String::new()),
        };
        w.write_record([num(r.epsilon), r.seed.to_string(), r.arch.clone(), a, b, c])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join("sweep_detail.csv");
    let mut w = csv_writer(&path)?;
    let mut header: Vec<String> = SWEEP_HEADER.iter().map(|s| s.to_string()).collect();
    header.extend((1..=parts).map(|i| format!("train_acc_gamma{i}")));
    header.push("status".into());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![num(r.epsilon), r.seed.to_string(), r.arch.clone()];
        match &r.outcome {
            Ok(s) => {
                rec.extend([num(s.train_acc), num(s.val_acc), num(s.final_loss)]);
                rec.extend(s.train_acc_parts.iter().map(|v| num(*v)));
                rec.push("ok".into());
            }
            Err(e) => {
                rec.extend(std::iter::repeat_n(String::new(), 3 + parts));
                rec.push(format!("failed: {e}"));
            }
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let summary = summarize(rows);
    let path = dir.join("sweep_summary.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "epsilon",
        "runs",
        "train_acc_mean",
        "train_acc_std",
        "val_acc_mean",
        "val_acc_std",
    ])?;
    for s in &summary {
        w.write_record([
            num(s.epsilon),
            s.runs.to_string(),
            num(s.train_mean),
            num(s.train_std),
            num(s.val_mean),
            num(s.val_std),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let bench = summary.iter().find(|s| s.epsilon == 0.0);
    let perturbed: Vec<&SweepSummaryRow> = summary.iter().filter(|s| s.epsilon != 0.0).collect();
    for (file, label, pick) in [
        (
            "sweep_train.svg",
            "training",
            (|s: &SweepSummaryRow| s.train_mean) as fn(&SweepSummaryRow) -> f64,
        ),
        ("sweep_val.svg", "validation", |s: &SweepSummaryRow| {
            s.val_mean
        }),
    ] {
        let chart = LineChart {
            title: format!("Mean {label} accuracy against epsilon"),
            x_label: "epsilon".into(),
            y_label: format!("{label} accuracy"),
            series_label: "perturbed weights".into(),
            series: perturbed.iter().map(|s| (s.epsilon, pick(s))).collect(),
            reference_label: "benchmark (epsilon = 0)".into(),
            reference: bench.map_or(f64::NAN, pick),
        };
        write_bytes(&dir.join(file), chart.render().as_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub epsilon: f64,
    pub train_acc: f64,
    pub val_acc: f64,
}

/// Benchmark row and the row of the epsilon with the best mean training
/// accuracy (ties toward the smaller epsilon).
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub rows: [ReportRow; 2],
}

impl ReportTable {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:<12} {:>10} {:>10} {:>10}\n",
            "", "epsilon", "training", "validation"
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:<12} {:>10} {:>10.4} {:>10.4}\n",
                r.label, r.epsilon, r.train_acc, r.val_acc
            ));
        }
        s
    }
}

/// Builds the report table from a `sweep.csv`, averaging over seeds.
pub fn report_from_csv(sweep_csv: &Path) -> Result<ReportTable> {
    let mut reader = csv::Reader::from_path(sweep_csv).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(sweep_csv, io),
        other => Error::Report(format!("{}: {other:?}", sweep_csv.display())),
    })?;
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != SWEEP_HEADER {
        return Err(Error::Report(format!(
            "{}: unexpected header {:?}",
            sweep_csv.display(),
            header
        )));
    }
    let mut cells: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<Option<f64>> {
            let field = &rec[i];
            if field.is_empty() {
                return Ok(None);
            }
            field.parse::<f64>().map(Some).map_err(|e| {
                Error::Report(format!("{}: field '{field}': {e}", sweep_csv.display()))
            })
        };
        let eps = parse(0)?.ok_or_else(|| Error::Report("row without epsilon".into()))?;
        let (Some(train), Some(val)) = (parse(3)?, parse(4)?) else {
            continue;
        };
        match cells.iter_mut().find(|c| c.0 == eps) {
            Some(c) => {
                c.1.push(train);
                c.2.push(val);
            }
            None => cells.push((eps, vec![train], vec![val])),
        }
    }
    let means: Vec<(f64, f64, f64)> = cells
        .iter()
        .map(|(e, t, v)| (*e, mean_std(t).0, mean_std(v).0))
        .collect();
    let bench = means.iter().find(|c| c.0 == 0.0).ok_or_else(|| {
        Error::Report(format!(
            "{} has no benchmark (epsilon = 0) row",
            sweep_csv.display()
        ))
    })?;
    let mut best = bench;
    for c in &means {
        if c.1 > best.1 || (c.1 == best.1 && c.0 < best.0) {
            best = c;
        }
    }
    let row = |label: &str, c: &(f64, f64, f64)| ReportRow {
        label: label.into(),
        epsilon: c.0,
        train_acc: c.1,
        val_acc: c.2,
    };
    Ok(ReportTable {
        rows: [row("benchmark", bench), row("best-train", best)],
    })
}

/// Writes `report.csv` next to the sweep directory and returns the table.
pub fn cmd_report(sweep_csv: &Path, out: &Path) -> Result<ReportTable> {
    let table = report_from_csv(sweep_csv)?;
    let mut w = csv_writer(out)?;
    w.write_record(["row", "epsilon", "train_acc", "val_acc"])?;
    for r in &table.rows {
        w.write_record([
            r.label.clone(),
            num(r.epsilon),
            num(r.train_acc),
            num(r.val_acc),
        ])?;
    }
    w.flush().map_err(|e| Error::io(out, e))?;
    Ok(table)
}

/// Runs a verification suite and writes `verify/<suite>.csv`.
pub fn cmd_verify(out_dir: &Path, suite: Suite, trials: usize, seed: u64) -> Result<SuiteReport> {
    let report = run_suite(suite, trials, seed)?;
    let path = out_dir.join("verify").join(format!("{}.csv", suite.name()));
    let mut w = csv_writer(&path)?;
    w.write_record(["trial", "lhs", "rhs", "holds", "note"])?;
    for r in &report.rows {
        let holds = match r.holds {
            Some(true) => "true",
            Some(false) => "false",
            None => "na",
        };
        w.write_record([
            r.trial.to_string(),
            num(r.lhs),
            num(r.rhs),
            holds.into(),
            r.note.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilons_start_with_benchmark() {
        let c = ExperimentConfig {
            epsilon_grid: vec![0.001, 0.0, 0.001, 0.01],
            ..Default::default()
        };
        assert_eq!(sweep_epsilons(&c), vec![0.0, 0.001, 0.01]);
    }

    #[test]
    fn mean_and_sample_std() {
        assert_eq!(mean_std(&[1.0]), (1.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }

    fn write_csv(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("sweep.csv");
        std::fs::write(&p, format!("{}\n{body}", SWEEP_HEADER.join(","))).unwrap();
        p
    }

    #[test]
    fn report_selection() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(
            dir.path(),
            "0,0,mlp,0.90,0.80,0.1\n0.001,0,mlp,0.95,0.81,0.1\n0.01,0,mlp,0.95,0.82,0.1\n0.005,0,mlp,,,\n",
        );
        let t = report_from_csv(&p).unwrap();
        assert_eq!(t.rows[0].epsilon, 0.0);
        assert_eq!(t.rows[1].epsilon, 0.001);
        assert_eq!(t.rows[1].val_acc, 0.81);

        let p = write_csv(dir.path(), "0,0,mlp,0.9,0.8,0.1\n");
        let t = report_from_csv(&p).unwrap();
        assert_eq!(
            (t.rows[0].epsilon, t.rows[0].train_acc),
            (t.rows[1].epsilon, t.rows[1].train_acc)
        );

        let p = write_csv(dir.path(), "0.01,0,mlp,0.9,0.8,0.1\n");
        assert!(matches!(report_from_csv(&p), Err(Error::Report(_))));
    }

    #[test]
    fn report_averages_seeds() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(dir.path(), "0,1,mlp,0.8,0.7,0.1\n0,2,mlp,0.9,0.8,0.1\n0.01,1,mlp,0.86,0.7,0.1\n0.01,2,mlp,0.84,0.7,0.1\n");
        let t = report_from_csv(&p).unwrap();
        assert!((t.rows[0].train_acc - 0.85).abs() < 1e-12);
        // 0.85 vs 0.85: the tie goes to the smaller epsilon
        assert_eq!(t.rows[1].epsilon, 0.0);
    }
}
