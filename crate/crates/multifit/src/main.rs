use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multifit::experiment::{self, RunSummary};
use multifit::{ExperimentConfig, Result};
use multifit_core::verification::Suite;

/// Multi-dataset training experiments and property checks.
#[derive(Debug, Parser)]
#[command(name = "multifit", version)]
struct Cli {
    /// TOML configuration; defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Directory with the IDX image and label files.
    #[arg(long, global = true, env = "MULTIFIT_DATA_DIR")]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split and perturb the raw data into training subsets plus validation.
    Prepare {
        /// Use only the first N samples.
        #[arg(long)]
        samples: Option<usize>,
        /// Center-crop images to SIZE x SIZE.
        #[arg(long)]
        crop: Option<usize>,
        #[arg(long)]
        validation_fraction: Option<f64>,
        /// Noise level per subset, comma separated.
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
    },
    /// Train one model.
    Train {
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Train the benchmark and every epsilon of the grid for each seed.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Concurrent cells; 0 uses every core.
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Run a randomized property suite; exits nonzero on any violation.
    Verify {
        /// gradient, prop1, prop2, estimation, convergence or scalarization.
        suite: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Summarize a sweep: benchmark against the best training epsilon.
    Report {
        /// Defaults to <out-dir>/sweep/sweep.csv.
        #[arg(long)]
        sweep_csv: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// mlp or residual.
    #[arg(long)]
    arch: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    metric: Option<String>,
}

impl TrainArgs {
    fn apply(self, c: &mut ExperimentConfig) {
        if let Some(v) = self.arch {
            c.arch = v;
        }
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.lr {
            c.learning_rate = Some(v);
        }
        if let Some(v) = self.metric {
            c.metric = v;
        }
    }
}

fn print_run(s: &RunSummary) {
    let parts: Vec<String> = s
        .train_acc_parts
        .iter()
        .map(|a| format!("{a:.4}"))
        .collect();
    println!(
        "epsilon {} seed {}: train {:.4} [{}] validation {:.4} loss {:.6}",
        s.epsilon,
        s.seed,
        s.train_acc,
        parts.join(" "),
        s.val_acc,
        s.final_loss
    );
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut config = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = cli.seed {
        config.seed = v;
    }
    if let Some(v) = cli.out_dir {
        config.out_dir = v;
    }
    if let Some(v) = cli.data_dir {
        config.data_dir = v;
    }
    match cli.command {
        Command::Prepare {
            samples,
            crop,
            validation_fraction,
            sigmas,
        } => {
            if samples.is_some() {
                config.sample_count = samples;
            }
            if crop.is_some() {
                config.crop = crop;
            }
            if let Some(v) = validation_fraction {
                config.validation_fraction = v;
            }
            if let Some(v) = sigmas {
                config.parts = v.len();
                config.sigmas = v;
            }
            let m = experiment::cmd_prepare(&config)?;
            for d in &m.datasets {
                println!(
                    "{:<12} {:>6} rows  sigma {}",
                    d.name, d.rows, d.source_sigma
                );
            }
            println!("wrote {}", config.prepared_dir().display());
        }
        Command::Train { epsilon, train } => {
            train.apply(&mut config);
            let s = experiment::cmd_train(&config, epsilon)?;
            print_run(&s);
            println!(
                "wrote {}",
                experiment::run_dir(&config, epsilon, config.seed).display()
            );
        }
        Command::Sweep {
            epsilons,
            seeds,
            jobs,
            train,
        } => {
            train.apply(&mut config);
            if let Some(v) = epsilons {
                config.epsilon_grid = v;
            }
            if let Some(v) = seeds {
                config.seeds = v;
            }
            if let Some(v) = jobs {
                config.jobs = v;
            }
            let result = experiment::cmd_sweep(&config)?;
            for row in &result.rows {
                match &row.outcome {
                    Ok(s) => print_run(s),
                    Err(e) => println!("epsilon {} seed {}: failed: {e}", row.epsilon, row.seed),
                }
                eprintln!("  {:.1} s", row.wall_seconds);
            }
            println!("wrote {}", result.dir.display());
        }
        Command::Verify { suite, trials } => {
            let s = Suite::from_name(&suite).ok_or_else(|| {
                multifit::Error::Config(format!(
                    "unknown suite '{suite}'; expected one of {}",
                    Suite::ALL.map(Suite::name).join(", ")
                ))
            })?;
            let report = experiment::cmd_verify(&config.out_dir, s, trials, config.seed)?;
            println!(
                "{}: {} trials, {} violations, {} uncertified, worst lhs/rhs {:.6}",
                s.name(),
                report.rows.len(),
                report.violations(),
                report.uncertified(),
                report.worst_ratio()
            );
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Report { sweep_csv } => {
            let path = sweep_csv.unwrap_or_else(|| config.out_dir.join("sweep").join("sweep.csv"));
            let table = experiment::cmd_report(&path, &config.out_dir.join("report.csv"))?;
            print!("{}", table.to_text());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(2)
        }
    }
}
