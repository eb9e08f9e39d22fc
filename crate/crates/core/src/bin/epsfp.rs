use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use epsfp::classifier::{ModelKind, ModelSpec, Representation};
use epsfp::eps::EpsConfig;
use epsfp::eval::{
    cmd_evaluate, cmd_extract, cmd_report, cmd_simulate, cmd_warmup, read_json, EvaluateOptions,
    ExtractOptions, Scenario, WarmupOptions,
};
use epsfp::{Error, Result};

/// Envelope power spectrum RF fingerprinting toolkit.
///
/// Log verbosity comes from the EPSFP_LOG environment variable (for example
/// EPSFP_LOG=info).
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// On failure, also write the error as JSON to this file.
    #[arg(long, global = true, value_name = "FILE")]
    error_json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (see each subcommand for its schema).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a scenario file (--config).
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Extract one feature file per domain; --config is an optional EPS config.
    Extract {
        #[command(flatten)]
        common: Common,
        /// Dataset directory written by `simulate`.
        #[arg(long, value_name = "DIR")]
        dataset: PathBuf,
        /// eps or raw-iq
        #[arg(long, default_value = "eps")]
        representation: Representation,
        /// Samples per component in raw-IQ rows.
        #[arg(long)]
        raw_iq_window: Option<usize>,
    },
    /// Same-domain cross-validation or cross-domain tests; --config is an optional model spec.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Training feature file
        #[arg(long, value_name = "FILE")]
        train: PathBuf,
        /// Test feature files; omit, or repeat the train file, for cross-validation.
        #[arg(long = "test", value_name = "FILE")]
        tests: Vec<PathBuf>,
        /// centroid, knn or softmax (default: from --config, else centroid)
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long, default_value_t = 5)]
        k_folds: usize,
    },
    /// Accuracy versus capture time after power-on, from a scenario file (--config).
    Warmup {
        #[command(flatten)]
        common: Common,
        /// Comma-separated capture times in seconds.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        /// eps or raw-iq (default: eps)
        #[arg(long)]
        representation: Option<Representation>,
    },
    /// Merge evaluation reports; --config may list reports and feature files.
    Report {
        #[command(flatten)]
        common: Common,
        /// EPS feature files to average per device and domain.
        #[arg(long = "features", value_name = "FILE")]
        features: Vec<PathBuf>,
        /// Evaluation report files.
        reports: Vec<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Extract { .. } => "extract",
            Command::Evaluate { .. } => "evaluate",
            Command::Warmup { .. } => "warmup",
            Command::Report { .. } => "report",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Simulate { common }
            | Command::Extract { common, .. }
            | Command::Evaluate { common, .. }
            | Command::Warmup { common, .. }
            | Command::Report { common, .. } => common,
        }
    }
}

/// Inputs for `report --config`.
#[derive(Deserialize, Default)]
#[serde(default)]
struct ReportConfig {
    reports: Vec<PathBuf>,
    features: Vec<PathBuf>,
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    command: &'a str,
    kind: &'a str,
    message: String,
}

fn load_scenario(common: &Common) -> Result<Scenario> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("--config <scenario file> is required".into()))?;
    let mut s = Scenario::load(path)?;
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn optional_config<T: serde::de::DeserializeOwned>(path: Option<&Path>) -> Result<Option<T>> {
    path.map(read_json).transpose()
}

fn run(command: &Command) -> Result<()> {
    let common = command.common();
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("cannot start {n} threads: {e}")))?;
    }
    match command {
        Command::Simulate { common } => {
            let s = load_scenario(common)?;
            let m = cmd_simulate(&s, &common.out)?;
            println!(
                "{} frames written to {}",
                m.frames.len(),
                common.out.display()
            );
        }
        Command::Extract {
            common,
            dataset,
            representation,
            raw_iq_window,
        } => {
            let opts = ExtractOptions {
                representation: Some(*representation),
                eps: optional_config::<EpsConfig>(common.config.as_deref())?,
                raw_iq_window: *raw_iq_window,
            };
            for p in cmd_extract(dataset, &common.out, &opts)? {
                println!("{}", p.display());
            }
        }
        Command::Evaluate {
            common,
            train,
            tests,
            model,
            k_folds,
        } => {
            let mut spec =
                optional_config::<ModelSpec>(common.config.as_deref())?.unwrap_or_default();
            if let Some(kind) = model {
                spec.kind = *kind;
            }
            let opts = EvaluateOptions {
                model: spec,
                k_folds: *k_folds,
                seed: common.seed.unwrap_or(0),
            };
            for r in cmd_evaluate(train, tests, &common.out, &opts)? {
                println!(
                    "{} -> {} [{} {}]: {:.4}",
                    r.train_domain,
                    r.test_domain,
                    r.representation,
                    r.model.as_str(),
                    r.mean_accuracy
                );
            }
        }
        Command::Warmup {
            common,
            times,
            representation,
        } => {
            let s = load_scenario(common)?;
            let opts = WarmupOptions {
                capture_times_s: times.clone(),
                representation: *representation,
            };
            let r = cmd_warmup(&s, &common.out, &opts)?;
            println!(
                "baseline at {} s: {:.4}",
                r.train_time_s, r.baseline_accuracy
            );
            for p in &r.points {
                println!("{:>8} s: {:.4}", p.capture_time_s, p.accuracy);
            }
        }
        Command::Report {
            common,
            features,
            reports,
        } => {
            let cfg =
                optional_config::<ReportConfig>(common.config.as_deref())?.unwrap_or_default();
            let reports: Vec<PathBuf> = cfg
                .reports
                .into_iter()
                .chain(reports.iter().cloned())
                .collect();
            let features: Vec<PathBuf> = cfg
                .features
                .into_iter()
                .chain(features.iter().cloned())
                .collect();
            let s = cmd_report(&reports, &features, &common.out)?;
            println!("{} rows in {} sections", s.n_rows(), s.sections.len());
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
        }
    }
    Ok(())
}

fn write_error_json(path: &Path, command: &str, kind: &str, message: &str) {
    let body = ErrorJson {
        command,
        kind,
        message: message.to_string(),
    };
    let json = serde_json::to_string_pretty(&body).expect("serializes");
    if let Err(w) = std::fs::write(path, json) {
        eprintln!("error: cannot write {}: {w}", path.display());
    }
}

/// `--error-json` value from raw arguments, for failures before parsing completes.
fn raw_error_json_arg() -> Option<PathBuf> {
    let args: Vec<String> = std::env::args().collect();
    args.iter()
        .enumerate()
        .find_map(|(i, a)| match a.strip_prefix("--error-json") {
            Some("") => args.get(i + 1).map(PathBuf::from),
            Some(v) => v.strip_prefix('=').map(PathBuf::from),
            None => None,
        })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EPSFP_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                if let Some(path) = raw_error_json_arg() {
                    write_error_json(&path, "", "usage", e.to_string().trim());
                }
            }
            e.exit();
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            eprintln!("error: {msg}");
            if let Some(path) = &cli.error_json {
                write_error_json(path, cli.command.name(), e.kind(), &msg);
            }
            ExitCode::FAILURE
        }
    }
}
