//! Command-line front end: `synth`, `train`, `eval` and `gradcheck`.
//!
//! Settings come from an optional `--config` file, then `--set key=value`
//! overrides, then the named flags. See [`crate::config::KEYS`] for the
//! accepted keys.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::dataset::{generate_synthetic, load_dataset, save_dataset, MultiDomainDataset, Role, SplitCounts};
use crate::error::{Error, Result};
use crate::experiment::{assign_roles, Prepared};
use crate::gradcheck::run_suite;
use crate::model::ModelParams;
use crate::objective::ObjectiveBreakdown;
use crate::persist::{load_model, save_model};
use crate::trainer::{evaluate, save_curve_csv, train_with_observer};

#[derive(Debug, Parser)]
#[command(name = "dtcae", version, about = "Cross-domain classification with convolutional attribute embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic multi-domain dataset file.
    Synth,
    /// Train a model; writes the model, the per-iteration curve and a report.
    Train,
    /// Report target-test and per-domain accuracy of a saved model.
    Eval,
    /// Compare analytic and finite-difference gradients on random instances.
    Gradcheck,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Key-value config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed for data generation, the target split and initialisation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (synth, eval) or directory (train).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Dataset file.
    #[arg(long, global = true, value_name = "PATH")]
    pub data: Option<PathBuf>,
    /// Model file.
    #[arg(long, global = true, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Override one config key; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl CommonArgs {
    /// Merges the config file, `--set` overrides and named flags, in that
    /// order of increasing precedence.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::new(),
        };
        for pair in &self.overrides {
            cfg.set_pair(pair)?;
        }
        if let Some(seed) = self.seed {
            cfg.set("seed", seed)?;
        }
        if let Some(w) = self.workers {
            cfg.set("workers", w)?;
        }
        for (key, path) in [("out", &self.out), ("data", &self.data), ("model", &self.model)] {
            if let Some(p) = path {
                cfg.set(key, p.display())?;
            }
        }
        Ok(cfg)
    }
}

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::Data { .. } | Error::Shape { .. } | Error::Json { .. } => 3,
        Error::Divergence { .. } => 4,
        Error::GradCheck { .. } => 5,
        Error::Io { .. } => 1,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.common.resolve()?;
    match cli.command {
        Command::Synth => cmd_synth(&cfg),
        Command::Train => cmd_train(&cfg).map(|_| ()),
        Command::Eval => cmd_eval(&cfg).map(|_| ()),
        Command::Gradcheck => cmd_gradcheck(&cfg),
    }
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<()> {
    let seed: u64 = cfg.require("seed")?;
    let out = cfg.require_path("out")?;
    let spec = cfg.synth_spec()?;
    let ds = generate_synthetic(&spec, seed)?;
    save_dataset(&ds, &out)?;
    let points: usize = ds.domains().iter().map(|d| d.points.len()).sum();
    println!("wrote {} domains, {points} points to {}", ds.domain_count(), out.display());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainAccuracy {
    pub id: String,
    /// Points evaluated: every point of an auxiliary domain, the test points
    /// of the target.
    pub points: usize,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub target_test_accuracy: Option<f64>,
    pub domains: Vec<DomainAccuracy>,
}

/// Accuracy of `params` on every domain of `ds`, which must carry roles.
pub fn accuracy_report(params: &ModelParams, ds: &MultiDomainDataset) -> Result<AccuracyReport> {
    let target = ds.target_index();
    let mut domains = Vec::with_capacity(ds.domain_count());
    for (t, dom) in ds.domains().iter().enumerate() {
        let points: Vec<_> = if t == target {
            ds.target_points(Role::Test)
        } else {
            dom.points.iter().collect()
        };
        let accuracy = if points.is_empty() { None } else { Some(evaluate(params, &points, t)?) };
        domains.push(DomainAccuracy { id: dom.id.clone(), points: points.len(), accuracy });
    }
    Ok(AccuracyReport { target_test_accuracy: domains[target].accuracy, domains })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitSummary {
    pub test: usize,
    pub labeled: usize,
    pub unlabeled: usize,
}

impl From<SplitCounts> for SplitSummary {
    fn from(c: SplitCounts) -> Self {
        SplitSummary { test: c.test, labeled: c.labeled, unlabeled: c.unlabeled }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub iterations: usize,
    pub stopped_early: bool,
    pub split: SplitSummary,
    pub initial_objective: ObjectiveBreakdown,
    pub final_objective: ObjectiveBreakdown,
    #[serde(flatten)]
    pub accuracy: AccuracyReport,
}

fn output_path(cfg: &RunConfig, key: &str, dir: &Path, file: &str) -> PathBuf {
    cfg.raw(key).map(PathBuf::from).unwrap_or_else(|| dir.join(file))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn cmd_train(cfg: &RunConfig) -> Result<TrainReport> {
    let data_path = cfg.require_path("data")?;
    let out_dir = cfg.require_path("out")?;
    let tc = cfg.train_config()?;
    let Prepared { dataset: ds, training: data, graph } = Prepared::new(load_dataset(&data_path)?, tc.seed, tc.knn_k)?;
    let roles: Vec<Role> = ds.target().points.iter().filter_map(|p| p.role).collect();

    let target = ds.target_index();
    let test = ds.target_points(Role::Test);
    let mut curve_accuracy = Vec::new();
    let mut observer_error = None;
    let outcome = train_with_observer(&data, &graph, &tc, |_, params, _| {
        if test.is_empty() {
            curve_accuracy.push(f64::NAN);
            return;
        }
        match evaluate(params, &test, target) {
            Ok(acc) => curve_accuracy.push(acc),
            Err(e) => {
                observer_error.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = observer_error {
        return Err(e);
    }

    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    save_model(&outcome.params, output_path(cfg, "model_out", &out_dir, "model.json"))?;
    save_curve_csv(output_path(cfg, "curve_out", &out_dir, "curve.csv"), &outcome.trajectory, &curve_accuracy)?;
    let report = TrainReport {
        iterations: outcome.iterations(),
        stopped_early: outcome.stopped_early,
        split: SplitCounts::of(&roles).into(),
        initial_objective: *outcome.initial(),
        final_objective: *outcome.last(),
        accuracy: accuracy_report(&outcome.params, &ds)?,
    };
    write_json(&output_path(cfg, "report_out", &out_dir, "report.json"), &report)?;

    let last = outcome.last();
    println!(
        "{} iterations, total {:.6} -> {:.6}, target test accuracy {}",
        report.iterations,
        outcome.initial().total,
        last.total,
        report.accuracy.target_test_accuracy.map_or("n/a".into(), |a| format!("{a:.4}"))
    );
    Ok(report)
}

/// Fails when the model was built for different data dimensions.
pub fn check_compatible(params: &ModelParams, ds: &MultiDomainDataset) -> Result<()> {
    let dims = params.dims();
    let pairs = [
        ("d", dims.input_dim, ds.input_dim()),
        ("A", dims.attrs, ds.attrs()),
        ("Y", dims.classes, ds.classes()),
        ("domain count", dims.domains(), ds.domain_count()),
    ];
    for (name, model, data) in pairs {
        if model != data {
            return Err(Error::data("model", format!("model has {name} = {model} but the data has {name} = {data}")));
        }
    }
    Ok(())
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<AccuracyReport> {
    let params = load_model(cfg.require_path("model")?)?;
    let ds = load_dataset(cfg.require_path("data")?)?;
    check_compatible(&params, &ds)?;
    let ds = assign_roles(ds, cfg.seed()?)?;
    let report = accuracy_report(&params, &ds)?;
    match cfg.raw("out") {
        Some(path) => write_json(Path::new(path), &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report).expect("report serialization cannot fail")),
    }
    Ok(report)
}

pub fn cmd_gradcheck(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.gradcheck_spec()?;
    let instances = cfg.gradcheck_instances()?;
    let report = run_suite(&spec, instances, cfg.seed()?)?;
    print!("{report}");
    println!("max relative error {:.3e} over {instances} instances (tolerance {:.0e})", report.max_error(), spec.tolerance);
    report.ensure(spec.tolerance)
}
