//! The `evostack` command line: registry listing, evaluation, training,
//! prediction, synthetic data and the genetic search.
//!
//! Every command writes into an output directory and records its effective
//! settings in `config.txt` there, so a run can be repeated from its own
//! output. The worker count is deliberately left out of that file: results
//! do not depend on it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use evostack::data::{load_csv, load_features_csv, synth::synth_seeded, write_csv, write_features_csv, Generator, SynthSpec};
use evostack::eval::{cross_validate_with, proportional_eval, EvalReport};
use evostack::evolve::{build_default_registry, ga_run_with, FitnessMode, GaConfig, Individual, Registry};
use evostack::model_file::{load_model, save_model, SavedModel};
use evostack::seed::DEFAULT_SEED;
use evostack::specfile::{load_spec_file, write_spec_file};
use evostack::{Error, ErrorKind, LearnerSpec};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_TRAINING: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "evostack", version, about = "Regression ensembles evolved by a genetic algorithm")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the default learner registry.
    Registry,
    /// Cross-validate (or split-validate) one learner.
    Eval(EvalArgs),
    /// Search for a good stacking ensemble.
    Evolve(EvolveArgs),
    /// Train a learner on a dataset and save the model.
    Train(TrainArgs),
    /// Predict with a saved model.
    Predict(PredictArgs),
    /// Generate a synthetic regression dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the target column.
    #[arg(long, default_value = "y")]
    pub target: String,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Registry index, learner name or spec file.
    #[arg(long)]
    pub spec: String,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Use one train/test split with this training fraction instead of
    /// cross-validation.
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitnessKind {
    Cv,
    Split,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 10)]
    pub population: usize,
    #[arg(long, default_value_t = 1)]
    pub elite: usize,
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    /// Probability of mutating the level-2 learner or fold count.
    #[arg(long, default_value_t = 0.2)]
    pub pm_m: f64,
    /// Probability of flipping one membership bit.
    #[arg(long, default_value_t = 0.5)]
    pub pm_v: f64,
    /// Maximum number of level-1 learners (0 = unlimited).
    #[arg(long, default_value_t = 5)]
    pub size_limit: usize,
    #[arg(long, value_enum, default_value_t = FitnessKind::Cv)]
    pub fitness: FitnessKind,
    /// Folds of the fitness cross-validation.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Training fraction of the split fitness.
    #[arg(long, default_value_t = 0.7)]
    pub split_ratio: f64,
    /// Evaluate fitness on this fraction of the data, drawn once.
    #[arg(long)]
    pub subsample: Option<f64>,
    /// Stacking spec file added to the initial population.
    #[arg(long)]
    pub seed_genome: Option<PathBuf>,
    /// File with one learner name per line replacing the default registry.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Registry index, learner name or spec file.
    #[arg(long)]
    pub spec: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// CSV with the model's feature columns (extra columns are ignored).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// linear, piecewise, sine-mix or heterogeneous.
    #[arg(long, default_value = "heterogeneous")]
    pub generator: String,
    #[arg(long, default_value_t = 1000)]
    pub size: usize,
    #[arg(long)]
    pub features: Option<usize>,
    #[arg(long, default_value_t = 0.3)]
    pub noise: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Maps a library error onto the process exit status.
pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Config => EXIT_USAGE,
        ErrorKind::Data => EXIT_DATA,
        ErrorKind::Training => EXIT_TRAINING,
    }
}

/// Runs a parsed command line, writing progress to stderr.
pub fn run(cli: Cli) -> evostack::Result<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(Error::InvalidParameter("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Registry => {
            print!("{}", registry_listing(&build_default_registry()));
            Ok(())
        }
        Command::Eval(a) => cmd_eval(&a),
        Command::Evolve(a) => cmd_evolve(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Synth(a) => cmd_synth(&a),
    })
}

pub fn registry_listing(registry: &Registry) -> String {
    let mut s = String::new();
    for (i, name) in registry.iter() {
        let _ = writeln!(s, "{i:>3}  {name}");
    }
    s
}

/// Resolves `--spec`: an existing file is read as a spec file, a number
/// is a registry index, anything else a learner name.
pub fn resolve_spec(arg: &str, registry: &Registry) -> evostack::Result<LearnerSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        return load_spec_file(path);
    }
    if let Ok(i) = arg.parse::<usize>() {
        return registry
            .get(i)
            .cloned()
            .ok_or_else(|| Error::UnknownLearner(format!("registry index {i} (valid: 1..={})", registry.len())));
    }
    if arg.ends_with(".toml") {
        return Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "spec file not found"),
        });
    }
    arg.parse()
}

/// Reads a registry file: one learner name per line, `#` starts a comment.
pub fn load_registry(path: &Path) -> evostack::Result<Registry> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let entries = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect::<evostack::Result<Vec<LearnerSpec>>>()?;
    Registry::new(entries)
}

fn create_dir(dir: &Path) -> evostack::Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })
}

fn write_file(path: &Path, text: &str) -> evostack::Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// `key = value` lines; also echoed to stderr.
fn write_config(dir: &Path, command: &str, entries: &[(&str, String)]) -> evostack::Result<()> {
    let mut s = format!("command = {command}\n");
    for (k, v) in entries {
        let _ = writeln!(s, "{k} = {v}");
    }
    eprint!("{s}");
    write_file(&dir.join("config.txt"), &s)
}

fn cmd_eval(a: &EvalArgs) -> evostack::Result<()> {
    let data = load_csv(&a.data.input, &a.data.target)?;
    let spec = resolve_spec(&a.spec, &build_default_registry())?;
    create_dir(&a.out)?;
    let mode = match a.split {
        Some(r) => format!("split {r}"),
        None => format!("cv {}", a.folds),
    };
    write_config(
        &a.out,
        "eval",
        &[
            ("input", a.data.input.display().to_string()),
            ("target", a.data.target.clone()),
            ("spec", a.spec.clone()),
            ("learner", spec.display_name()),
            ("mode", mode),
            ("seed", a.seed.to_string()),
        ],
    )?;
    let report = match a.split {
        Some(ratio) => {
            let mut r = proportional_eval(&spec, &data, ratio, a.seed)?;
            r.mean_reference = Some(proportional_eval(&LearnerSpec::Mean, &data, ratio, a.seed)?.pooled_rmse);
            r
        }
        None => {
            let mut r = cross_validate_with(&spec, &data, a.folds, a.seed, None)?;
            r.mean_reference = Some(cross_validate_with(&LearnerSpec::Mean, &data, a.folds, a.seed, None)?.pooled_rmse);
            r
        }
    };
    write_file(&a.out.join("eval.csv"), &report.to_csv())?;
    write_file(&a.out.join("predictions.csv"), &predictions_csv(&report, data.targets()))?;
    eprintln!(
        "pooled RMSE {} (mean regression {}, mean cmp {:.2})",
        report.pooled_rmse,
        report.mean_reference.unwrap_or(f64::NAN),
        report.mean_cmp().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn predictions_csv(report: &EvalReport, targets: &[f64]) -> String {
    let mut s = String::from("sample,target,prediction\n");
    for (&i, p) in report.held_out.iter().zip(&report.predictions) {
        let _ = writeln!(s, "{i},{},{p}", targets[i]);
    }
    s
}

fn cmd_evolve(a: &EvolveArgs) -> evostack::Result<()> {
    let data = load_csv(&a.data.input, &a.data.target)?;
    let registry = match &a.registry {
        Some(p) => load_registry(p)?,
        None => build_default_registry(),
    };
    let fitness = match a.fitness {
        FitnessKind::Cv => FitnessMode::CrossValidation { folds: a.folds },
        FitnessKind::Split => FitnessMode::Proportional { train_ratio: a.split_ratio },
    };
    let cfg = GaConfig {
        population: a.population,
        elite: a.elite,
        iterations: a.iterations,
        p_mutate_m: a.pm_m,
        p_mutate_v: a.pm_v,
        size_limit: (a.size_limit > 0).then_some(a.size_limit),
        fitness,
        subsample: a.subsample,
        seed: a.seed,
    };
    cfg.validate()?;
    let initial = match &a.seed_genome {
        Some(p) => match load_spec_file(p)? {
            LearnerSpec::Stacking(s) => vec![Individual::from_stacking(&s, &registry)?],
            other => {
                return Err(Error::SpecFile {
                    path: p.clone(),
                    message: format!("seed genome must be a stacking spec, got {}", other.display_name()),
                })
            }
        },
        None => Vec::new(),
    };
    create_dir(&a.out)?;
    let mut entries = vec![
        ("input", a.data.input.display().to_string()),
        ("target", a.data.target.clone()),
        (
            "registry",
            a.registry.as_ref().map_or("default".to_string(), |p| p.display().to_string()),
        ),
        ("registry_size", registry.len().to_string()),
        (
            "seed_genome",
            initial.first().map_or("none".to_string(), Individual::to_string),
        ),
    ];
    let described = cfg.describe();
    for line in described.lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            entries.push((k, v.to_string()));
        }
    }
    write_config(&a.out, "evolve", &entries)?;

    let trace = ga_run_with(&data, &cfg, &registry, &initial, &mut |r| {
        eprintln!("iteration {:>3}  best {:.6}  mean {:.6}  {}", r.iteration, r.best_rmse, r.mean_rmse, r.best);
    })?;
    write_file(&a.out.join("trace.csv"), &trace.to_csv())?;
    let header = format!(
        "best genome {}\nfitness RMSE {}\nbest genome of the last iteration {} (RMSE {})\n\n{}",
        trace.best,
        trace.best_rmse,
        trace.last_best,
        trace.last_best_rmse,
        trace.best.describe(&registry)
    );
    let spec = LearnerSpec::Stacking(trace.best.to_stacking(&registry)?);
    write_spec_file(&spec, a.out.join("best.toml"), header.trim_end())?;
    eprintln!("best {} with fitness RMSE {}", trace.best, trace.best_rmse);
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> evostack::Result<()> {
    let data = load_csv(&a.data.input, &a.data.target)?;
    let spec = resolve_spec(&a.spec, &build_default_registry())?;
    create_dir(&a.out)?;
    write_config(
        &a.out,
        "train",
        &[
            ("input", a.data.input.display().to_string()),
            ("target", a.data.target.clone()),
            ("spec", a.spec.clone()),
            ("learner", spec.display_name()),
            ("seed", a.seed.to_string()),
        ],
    )?;
    let model = spec.train(&data, a.seed)?;
    let saved = SavedModel {
        spec,
        seed: a.seed,
        feature_names: data.feature_names().to_vec(),
        target: a.data.target.clone(),
        model,
    };
    save_model(&saved, a.out.join("model.evs"))
}

fn cmd_predict(a: &PredictArgs) -> evostack::Result<()> {
    let saved = load_model(&a.model)?;
    let (header, rows) = load_features_csv(&a.input)?;
    let columns = select_columns(&header, &rows, &saved.feature_names)?;
    create_dir(&a.out)?;
    write_config(
        &a.out,
        "predict",
        &[
            ("model", a.model.display().to_string()),
            ("input", a.input.display().to_string()),
            ("learner", saved.spec.display_name()),
        ],
    )?;
    let predictions = columns
        .iter()
        .map(|r| saved.model.try_predict(r).map(|p| vec![p]))
        .collect::<evostack::Result<Vec<_>>>()?;
    write_features_csv(a.out.join("predictions.csv"), &["prediction"], &predictions)
}

/// Picks the model's feature columns by name when all are present;
/// otherwise the file must have exactly the model's width.
fn select_columns(header: &[String], rows: &[Vec<f64>], names: &[String]) -> evostack::Result<Vec<Vec<f64>>> {
    let positions: Option<Vec<usize>> = names.iter().map(|n| header.iter().position(|h| h == n)).collect();
    match positions {
        Some(pos) => Ok(rows.iter().map(|r| pos.iter().map(|&i| r[i]).collect()).collect()),
        None if header.len() == names.len() => Ok(rows.to_vec()),
        None => Err(Error::Dimension { expected: names.len(), actual: header.len() }),
    }
}

fn cmd_synth(a: &SynthArgs) -> evostack::Result<()> {
    let generator: Generator = a.generator.parse()?;
    let spec = SynthSpec { generator, noise: a.noise, size: a.size, features: a.features };
    let data = synth_seeded(&spec, a.seed)?;
    create_dir(&a.out)?;
    write_config(
        &a.out,
        "synth",
        &[
            ("generator", generator.id().to_string()),
            ("size", a.size.to_string()),
            ("features", data.n_features().to_string()),
            ("noise", a.noise.to_string()),
            ("seed", a.seed.to_string()),
        ],
    )?;
    write_csv(&data, a.out.join("data.csv"), "y")
}
