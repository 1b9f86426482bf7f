use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaze_topo::embed::EmbeddingParams;
use gaze_topo::forest::ForestModel;
use gaze_topo::ingest::{
    generate_synthetic_dataset, load_dataset, load_trajectory_samples, write_dataset, DatasetSplit,
    LabeledTrajectory, DEFAULT_SAMPLE_RATE_HZ, DEFAULT_SYNTH_NOISE, DEFAULT_SYNTH_POINTS,
};
use gaze_topo::io::{read_to_string, write_atomic, write_json};
use gaze_topo::pipeline::{
    evaluate, featurize_only, rerun, run_pipeline, train_on_features, write_diagrams, FeatureTable,
    TrainOptions, TrainOutcome, DIAGRAMS_FILE, FEATURES_FILE,
};
use gaze_topo::{Error, Result};

#[derive(Parser)]
#[command(
    name = "gaze-topo",
    version,
    about = "Persistent-homology features and random-forest classification of gaze trajectories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct EmbedArgs {
    /// Keep every r-th sample
    #[arg(long, default_value_t = 20)]
    reduction: usize,
    /// Delay-embedding dimension
    #[arg(long, default_value_t = 3)]
    dim: usize,
    /// Delay in downsampled steps
    #[arg(long, default_value_t = 10)]
    delay: usize,
    /// Standardize x and y after downsampling
    #[arg(long)]
    normalize: bool,
}

impl From<EmbedArgs> for EmbeddingParams {
    fn from(a: EmbedArgs) -> Self {
        EmbeddingParams {
            dim: a.dim,
            delay: a.delay,
            reduction: a.reduction,
            normalize: a.normalize,
        }
    }
}

#[derive(Args, Clone)]
struct TrainArgs {
    /// Root seed; split and forest seeds derive from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trees: usize,
    #[arg(long, default_value_t = 0.2)]
    val_frac: f64,
    #[arg(long, default_value_t = 0.2)]
    test_frac: f64,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 2)]
    min_samples_split: usize,
}

impl From<TrainArgs> for TrainOptions {
    fn from(a: TrainArgs) -> Self {
        TrainOptions {
            seed: a.seed,
            validation_fraction: a.val_frac,
            test_fraction: a.test_frac,
            n_trees: a.trees,
            max_depth: a.max_depth,
            min_samples_split: a.min_samples_split,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Partition {
    Train,
    Test,
    Validation,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Featurize every trajectory of a manifest into features.csv
    Featurize {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        embed: EmbedArgs,
    },
    /// Split a feature table, train a forest and report on test and validation
    Train {
        /// Feature CSV with numeric columns and a `label` column
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Score a saved model against a feature table
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// split.json of the run that produced the model
        #[arg(long)]
        split: Option<PathBuf>,
        /// Rows to score; defaults to `test` with --split and `all` without
        #[arg(long, value_enum)]
        partition: Option<Partition>,
        /// Also write evaluation_report.json and confusion_evaluation.csv here
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Featurize, split, train and evaluate in one go
    Pipeline {
        #[arg(long, required_unless_present = "run_manifest")]
        manifest: Option<PathBuf>,
        /// Repeat a previous run from its run_manifest.json
        #[arg(long, conflicts_with = "manifest")]
        run_manifest: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        embed: EmbedArgs,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Write a labeled synthetic dataset and its manifest
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 40)]
        per_class: usize,
        #[arg(long, default_value_t = DEFAULT_SYNTH_POINTS)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_SYNTH_NOISE)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Dump the clouds and persistence diagrams of one trajectory
    Diagram {
        /// Trajectory CSV with header t,x,y
        #[arg(
            long,
            required_unless_present = "manifest",
            conflicts_with = "manifest"
        )]
        trajectory: Option<PathBuf>,
        /// Take the trajectory from a manifest, see --sample
        #[arg(long, requires = "sample")]
        manifest: Option<PathBuf>,
        /// Zero-based row of the manifest
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        embed: EmbedArgs,
    },
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn print_outcome(outcome: &TrainOutcome) {
    println!("test\n{}", outcome.test.render());
    println!("validation\n{}", outcome.validation.render());
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Featurize {
            manifest,
            out_dir,
            embed,
        } => {
            create_dir(&out_dir)?;
            let rows = featurize_only(&manifest, &embed.into(), &out_dir)?;
            println!(
                "{} rows -> {}",
                rows.len(),
                out_dir.join(FEATURES_FILE).display()
            );
        }
        Command::Train {
            features,
            out_dir,
            train,
        } => {
            create_dir(&out_dir)?;
            print_outcome(&train_on_features(&features, &train.into(), &out_dir)?);
        }
        Command::Evaluate {
            model,
            features,
            split,
            partition,
            out_dir,
        } => {
            let model = ForestModel::from_json(&read_to_string(&model)?)?;
            let table = FeatureTable::load(&features)?;
            let split: Option<DatasetSplit> = match split {
                Some(p) => Some(serde_json::from_str(&read_to_string(&p)?)?),
                None => None,
            };
            let partition = partition.unwrap_or(if split.is_some() {
                Partition::Test
            } else {
                Partition::All
            });
            let indices = match (partition, &split) {
                (Partition::All, _) => (0..table.len()).collect(),
                (p, Some(s)) => {
                    if s.count() != table.len() {
                        return Err(Error::InvalidArgument(format!(
                            "split covers {} rows but the table has {}",
                            s.count(),
                            table.len()
                        )));
                    }
                    match p {
                        Partition::Train => s.train.clone(),
                        Partition::Test => s.test.clone(),
                        _ => s.validation.clone(),
                    }
                }
                (_, None) => {
                    return Err(Error::InvalidArgument("--partition needs --split".into()));
                }
            };
            let report = evaluate(&model, &table, &indices)?;
            print!("{}", report.render());
            if let Some(dir) = out_dir {
                create_dir(&dir)?;
                write_json(&dir.join("evaluation_report.json"), &report)?;
                write_atomic(
                    &dir.join("confusion_evaluation.csv"),
                    report.confusion_csv().as_bytes(),
                )?;
            }
        }
        Command::Pipeline {
            manifest,
            run_manifest,
            out_dir,
            embed,
            train,
        } => {
            create_dir(&out_dir)?;
            let outcome = match (run_manifest, manifest) {
                (Some(r), _) => rerun(&r, &out_dir)?,
                (None, Some(m)) => run_pipeline(&m, &embed.into(), &train.into(), &out_dir)?,
                (None, None) => unreachable!("clap requires one of --manifest and --run-manifest"),
            };
            print_outcome(&outcome);
        }
        Command::Synth {
            out_dir,
            per_class,
            points,
            noise,
            seed,
        } => {
            create_dir(&out_dir)?;
            let data = generate_synthetic_dataset(per_class, points, noise, seed)?;
            let manifest = write_dataset(&out_dir, "synth", &data)?;
            println!("{} trajectories -> {}", data.len(), manifest.display());
        }
        Command::Diagram {
            trajectory,
            manifest,
            sample,
            out_dir,
            embed,
        } => {
            let traj = match (trajectory, manifest, sample) {
                (Some(t), _, _) => LabeledTrajectory::new(
                    load_trajectory_samples(&t)?,
                    None,
                    DEFAULT_SAMPLE_RATE_HZ,
                )?,
                (None, Some(m), Some(i)) => {
                    let mut all = load_dataset(&m)?;
                    if i >= all.len() {
                        return Err(Error::InvalidArgument(format!(
                            "sample {i} out of range, manifest has {} rows",
                            all.len()
                        )));
                    }
                    all.swap_remove(i)
                }
                _ => unreachable!("clap enforces --trajectory or --manifest with --sample"),
            };
            create_dir(&out_dir)?;
            write_diagrams(&traj, &embed.into(), &out_dir)?;
            println!("{}", out_dir.join(DIAGRAMS_FILE).display());
        }
    }
    Ok(())
}

/// 1 for bad input, 2 for a broken internal invariant.
fn exit_code(e: &Error) -> u8 {
    if e.is_internal() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
