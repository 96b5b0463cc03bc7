//! `pcl`: command-line front end for the pcl-core pipeline.

mod exit;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pcl_core::corpus::{write_binary_corpus, write_split_file, Category, Split};
use pcl_core::ensemble::{average, save_score_file, validate_score_file, write_score_file, Alignment, ScoreMatrix};
use pcl_core::model::ModelFile;
use pcl_core::pipeline::{
    self, emit_curves, labeled_columns, load_augmented, load_dataset, load_features, metric_entries,
    resolve_split, write_features, FeatureMap, PipelineConfig, TranslatorKind, ENSEMBLE,
};
use pcl_core::report::{render_metrics_table, RunManifest};
use pcl_core::synth::{generate, SynthConfig};
use pcl_core::threshold::ThresholdMode;
use pcl_core::Task;

#[derive(Parser, Debug)]
#[command(name = "pcl", version, about = "Patronizing and condescending language detection experiments")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Overrides for the run configuration. Flags win over the config file.
#[derive(Args, Debug, Default)]
struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    task: Option<Task>,
    /// Output root; runs go to `<out>/<run-id>/`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    run_id: Option<String>,
    /// Binary corpus TSV.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Category corpus TSV (multi-label task).
    #[arg(long, global = true)]
    categories: Option<PathBuf>,
    /// Skip one header line in the binary corpus.
    #[arg(long, global = true)]
    header: bool,
    /// Skip this many leading lines in the binary corpus.
    #[arg(long, global = true, conflicts_with = "header")]
    skip_lines: Option<usize>,
    /// Two-column `id<TAB>split` file to use instead of a seeded split.
    #[arg(long, global = true)]
    split_file: Option<PathBuf>,
    /// Machine-translation service base URL.
    #[arg(long, global = true, env = "PCL_MT_URL")]
    mt_url: Option<String>,
    #[arg(long, global = true, value_enum)]
    translator: Option<TranslatorArg>,
    /// Backtranslate the training split before training.
    #[arg(long, global = true)]
    augment: bool,
    /// Require every ensemble member to cover the same ids.
    #[arg(long, global = true, conflicts_with = "lenient_align")]
    strict_align: bool,
    /// Average over the ids shared by all members.
    #[arg(long, global = true)]
    lenient_align: bool,
    /// search | mid-of-plateau | preset:paper | value:<list>
    #[arg(long, global = true)]
    thresholds: Option<ThresholdMode>,
    /// Extra ensemble member scored on the validation split (repeatable,
    /// paired with --member-test).
    #[arg(long, global = true)]
    member_validation: Vec<PathBuf>,
    #[arg(long, global = true)]
    member_test: Vec<PathBuf>,
    #[arg(long, global = true)]
    learning_rate: Option<f64>,
    #[arg(long, global = true)]
    epochs_max: Option<usize>,
    #[arg(long, global = true)]
    patience: Option<usize>,
    #[arg(long, global = true)]
    hash_dims: Option<usize>,
    /// Log at debug level.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TranslatorArg {
    Http,
    Identity,
    WordShuffle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Part {
    Train,
    Validation,
    Test,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse the corpora and print label statistics.
    Ingest {
        /// Write gold labels for every paragraph in score-file layout.
        #[arg(long)]
        labels_out: Option<PathBuf>,
        /// Write the cleaned corpus in the binary layout.
        #[arg(long)]
        corpus_out: Option<PathBuf>,
    },
    /// Make (or check) the train/validation/test split.
    Split {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compute the engineered features for every paragraph.
    Featurize {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Backtranslate the training split.
    Augment {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train the baseline model.
    Train {
        /// Feature cache from `featurize`.
        #[arg(long)]
        features: Option<PathBuf>,
        /// Augmented paragraphs from `augment`.
        #[arg(long)]
        augmented: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score a split with a trained model.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        on: Part,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Average score files into one.
    Ensemble {
        #[arg(required = true)]
        members: Vec<PathBuf>,
        /// Output score file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Find the F1-maximizing threshold per score column.
    TuneThreshold {
        #[arg(long)]
        scores: PathBuf,
        /// Gold labels in score-file layout (see `ingest --labels-out`).
        #[arg(long)]
        gold: PathBuf,
        /// Report the midpoint of the best plateau instead.
        #[arg(long)]
        mid_of_plateau: bool,
        /// Write `<base>.tsv` and `<base>.svg` threshold curves here.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Write the chosen thresholds, one per line.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score predictions against gold labels.
    Evaluate {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Validation scores for the search modes of --thresholds.
        #[arg(long, requires = "tune_gold")]
        tune_scores: Option<PathBuf>,
        #[arg(long, requires = "tune_scores")]
        tune_gold: Option<PathBuf>,
        /// Prefix for metric names.
        #[arg(long, default_value = "evaluation")]
        name: String,
        /// Write `name<TAB>value` metric lines here.
        #[arg(long)]
        metrics_out: Option<PathBuf>,
    },
    /// Summarize, verify or rerun a recorded run.
    Report {
        /// Run directory or its manifest.toml.
        run: PathBuf,
        /// Recompute input checksums.
        #[arg(long)]
        verify: bool,
        /// Verify, then run the recorded configuration again.
        #[arg(long)]
        rerun: bool,
    },
    /// Run the whole pipeline and write a run directory.
    RunAll,
    /// Write a seeded synthetic corpus with a planted signal.
    Synth {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 200)]
        documents: usize,
        #[arg(long, default_value_t = 0.3)]
        positive_rate: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.verbose { "debug" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit::categorize(&err);
            eprintln!("error: {err:#}");
            if let Some(hint) = code.hint() {
                eprintln!("hint: {hint}");
            }
            code.into()
        }
    }
}

fn effective_config(g: &GlobalArgs) -> Result<PipelineConfig> {
    let mut c = match &g.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => {$(
            if let Some(v) = g.$field.clone() {
                c.$field = v;
            }
        )*};
    }
    set!(seed, task, out, corpus, thresholds, learning_rate, epochs_max, patience, hash_dims);
    if g.run_id.is_some() {
        c.run_id = g.run_id.clone();
    }
    if g.categories.is_some() {
        c.categories = g.categories.clone();
    }
    if g.split_file.is_some() {
        c.split_file = g.split_file.clone();
    }
    if g.mt_url.is_some() {
        c.mt_url = g.mt_url.clone();
    }
    if g.header {
        c.corpus_skip_lines = 1;
    }
    if let Some(n) = g.skip_lines {
        c.corpus_skip_lines = n;
    }
    if let Some(t) = g.translator {
        c.translator = match t {
            TranslatorArg::Http => TranslatorKind::Http,
            TranslatorArg::Identity => TranslatorKind::Identity,
            TranslatorArg::WordShuffle => TranslatorKind::WordShuffle,
        };
    }
    if g.augment {
        c.augment = true;
    }
    if g.strict_align {
        c.alignment = Alignment::Strict;
    }
    if g.lenient_align {
        c.alignment = Alignment::Lenient;
    }
    if !g.member_validation.is_empty() || !g.member_test.is_empty() {
        c.member_validation = g.member_validation.clone();
        c.member_test = g.member_test.clone();
    }
    c.validate()?;
    Ok(c)
}

fn run_path(config: &PipelineConfig, explicit: Option<PathBuf>, file: &str) -> PathBuf {
    explicit.unwrap_or_else(|| config.run_dir().join(file))
}

fn features_for(config: &PipelineConfig, dataset: &pipeline::Dataset, cache: Option<&Path>) -> Result<FeatureMap> {
    Ok(match cache {
        Some(path) => load_features(path)?,
        None => write_features(&config.run_dir().join("features.tsv"), &dataset.paragraphs)?,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            output,
            documents,
            positive_rate,
        } => {
            let corpus = generate(&SynthConfig {
                documents,
                positive_rate,
                seed: cli.global.seed.unwrap_or(pcl_core::corpus::DEFAULT_SEED),
            });
            let paths = corpus.write(&output)?;
            println!("corpus\t{}", paths.binary.display());
            println!("categories\t{}", paths.categories.display());
            return Ok(());
        }
        Command::Ensemble { members, output } => return ensemble(&members, &cli.global, output.as_deref()),
        Command::TuneThreshold {
            scores,
            gold,
            mid_of_plateau,
            curve,
            output,
        } => {
            let mode = if mid_of_plateau {
                ThresholdMode::MidOfPlateau
            } else {
                cli.global.thresholds.clone().unwrap_or_default()
            };
            return tune_threshold(&scores, &gold, &mode, curve.as_deref(), output.as_deref());
        }
        Command::Evaluate {
            scores,
            gold,
            tune_scores,
            tune_gold,
            name,
            metrics_out,
        } => {
            let mode = cli.global.thresholds.clone().unwrap_or_default();
            let tune = tune_scores.zip(tune_gold);
            return evaluate(&scores, &gold, &mode, tune, &name, metrics_out.as_deref());
        }
        Command::Report { run, verify, rerun } => return report(&run, verify, rerun),
        _ => {}
    }

    let config = effective_config(&cli.global)?;
    match cli.command {
        Command::RunAll => {
            let summary = pipeline::run_all(&config)?;
            for note in &summary.notes {
                log::warn!("{note}");
            }
            print!("{}", std::fs::read_to_string(summary.run_dir.join("metrics.tsv"))?);
            println!("run directory\t{}", summary.run_dir.display());
        }
        Command::Ingest { labels_out, corpus_out } => {
            let dataset = load_dataset(&config)?;
            let n = dataset.paragraphs.len();
            let positives = dataset.paragraphs.iter().filter(|p| p.binary_label()).count();
            println!("paragraphs\t{n}");
            println!("dropped_empty\t{}", dataset.dropped_empty);
            println!("positive\t{positives}");
            println!("negative\t{}", n - positives);
            let mut by_label = BTreeMap::new();
            for p in &dataset.paragraphs {
                *by_label.entry(p.original_label.value()).or_insert(0usize) += 1;
            }
            for (label, count) in by_label {
                println!("label_{label}\t{count}");
            }
            if dataset.categories.is_some() {
                for c in Category::ALL {
                    let count = dataset
                        .paragraphs
                        .iter()
                        .filter(|p| dataset.category_vector(&p.id)[c.index()])
                        .count();
                    println!("category_{}\t{count}", c.slug());
                }
            }
            if let Some(path) = labels_out {
                let all: Vec<_> = dataset.paragraphs.iter().collect();
                pipeline::write_gold(&path, &dataset, config.task, &all)?;
            }
            if let Some(path) = corpus_out {
                let mut w = create(&path)?;
                write_binary_corpus(&mut w, &dataset.paragraphs)?;
            }
        }
        Command::Split { output } => {
            let dataset = load_dataset(&config)?;
            let split = resolve_split(&config, &dataset)?;
            let path = run_path(&config, output, "split.tsv");
            let mut w = create(&path)?;
            write_split_file(&mut w, &split)?;
            for s in [Split::Train, Split::Validation, Split::Test] {
                println!("{s}\t{}", split.ids(s).len());
            }
        }
        Command::Featurize { output } => {
            let dataset = load_dataset(&config)?;
            let path = run_path(&config, output, "features.tsv");
            let features = write_features(&path, &dataset.paragraphs)?;
            println!("features\t{}\t{}", features.len(), path.display());
        }
        Command::Augment { output } => {
            let dataset = load_dataset(&config)?;
            let split = resolve_split(&config, &dataset)?;
            let path = run_path(&config, output, "augmented.tsv");
            let (paragraphs, failures) = pipeline::augment_to_file(&config, &dataset, &split, &path)?;
            for f in &failures {
                log::warn!("{f}");
            }
            println!("augmented\t{}\t{}", paragraphs.len(), path.display());
        }
        Command::Train {
            features,
            augmented,
            output,
        } => {
            let dataset = load_dataset(&config)?;
            let split = resolve_split(&config, &dataset)?;
            let features = features_for(&config, &dataset, features.as_deref())?;
            let augmented = match augmented {
                Some(path) => load_augmented(&path)?,
                None => Vec::new(),
            };
            let (model, notes) = pipeline::train_step(&config, &dataset, &split, &features, &augmented)?;
            for note in &notes {
                log::warn!("{note}");
            }
            let path = run_path(&config, output, "model.json");
            model.save(&path)?;
            for (k, head) in model.heads.iter().enumerate() {
                println!(
                    "head {k}\tbest_epoch {}\tepochs_run {}\tvalidation_f1 {}",
                    head.best_epoch, head.epochs_run, head.validation_f1
                );
            }
            println!("model\t{}", path.display());
        }
        Command::Score {
            model,
            on,
            features,
            output,
        } => {
            let model = ModelFile::load(&model)?;
            if model.task != config.task {
                bail!(pipeline::PipelineError::Config(format!(
                    "the model was trained for the {} task but --task is {}",
                    model.task, config.task
                )));
            }
            let dataset = load_dataset(&config)?;
            let features = features_for(&config, &dataset, features.as_deref())?;
            let ids: Vec<String> = match on {
                Part::All => dataset.paragraphs.iter().map(|p| p.id.clone()).collect(),
                part => {
                    let split = resolve_split(&config, &dataset)?;
                    split
                        .ids(match part {
                            Part::Train => Split::Train,
                            Part::Validation => Split::Validation,
                            _ => Split::Test,
                        })
                        .to_vec()
                }
            };
            let paragraphs = dataset.select(&ids)?;
            let scores = pipeline::score_paragraphs(&model, &paragraphs, &features, pipeline::BASELINE)?;
            write_scores(&scores, output.as_deref())?;
        }
        Command::Synth { .. }
        | Command::Ensemble { .. }
        | Command::TuneThreshold { .. }
        | Command::Evaluate { .. }
        | Command::Report { .. } => unreachable!("handled above"),
    }
    Ok(())
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(std::io::BufWriter::new(file))
}

fn write_scores(scores: &ScoreMatrix, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => save_score_file(path, scores)?,
        None => write_score_file(std::io::stdout().lock(), scores)?,
    }
    Ok(())
}

fn ensemble(members: &[PathBuf], g: &GlobalArgs, output: Option<&Path>) -> Result<()> {
    let alignment = if g.lenient_align { Alignment::Lenient } else { Alignment::Strict };
    let matrices = members
        .iter()
        .map(validate_score_file)
        .collect::<Result<Vec<_>, _>>()?;
    let result = average(&matrices, alignment)?;
    if result.dropped_ids > 0 {
        log::warn!("{} ids not shared by every member were dropped", result.dropped_ids);
    }
    write_scores(&result.into_matrix(ENSEMBLE), output)
}

fn column_name(columns: usize, k: usize) -> String {
    if columns == 1 {
        "binary".into()
    } else {
        Category::from_index(k).map_or_else(|| format!("c{k}"), |c| c.slug().to_string())
    }
}

fn tune_threshold(scores: &Path, gold: &Path, mode: &ThresholdMode, curve: Option<&Path>, output: Option<&Path>) -> Result<()> {
    let scores = validate_score_file(scores)?;
    let gold = validate_score_file(gold)?;
    let (thresholds, searches) = pipeline::choose_thresholds(mode, &scores, &gold)?;
    let columns = scores.columns();
    let data = labeled_columns(&scores, &gold)?;
    let mut out = std::io::stdout().lock();
    for (k, (t, search)) in thresholds.iter().zip(&searches).enumerate() {
        let f1 = pcl_core::metrics::f1_score(data[k].y_true(), &pcl_core::metrics::binarize(data[k].y_out(), *t)).f1;
        let fallback = if search.fallback { " (fallback)" } else { "" };
        writeln!(out, "{}: best threshold {t}, F1 {f1}{fallback}", column_name(columns, k))?;
    }
    if let Some(base) = curve {
        let task = if columns == 1 { Task::Binary } else { Task::Multilabel };
        let dir = base.parent().unwrap_or(Path::new("."));
        match task {
            Task::Binary => {
                pcl_core::report::emit_threshold_curve(&searches[0], base, "F1 by threshold")?;
            }
            Task::Multilabel => emit_curves(task, &searches, dir)?,
        }
    }
    if let Some(path) = output {
        let mut w = create(path)?;
        for t in &thresholds {
            writeln!(w, "{t}")?;
        }
    }
    Ok(())
}

fn evaluate(
    scores: &Path,
    gold: &Path,
    mode: &ThresholdMode,
    tune: Option<(PathBuf, PathBuf)>,
    name: &str,
    metrics_out: Option<&Path>,
) -> Result<()> {
    let scores = validate_score_file(scores)?;
    let gold = validate_score_file(gold)?;
    let thresholds = match (mode, tune) {
        (ThresholdMode::Search | ThresholdMode::MidOfPlateau, None) => bail!(pipeline::PipelineError::Config(
            "search modes need --tune-scores and --tune-gold; pass --thresholds value:<list> or preset:paper to evaluate with fixed thresholds".into()
        )),
        (_, Some((tune_scores, tune_gold))) => {
            let tune_scores = validate_score_file(tune_scores)?;
            let tune_gold = validate_score_file(tune_gold)?;
            pipeline::choose_thresholds(mode, &tune_scores, &tune_gold)?.0
        }
        (fixed, None) => {
            let columns = labeled_columns(&scores, &gold)?;
            fixed.choose(&columns)?.0
        }
    };
    let report = pipeline::evaluate(&scores, &gold, &thresholds)?;
    let task = if scores.columns() == 1 { Task::Binary } else { Task::Multilabel };
    print!("{}", render_metrics_table(task, &[(name.to_string(), report.clone())]));
    let thresholds: Vec<String> = thresholds.iter().map(f64::to_string).collect();
    println!("thresholds\t{}", thresholds.join(","));
    if let Some(path) = metrics_out {
        let mut w = create(path)?;
        for (key, value) in metric_entries(name, &report) {
            writeln!(w, "{key}\t{value}")?;
        }
    }
    Ok(())
}

fn report(run: &Path, verify: bool, rerun: bool) -> Result<()> {
    let manifest_path = if run.is_dir() {
        run.join(pcl_core::report::MANIFEST_FILE)
    } else {
        run.to_path_buf()
    };
    if rerun {
        let summary = pipeline::rerun(&manifest_path)?;
        print!("{}", std::fs::read_to_string(summary.run_dir.join("metrics.tsv"))?);
        println!("run directory\t{}", summary.run_dir.display());
        return Ok(());
    }
    let manifest = RunManifest::load(&manifest_path)?;
    if verify {
        manifest.verify()?;
        println!("inputs verified\t{}", manifest.inputs.len());
    }
    println!("run_id\t{}", manifest.run_id);
    println!("task\t{}", manifest.task);
    println!("seed\t{}", manifest.seed);
    println!("members\t{}", manifest.members.join(","));
    let thresholds: Vec<String> = manifest.thresholds.iter().map(f64::to_string).collect();
    println!("thresholds\t{}", thresholds.join(","));
    for (key, value) in &manifest.metrics {
        println!("{key}\t{value}");
    }
    Ok(())
}
