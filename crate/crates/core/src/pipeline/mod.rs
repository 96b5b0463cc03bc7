//! End-to-end experiment driver.
//!
//! [`run_all`] chains the steps below and writes one run directory:
//!
//! ```text
//! <out>/<run_id>/
//!   manifest.toml        config snapshot, input checksums, thresholds, metrics
//!   metrics.tsv          validation and test scores per system
//!   curve.tsv|svg        validation threshold curve (binary)
//!   curve-<category>.*   one curve per category (multi-label)
//!   errors.md            baseline vs ensemble error analysis on test
//!   features.tsv         engineered features for every paragraph
//!   split.tsv            the train/validation/test assignment
//!   model.json           the trained baseline
//!   gold.<split>.tsv     gold labels in score-file layout
//!   scores/<system>.<split>.tsv
//! ```
//!
//! Each step is also a public function so the `pcl` subcommands can run them
//! one at a time and arrive at the same numbers.

mod config;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use config::{PipelineConfig, TranslatorKind};

use crate::augment::{
    augment_corpus, AugmentReport, HttpTranslator, IdentityTranslator, TranslationCache, Translator,
    WordShuffleTranslator, AUGMENTED_ID_MARKER,
};
use crate::corpus::{
    expand_multilabel_with_negatives, make_split, parse_binary_corpus, parse_category_corpus, read_split_file,
    write_binary_corpus, write_split_file, Category, CorpusError, Paragraph, ParseOptions, Split, SplitAssignment,
};
use crate::ensemble::{average, save_score_file, validate_score_file, Alignment, ScoreFileError, ScoreMatrix};
use crate::features::{extract_features, load_feature_cache, write_feature_cache, FeatureVector};
use crate::metrics::{binarize, f1_score, multilabel_metrics, MetricsReport};
use crate::model::{score_samples, train, ModelError, ModelFile, Sample};
use crate::report::{
    compare_systems, emit_metrics_table, emit_threshold_curve, render_error_analysis, FileChecksum, GoldSample,
    ReportError, RunManifest, MANIFEST_FILE,
};
use crate::threshold::{LabeledScores, ThresholdError, ThresholdMode, ThresholdSearchResult};
use crate::Task;

pub const BASELINE: &str = "baseline";
pub const ENSEMBLE: &str = "ensemble";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("input file {} does not exist", .0.display())]
    MissingInput(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Scores(#[from] ScoreFileError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("augmentation: {0}")]
    Augment(String),
    #[error("{0}")]
    Data(String),
}

impl PipelineError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.into(),
            source,
        }
    }
}

/// The corpus with its labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub paragraphs: Vec<Paragraph>,
    /// Category vectors by paragraph id; present for the multi-label task.
    pub categories: Option<HashMap<String, [bool; Category::COUNT]>>,
    pub dropped_empty: usize,
}

/// Strips the augmentation suffix so augmented samples find their source.
pub fn source_id(id: &str) -> &str {
    id.split(AUGMENTED_ID_MARKER).next().unwrap_or(id)
}

impl Dataset {
    pub fn category_vector(&self, id: &str) -> [bool; Category::COUNT] {
        self.categories
            .as_ref()
            .and_then(|c| c.get(source_id(id)).copied())
            .unwrap_or([false; Category::COUNT])
    }

    /// Gold labels as 0/1 values: the binary label, or one column per category.
    pub fn gold_row(&self, task: Task, p: &Paragraph) -> Vec<f64> {
        match task {
            Task::Binary => vec![f64::from(u8::from(p.binary_label()))],
            Task::Multilabel => self
                .category_vector(&p.id)
                .iter()
                .map(|&b| f64::from(u8::from(b)))
                .collect(),
        }
    }

    pub fn select(&self, ids: &[String]) -> Result<Vec<&Paragraph>, PipelineError> {
        let index: HashMap<&str, &Paragraph> = self.paragraphs.iter().map(|p| (p.id.as_str(), p)).collect();
        ids.iter()
            .map(|id| {
                index
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| PipelineError::Data(format!("id `{id}` is not in the corpus")))
            })
            .collect()
    }

    pub fn gold_matrix(&self, task: Task, paragraphs: &[&Paragraph]) -> ScoreMatrix {
        let ids = paragraphs.iter().map(|p| p.id.clone()).collect();
        let scores = paragraphs.iter().flat_map(|p| self.gold_row(task, p)).collect();
        ScoreMatrix::new("gold", ids, task.columns(), scores).expect("gold labels are valid scores")
    }
}

pub fn load_dataset(config: &PipelineConfig) -> Result<Dataset, PipelineError> {
    let corpus = parse_binary_corpus(
        &config.corpus,
        ParseOptions {
            skip_lines: config.corpus_skip_lines,
        },
    )?;
    let categories = match (config.task, &config.categories) {
        (Task::Multilabel, Some(path)) => {
            let records = parse_category_corpus(path, &corpus.paragraphs, config.categories_skip_lines)?;
            let expanded = expand_multilabel_with_negatives(&records, &corpus.paragraphs)?;
            Some(expanded.into_iter().map(|r| (r.paragraph_id, r.labels)).collect())
        }
        (Task::Multilabel, None) => {
            return Err(PipelineError::Config("the multilabel task needs `categories`".into()))
        }
        (Task::Binary, _) => None,
    };
    Ok(Dataset {
        paragraphs: corpus.paragraphs,
        categories,
        dropped_empty: corpus.dropped_empty,
    })
}

pub fn resolve_split(config: &PipelineConfig, dataset: &Dataset) -> Result<SplitAssignment, PipelineError> {
    let split = match &config.split_file {
        Some(path) => read_split_file(path)?,
        None => make_split(
            &dataset.paragraphs,
            config.seed,
            config.test_fraction,
            config.validation_fraction,
        )?,
    };
    Ok(split.align_to(&dataset.paragraphs)?)
}

/// Feature vectors keyed by paragraph id.
pub type FeatureMap = HashMap<String, FeatureVector>;

/// Features for every paragraph, in input order.
pub fn compute_features(paragraphs: &[Paragraph]) -> Vec<FeatureVector> {
    paragraphs.par_iter().map(|p| extract_features(&p.text)).collect()
}

/// Computes, writes and reloads the feature cache, so every consumer sees
/// the values at the precision stored on disk.
pub fn write_features(path: &Path, paragraphs: &[Paragraph]) -> Result<FeatureMap, PipelineError> {
    let vectors = compute_features(paragraphs);
    write_file(path, |w| {
        write_feature_cache(w, paragraphs.iter().map(|p| p.id.as_str()).zip(&vectors))
    })?;
    load_features(path)
}

pub fn load_features(path: &Path) -> Result<FeatureMap, PipelineError> {
    Ok(load_feature_cache(path)
        .map_err(|e| PipelineError::Data(format!("{}: {e}", path.display())))?
        .into_iter()
        .collect())
}

pub fn build_translator(config: &PipelineConfig) -> Result<Box<dyn Translator>, PipelineError> {
    Ok(match config.translator {
        TranslatorKind::Identity => Box::new(IdentityTranslator),
        TranslatorKind::WordShuffle => Box::new(WordShuffleTranslator),
        TranslatorKind::Http => Box::new(
            HttpTranslator::from_env_or(config.mt_url.clone(), config.mt_timeout(), config.mt_retries)
                .map_err(|e| PipelineError::Config(e.to_string()))?,
        ),
    })
}

/// Backtranslates the training paragraphs.
pub fn augment_training(config: &PipelineConfig, train: &[Paragraph]) -> Result<AugmentReport, PipelineError> {
    let translator = build_translator(config)?;
    let cache = TranslationCache::open(config.translation_cache_path()).map_err(|e| PipelineError::Augment(e.to_string()))?;
    let report = augment_corpus(train, translator.as_ref(), &config.augment_options(), &cache)
        .map_err(|e| PipelineError::Augment(e.to_string()))?;
    log::info!(
        "augmentation: {} samples, {} failures, {} duplicates dropped, {} cache hits, {} translator calls",
        report.samples.len(),
        report.failures.len(),
        report.deduplicated,
        report.cache_hits,
        report.translator_calls
    );
    Ok(report)
}

/// Backtranslates the training split, writes the result in the binary
/// corpus layout and reloads it.
pub fn augment_to_file(
    config: &PipelineConfig,
    dataset: &Dataset,
    split: &SplitAssignment,
    path: &Path,
) -> Result<(Vec<Paragraph>, Vec<String>), PipelineError> {
    let train: Vec<Paragraph> = dataset.select(split.ids(Split::Train))?.into_iter().cloned().collect();
    let report = augment_training(config, &train)?;
    let notes = report
        .failures
        .iter()
        .map(|f| format!("augmentation failed: {f}"))
        .collect();
    let paragraphs: Vec<Paragraph> = report.samples.iter().map(|s| s.to_paragraph()).collect();
    write_file(path, |w| write_binary_corpus(w, &paragraphs))?;
    Ok((load_augmented(path)?, notes))
}

pub fn load_augmented(path: &Path) -> Result<Vec<Paragraph>, PipelineError> {
    Ok(parse_binary_corpus(path, ParseOptions::default())?.paragraphs)
}

fn samples(dataset: &Dataset, paragraphs: &[&Paragraph], features: &FeatureMap, column: Option<usize>) -> Vec<Sample> {
    paragraphs
        .iter()
        .map(|p| Sample {
            id: p.id.clone(),
            text: p.text.clone(),
            features: features
                .get(p.id.as_str())
                .copied()
                .unwrap_or_else(|| extract_features(&p.text)),
            target: match column {
                None => p.soft_label(),
                Some(k) => f64::from(u8::from(dataset.category_vector(&p.id)[k])),
            },
        })
        .collect()
}

/// Trains one head per score column. A category whose validation split has
/// a single class falls back to selecting epochs on the training split;
/// each fallback adds a note.
pub fn train_baseline(
    config: &PipelineConfig,
    dataset: &Dataset,
    train_set: &[&Paragraph],
    validation_set: &[&Paragraph],
    features: &FeatureMap,
) -> Result<(ModelFile, Vec<String>), PipelineError> {
    let model_config = config.model_config();
    let mut notes = Vec::new();
    let heads = match config.task {
        Task::Binary => {
            let train_samples = samples(dataset, train_set, features, None);
            let validation_samples = samples(dataset, validation_set, features, None);
            vec![train(&train_samples, &validation_samples, &model_config)?]
        }
        Task::Multilabel => Category::ALL
            .iter()
            .map(|c| {
                let k = c.index();
                let train_samples = samples(dataset, train_set, features, Some(k));
                let validation_samples = samples(dataset, validation_set, features, Some(k));
                match train(&train_samples, &validation_samples, &model_config) {
                    Err(ModelError::SingleClassValidation { .. }) => {
                        let note = format!("category `{}`: validation split has one class; selected epochs on train", c.name());
                        log::warn!("{note}");
                        notes.push(note);
                        train(&train_samples, &train_samples, &model_config).map_err(|e| {
                            PipelineError::Data(format!("category `{}` cannot be trained: {e}", c.name()))
                        })
                    }
                    other => other.map_err(PipelineError::from),
                }
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok((ModelFile::new(config.task, heads), notes))
}

pub fn score_paragraphs(
    model: &ModelFile,
    paragraphs: &[&Paragraph],
    features: &FeatureMap,
    model_id: &str,
) -> Result<ScoreMatrix, PipelineError> {
    let samples: Vec<Sample> = paragraphs
        .iter()
        .map(|p| Sample {
            id: p.id.clone(),
            text: p.text.clone(),
            features: features
                .get(p.id.as_str())
                .copied()
                .unwrap_or_else(|| extract_features(&p.text)),
            target: 0.0,
        })
        .collect();
    Ok(score_samples(&model.heads, &samples, model_id)?)
}

/// Averages the members and restricts the result to `ids`. Strict alignment
/// requires every id to be present.
pub fn ensemble_for(members: &[ScoreMatrix], alignment: Alignment, ids: &[String]) -> Result<ScoreMatrix, PipelineError> {
    let mean = average(members, alignment)?.into_matrix(ENSEMBLE);
    let index = mean.index();
    let keep: Vec<String> = ids.iter().filter(|id| index.contains_key(id.as_str())).cloned().collect();
    if keep.len() != ids.len() {
        if alignment == Alignment::Strict {
            return Err(PipelineError::Data(format!(
                "ensemble covers {} of {} split ids",
                keep.len(),
                ids.len()
            )));
        }
        log::warn!("ensemble covers {} of {} split ids", keep.len(), ids.len());
    }
    Ok(mean.select(&keep)?)
}

/// Pairs each score column with the gold labels of the same ids.
pub fn labeled_columns(scores: &ScoreMatrix, gold: &ScoreMatrix) -> Result<Vec<LabeledScores>, PipelineError> {
    if scores.columns() != gold.columns() {
        return Err(PipelineError::Data(format!(
            "scores have {} columns but gold labels have {}",
            scores.columns(),
            gold.columns()
        )));
    }
    let gold = gold.select(scores.ids())?;
    (0..scores.columns())
        .map(|k| {
            let y_true = gold.column(k).into_iter().map(|v| v >= 0.5).collect();
            Ok(LabeledScores::new(y_true, scores.column(k))?)
        })
        .collect()
}

pub fn choose_thresholds(
    mode: &ThresholdMode,
    validation_scores: &ScoreMatrix,
    validation_gold: &ScoreMatrix,
) -> Result<(Vec<f64>, Vec<ThresholdSearchResult>), PipelineError> {
    Ok(mode.choose(&labeled_columns(validation_scores, validation_gold)?)?)
}

pub fn evaluate(scores: &ScoreMatrix, gold: &ScoreMatrix, thresholds: &[f64]) -> Result<MetricsReport, PipelineError> {
    let columns = labeled_columns(scores, gold)?;
    if thresholds.len() != columns.len() {
        return Err(ThresholdError::WrongCount {
            expected: columns.len(),
            found: thresholds.len(),
        }
        .into());
    }
    let predictions: Vec<Vec<bool>> = columns
        .iter()
        .zip(thresholds)
        .map(|(c, &t)| binarize(c.y_out(), t))
        .collect();
    Ok(if columns.len() == 1 {
        MetricsReport::Binary(f1_score(columns[0].y_true(), &predictions[0]))
    } else {
        let truth: Vec<Vec<bool>> = columns.iter().map(|c| c.y_true().to_vec()).collect();
        MetricsReport::MultiLabel(multilabel_metrics(&truth, &predictions))
    })
}

/// Flat `<prefix>.<metric>` entries, as stored in manifests.
pub fn metric_entries(prefix: &str, report: &MetricsReport) -> Vec<(String, f64)> {
    match report {
        MetricsReport::Binary(m) => vec![
            (format!("{prefix}.precision"), m.precision),
            (format!("{prefix}.recall"), m.recall),
            (format!("{prefix}.f1"), m.f1),
        ],
        MetricsReport::MultiLabel(m) => {
            let mut out: Vec<(String, f64)> = Category::ALL
                .iter()
                .zip(&m.per_category)
                .flat_map(|(c, b)| {
                    [
                        (format!("{prefix}.precision.{}", c.slug()), b.precision),
                        (format!("{prefix}.recall.{}", c.slug()), b.recall),
                        (format!("{prefix}.f1.{}", c.slug()), b.f1),
                    ]
                })
                .collect();
            out.push((format!("{prefix}.macro_precision"), m.macro_precision));
            out.push((format!("{prefix}.macro_recall"), m.macro_recall));
            out.push((format!("{prefix}.macro_f1"), m.macro_f1));
            out
        }
    }
}

/// Any-category collapse used for multi-label error analysis.
fn any_positive(row: &[f64], thresholds: &[f64]) -> bool {
    row.iter().zip(thresholds).any(|(s, t)| s >= t)
}

fn predictions(scores: &ScoreMatrix, thresholds: &[f64]) -> Vec<(String, bool)> {
    scores
        .ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), any_positive(scores.row(i), thresholds)))
        .collect()
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub run_dir: PathBuf,
    pub manifest: RunManifest,
    pub notes: Vec<String>,
}

fn write_file(path: &Path, write: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write(&mut w).map_err(|e| PipelineError::io(path, e))
}

/// Trains on the training split plus `augmented`.
pub fn train_step(
    config: &PipelineConfig,
    dataset: &Dataset,
    split: &SplitAssignment,
    features: &FeatureMap,
    augmented: &[Paragraph],
) -> Result<(ModelFile, Vec<String>), PipelineError> {
    let mut train_set = dataset.select(split.ids(Split::Train))?;
    train_set.extend(augmented);
    let validation_set = dataset.select(split.ids(Split::Validation))?;
    let mut features = features.clone();
    let missing: Vec<&Paragraph> = augmented.iter().filter(|p| !features.contains_key(&p.id)).collect();
    let computed: Vec<FeatureVector> = missing.par_iter().map(|p| extract_features(&p.text)).collect();
    features.extend(missing.iter().map(|p| p.id.clone()).zip(computed));
    train_baseline(config, dataset, &train_set, &validation_set, &features)
}

/// Scores one split with the baseline, writes the score file and reloads it.
pub fn score_step(
    model: &ModelFile,
    dataset: &Dataset,
    split: &SplitAssignment,
    which: Split,
    features: &FeatureMap,
    path: &Path,
) -> Result<ScoreMatrix, PipelineError> {
    let paragraphs = dataset.select(split.ids(which))?;
    let scores = score_paragraphs(model, &paragraphs, features, BASELINE)?;
    persist_scores(path, &scores)
}

/// Writes `matrix` and reads it back under the same model id, so in-memory
/// results match what later steps read from disk.
pub fn persist_scores(path: &Path, matrix: &ScoreMatrix) -> Result<ScoreMatrix, PipelineError> {
    save_score_file(path, matrix)?;
    Ok(validate_score_file(path)?.with_model_id(matrix.model_id()))
}

pub fn write_gold(path: &Path, dataset: &Dataset, task: Task, paragraphs: &[&Paragraph]) -> Result<ScoreMatrix, PipelineError> {
    persist_scores(path, &dataset.gold_matrix(task, paragraphs))
}

fn split_name(split: Split) -> &'static str {
    match split {
        Split::Train => "train",
        Split::Validation => "validation",
        Split::Test => "test",
    }
}

/// Runs every step and writes the run directory.
pub fn run_all(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    config.validate()?;
    let run_dir = config.run_dir();
    std::fs::create_dir_all(&run_dir).map_err(|e| PipelineError::io(&run_dir, e))?;
    let mut notes = Vec::new();

    let dataset = load_dataset(config)?;
    if dataset.dropped_empty > 0 {
        notes.push(format!("dropped {} paragraphs with empty text", dataset.dropped_empty));
    }
    let split = resolve_split(config, &dataset)?;
    write_file(&run_dir.join("split.tsv"), |w| write_split_file(w, &split))?;
    let features = write_features(&run_dir.join("features.tsv"), &dataset.paragraphs)?;

    let augmented = if config.augment {
        let (paragraphs, failures) = augment_to_file(config, &dataset, &split, &run_dir.join("augmented.tsv"))?;
        notes.extend(failures);
        paragraphs
    } else {
        Vec::new()
    };

    let (model, train_notes) = train_step(config, &dataset, &split, &features, &augmented)?;
    notes.extend(train_notes);
    model.save(run_dir.join("model.json"))?;

    let scores_dir = run_dir.join("scores");
    let mut gold = Vec::new();
    let mut baseline = Vec::new();
    let mut ensemble = Vec::new();
    let mut member_ids = Vec::new();
    for (which, member_files) in [
        (Split::Validation, &config.member_validation),
        (Split::Test, &config.member_test),
    ] {
        let name = split_name(which);
        let paragraphs = dataset.select(split.ids(which))?;
        gold.push(write_gold(&run_dir.join(format!("gold.{name}.tsv")), &dataset, config.task, &paragraphs)?);
        let base = score_step(&model, &dataset, &split, which, &features, &scores_dir.join(format!("{BASELINE}.{name}.tsv")))?;
        let mut members = vec![base.clone()];
        for path in member_files {
            members.push(validate_score_file(path)?);
        }
        member_ids = members.iter().map(|m| m.model_id().to_owned()).collect();
        let mean = ensemble_for(&members, config.alignment, split.ids(which))?;
        ensemble.push(persist_scores(&scores_dir.join(format!("{ENSEMBLE}.{name}.tsv")), &mean)?);
        baseline.push(base);
    }

    let (thresholds, searches) = choose_thresholds(&config.thresholds, &ensemble[0], &gold[0])?;
    let (baseline_thresholds, _) = choose_thresholds(&config.thresholds, &baseline[0], &gold[0])?;

    let mut metrics = BTreeMap::new();
    let mut table = Vec::new();
    for (system, scores, t) in [(BASELINE, &baseline, &baseline_thresholds), (ENSEMBLE, &ensemble, &thresholds)] {
        for (k, name) in ["validation", "test"].into_iter().enumerate() {
            let report = evaluate(&scores[k], &gold[k], t)?;
            metrics.extend(metric_entries(&format!("{system}.{name}"), &report));
            table.push((format!("{system}/{name}"), report));
        }
    }
    emit_metrics_table(config.task, &table, &run_dir.join("metrics.tsv"))?;
    emit_curves(config.task, &searches, &run_dir)?;

    let test_set = dataset.select(split.ids(Split::Test))?;
    let errors = error_analysis(config.task, &dataset, &test_set, (&baseline[1], &baseline_thresholds), (&ensemble[1], &thresholds))?;
    std::fs::write(run_dir.join("errors.md"), errors).map_err(|e| PipelineError::io(run_dir.join("errors.md"), e))?;

    let mut inputs = vec![FileChecksum::of(&config.corpus)?];
    for path in config
        .categories
        .iter()
        .chain(&config.split_file)
        .chain(&config.member_validation)
        .chain(&config.member_test)
    {
        inputs.push(FileChecksum::of(path)?);
    }
    let manifest = RunManifest {
        run_id: config.run_id(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        task: config.task,
        seed: config.seed,
        members: member_ids,
        thresholds,
        metrics,
        inputs,
        config: config.to_table(),
    };
    manifest.save(&run_dir.join(MANIFEST_FILE))?;
    Ok(RunSummary {
        run_dir,
        manifest,
        notes,
    })
}

/// Writes `curve.tsv/svg`, or one `curve-<category>` pair per category with
/// validation positives.
pub fn emit_curves(task: Task, searches: &[ThresholdSearchResult], dir: &Path) -> Result<(), PipelineError> {
    match task {
        Task::Binary => {
            emit_threshold_curve(&searches[0], &dir.join("curve"), "validation F1 by threshold")?;
        }
        Task::Multilabel => {
            for (c, search) in Category::ALL.iter().zip(searches) {
                if search.curve.is_empty() {
                    continue;
                }
                emit_threshold_curve(
                    search,
                    &dir.join(format!("curve-{}", c.slug())),
                    &format!("{}: validation F1 by threshold", c.name()),
                )?;
            }
        }
    }
    Ok(())
}

/// Markdown comparison of two systems on `paragraphs`. Multi-label runs are
/// compared on the any-category collapse.
pub fn error_analysis(
    task: Task,
    dataset: &Dataset,
    paragraphs: &[&Paragraph],
    (baseline, baseline_thresholds): (&ScoreMatrix, &[f64]),
    (system, system_thresholds): (&ScoreMatrix, &[f64]),
) -> Result<String, PipelineError> {
    let covered = system.index();
    let gold: Vec<GoldSample> = paragraphs
        .iter()
        .filter(|p| covered.contains_key(p.id.as_str()))
        .map(|p| {
            let cats = dataset.category_vector(&p.id);
            GoldSample {
                id: p.id.clone(),
                text: p.text.clone(),
                label: match task {
                    Task::Binary => p.binary_label(),
                    Task::Multilabel => cats.iter().any(|c| *c),
                },
                categories: Category::ALL.into_iter().filter(|c| cats[c.index()]).collect(),
            }
        })
        .collect();
    let ids: Vec<String> = gold.iter().map(|g| g.id.clone()).collect();
    let rows = compare_systems(
        &gold,
        &predictions(&baseline.select(&ids)?, baseline_thresholds),
        &predictions(&system.select(&ids)?, system_thresholds),
    )?;
    Ok(render_error_analysis(&rows, baseline.model_id(), system.model_id()))
}

/// Verifies a manifest's input checksums and runs its config again.
pub fn rerun(manifest_path: &Path) -> Result<RunSummary, PipelineError> {
    let manifest = RunManifest::load(manifest_path)?;
    manifest.verify()?;
    let config = PipelineConfig::from_table(manifest.config.clone())?;
    run_all(&config)
}
