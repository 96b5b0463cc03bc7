//! Linear baseline over hashed bag-of-words plus the engineered features.
//!
//! The input vector `φ(x)` has three blocks:
//!
//! * `hash_dims` slots holding L2-normalized lowercase unigram counts, each
//!   word hashed with FNV-1a (64 bit) modulo `hash_dims`;
//! * the twelve engineered features, z-normalized with training statistics;
//! * a constant 1 for the bias.
//!
//! The model outputs `σ(w·φ(x))` and is trained by mini-batch gradient
//! descent on binary cross-entropy against soft labels, with validation F1 at
//! threshold 0.5 used for early stopping.
//!
//! # Model file
//!
//! Models are stored as JSON:
//!
//! ```text
//! { "format": "pcl-linear", "version": 1, "task": "binary",
//!   "heads": [ { "config": {..}, "stats": {"mean": [12], "std": [12]},
//!                "weights": {"len": N, "nonzero": [[index, value], ..]},
//!                "best_epoch": .., "epochs_run": .., "validation_f1": ..,
//!                "train_loss": [..], "validation_history": [..] } ] }
//! ```
//!
//! Binary models have one head; multi-label models have seven, in
//! [`Category::ALL`](crate::Category::ALL) order. Floats are written in
//! shortest round-trip form, so a reloaded model predicts bit-identically.

use std::collections::HashSet;
use std::hash::Hasher;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::{write_score_file, ScoreFileError, ScoreMatrix};
use crate::features::{tokenize, FeatureVector, TokenKind, FEATURE_COUNT};
use crate::metrics::{binarize, f1_score};
use crate::{tsv, Task};

pub const MODEL_FORMAT: &str = "pcl-linear";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("training set is empty")]
    EmptyTrain,
    #[error("validation set must contain both classes (got {positives} positives of {total})")]
    SingleClassValidation { positives: usize, total: usize },
    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("duplicate sample id `{0}`")]
    DuplicateId(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("unsupported model file: {0}")]
    Format(String),
    #[error(transparent)]
    Scores(#[from] ScoreFileError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// Train against `label / 4`.
    #[default]
    SoftLabels,
    /// Train against `label >= 2` as 0/1.
    HardLabels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub hash_dims: usize,
    pub learning_rate: f64,
    pub epochs_max: usize,
    pub patience: usize,
    pub l2: f64,
    pub seed: u64,
    pub target: Target,
    pub batch_size: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hash_dims: 1 << 18,
            learning_rate: 2.0,
            epochs_max: 100,
            patience: 10,
            l2: 1e-6,
            seed: crate::corpus::DEFAULT_SEED,
            target: Target::SoftLabels,
            batch_size: 8,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |m: &str| Err(ModelError::Config(m.into()));
        if self.hash_dims < 1 {
            return fail("hash_dims must be at least 1");
        }
        if self.patience < 1 {
            return fail("patience must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if self.epochs_max < 1 {
            return fail("epochs_max must be at least 1");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return fail("l2 must be non-negative");
        }
        if self.batch_size < 1 {
            return fail("batch_size must be at least 1");
        }
        Ok(())
    }

    /// Length of `φ(x)` and of the weight vector.
    pub fn input_dims(&self) -> usize {
        self.hash_dims + FEATURE_COUNT + 1
    }
}

/// One training or scoring example. `target` is the soft label (or a 0/1
/// category indicator); it is ignored when scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub text: String,
    pub features: FeatureVector,
    pub target: f64,
}

impl Sample {
    pub fn is_positive(&self) -> bool {
        self.target >= 0.5
    }
}

/// Training-set mean and standard deviation of each engineered feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: [f64; FEATURE_COUNT],
    pub std: [f64; FEATURE_COUNT],
}

impl FeatureStats {
    /// Population statistics; a zero deviation is replaced by 1.
    pub fn fit<'a>(features: impl IntoIterator<Item = &'a FeatureVector>) -> Self {
        let rows: Vec<&FeatureVector> = features.into_iter().collect();
        let n = rows.len().max(1) as f64;
        let mut mean = [0.0; FEATURE_COUNT];
        let mut std = [0.0; FEATURE_COUNT];
        for k in 0..FEATURE_COUNT {
            mean[k] = rows.iter().map(|f| f.0[k]).sum::<f64>() / n;
            let var = rows.iter().map(|f| (f.0[k] - mean[k]).powi(2)).sum::<f64>() / n;
            std[k] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        FeatureStats { mean, std }
    }

    pub fn normalize(&self, features: &FeatureVector) -> [f64; FEATURE_COUNT] {
        std::array::from_fn(|k| (features.0[k] - self.mean[k]) / self.std[k])
    }
}

/// Sorted sparse vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, v)| dense[i] * v)
            .sum()
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (&i, v) in self.indices.iter().zip(&self.values) {
            out[i] += v;
        }
        out
    }
}

fn fnv1a(word: &str) -> u64 {
    let mut hasher = fnv::FnvHasher::default();
    hasher.write(word.as_bytes());
    hasher.finish()
}

/// L2-normalized hashed unigram counts.
pub fn hashed_bag_of_words(text: &str, hash_dims: usize) -> SparseVector {
    let mut buckets: Vec<usize> = tokenize(text)
        .into_iter()
        .filter(|t| t.kind == TokenKind::Word)
        .map(|t| (fnv1a(&t.text.to_lowercase()) % hash_dims as u64) as usize)
        .collect();
    buckets.sort_unstable();
    let mut v = SparseVector::default();
    for b in buckets {
        if v.indices.last() == Some(&b) {
            *v.values.last_mut().unwrap() += 1.0;
        } else {
            v.indices.push(b);
            v.values.push(1.0);
        }
    }
    let norm = v.values.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.values.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

/// Scales the z-scored features so their block has unit expected norm,
/// like the bag-of-words block.
fn feature_block_scale() -> f64 {
    1.0 / (FEATURE_COUNT as f64).sqrt()
}

/// The full input vector `φ(x)`: the L2-normalized hashed bag of words, the
/// twelve z-scored features scaled by `1/sqrt(12)`, and a constant 1 for the
/// bias.
pub fn featurize(text: &str, features: &FeatureVector, stats: &FeatureStats, hash_dims: usize) -> SparseVector {
    let mut v = hashed_bag_of_words(text, hash_dims);
    for (k, z) in stats.normalize(features).into_iter().enumerate() {
        v.indices.push(hash_dims + k);
        v.values.push(z * feature_block_scale());
    }
    v.indices.push(hash_dims + FEATURE_COUNT);
    v.values.push(1.0);
    v
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `BCE(σ(z), y)` computed from the logit without forming `σ(z)`.
pub fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// `BCE(σ(w·x), y)` for dense `w` and `x`.
pub fn bce_loss(weights: &[f64], x: &[f64], y: f64) -> f64 {
    let z: f64 = weights.iter().zip(x).map(|(w, x)| w * x).sum();
    bce_from_logit(z, y)
}

/// Gradient of [`bce_loss`] with respect to the weights: `(σ(w·x) − y)·x`.
pub fn bce_gradient(weights: &[f64], x: &[f64], y: f64) -> Vec<f64> {
    let z: f64 = weights.iter().zip(x).map(|(w, x)| w * x).sum();
    let residual = sigmoid(z) - y;
    x.iter().map(|x| residual * x).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub stats: FeatureStats,
    #[serde(with = "sparse_weights")]
    pub weights: Vec<f64>,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub validation_f1: f64,
    /// Mean training BCE after each epoch.
    pub train_loss: Vec<f64>,
    /// Validation F1 at 0.5 after each epoch.
    pub validation_history: Vec<f64>,
}

impl TrainedModel {
    /// A model that outputs 0.5 everywhere.
    pub fn zeros(config: ModelConfig, stats: FeatureStats) -> Self {
        TrainedModel {
            weights: vec![0.0; config.input_dims()],
            config,
            stats,
            best_epoch: 0,
            epochs_run: 0,
            validation_f1: 0.0,
            train_loss: Vec::new(),
            validation_history: Vec::new(),
        }
    }

    pub fn predict(&self, text: &str, features: &FeatureVector) -> f64 {
        let phi = featurize(text, features, &self.stats, self.config.hash_dims);
        sigmoid(phi.dot(&self.weights))
    }
}

mod sparse_weights {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Stored {
        len: usize,
        nonzero: Vec<(usize, f64)>,
    }

    pub fn serialize<S: Serializer>(weights: &[f64], s: S) -> Result<S::Ok, S::Error> {
        Stored {
            len: weights.len(),
            nonzero: weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(i, w)| (i, *w))
                .collect(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let stored = Stored::deserialize(d)?;
        let mut weights = vec![0.0; stored.len];
        for (i, w) in stored.nonzero {
            *weights
                .get_mut(i)
                .ok_or_else(|| serde::de::Error::custom(format!("weight index {i} out of range")))? = w;
        }
        Ok(weights)
    }
}

fn mean_loss(weights: &[f64], inputs: &[SparseVector], targets: &[f64]) -> f64 {
    inputs
        .iter()
        .zip(targets)
        .map(|(x, &y)| bce_from_logit(x.dot(weights), y))
        .sum::<f64>()
        / inputs.len() as f64
}

fn f1_at_half(weights: &[f64], inputs: &[SparseVector], gold: &[bool]) -> f64 {
    let scores: Vec<f64> = inputs.iter().map(|x| sigmoid(x.dot(weights))).collect();
    f1_score(gold, &binarize(&scores, 0.5)).f1
}

/// Trains one output head.
///
/// Epochs are numbered from 1. Training stops after `patience` consecutive
/// epochs without a strict improvement in validation F1, or at `epochs_max`;
/// the returned weights are those of the best epoch (earliest on ties).
pub fn train(train: &[Sample], validation: &[Sample], config: &ModelConfig) -> Result<TrainedModel, ModelError> {
    config.validate()?;
    if train.is_empty() {
        return Err(ModelError::EmptyTrain);
    }
    let gold: Vec<bool> = validation.iter().map(Sample::is_positive).collect();
    let positives = gold.iter().filter(|g| **g).count();
    if positives == 0 || positives == gold.len() {
        return Err(ModelError::SingleClassValidation {
            positives,
            total: gold.len(),
        });
    }

    let stats = FeatureStats::fit(train.iter().map(|s| &s.features));
    let dims = config.hash_dims;
    let encode = |s: &Sample| featurize(&s.text, &s.features, &stats, dims);
    let inputs: Vec<SparseVector> = train.iter().map(encode).collect();
    let validation_inputs: Vec<SparseVector> = validation.iter().map(encode).collect();
    let targets: Vec<f64> = train
        .iter()
        .map(|s| match config.target {
            Target::SoftLabels => s.target,
            Target::HardLabels => f64::from(u8::from(s.is_positive())),
        })
        .collect();

    // Non-bias weights are kept as `scale * raw` so L2 decay is O(1) per
    // step; the bias is never decayed and lives in `bias`.
    let bias_index = dims + FEATURE_COUNT;
    let mut raw = vec![0.0; config.input_dims()];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;
    let mut weights = raw.clone();
    let mut best = weights.clone();
    let mut best_f1 = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut train_loss = Vec::new();
    let mut validation_history = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut gradient: Vec<(usize, f64)> = Vec::new();

    for epoch in 1..=config.epochs_max {
        let lr = config.learning_rate * (1.0 - (epoch - 1) as f64 / config.epochs_max as f64);
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            gradient.clear();
            let inv = 1.0 / batch.len() as f64;
            for &i in batch {
                let x = &inputs[i];
                let z = scale * x.dot(&raw) + bias;
                let residual = sigmoid(z) - targets[i];
                gradient.extend(x.indices.iter().zip(&x.values).map(|(&j, v)| (j, residual * v * inv)));
            }
            scale *= 1.0 - lr * config.l2;
            if scale < 1e-9 {
                raw.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
            for &(j, g) in &gradient {
                if j == bias_index {
                    bias -= lr * g;
                } else {
                    raw[j] -= lr * g / scale;
                }
            }
        }
        for (w, r) in weights.iter_mut().zip(&raw) {
            *w = scale * r;
        }
        weights[bias_index] = bias;

        let loss = mean_loss(&weights, &inputs, &targets);
        if !loss.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(ModelError::Diverged { epoch, loss });
        }
        train_loss.push(loss);
        let f1 = f1_at_half(&weights, &validation_inputs, &gold);
        validation_history.push(f1);
        log::debug!("epoch {epoch}: train loss {loss:.6}, validation F1 {f1:.4}");

        if f1 > best_f1 {
            best_f1 = f1;
            best_epoch = epoch;
            best.copy_from_slice(&weights);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                break;
            }
        }
    }

    Ok(TrainedModel {
        config: config.clone(),
        stats,
        weights: best,
        best_epoch,
        epochs_run: train_loss.len(),
        validation_f1: best_f1,
        train_loss,
        validation_history,
    })
}

/// Scores `samples` with one head per column (1 for binary, 7 for
/// multi-label).
pub fn score_samples(heads: &[TrainedModel], samples: &[Sample], model_id: &str) -> Result<ScoreMatrix, ModelError> {
    let mut seen = HashSet::with_capacity(samples.len());
    for s in samples {
        if !seen.insert(s.id.as_str()) {
            return Err(ModelError::DuplicateId(s.id.clone()));
        }
    }
    let mut scores = Vec::with_capacity(samples.len() * heads.len());
    for s in samples {
        scores.extend(heads.iter().map(|h| h.predict(&s.text, &s.features)));
    }
    Ok(ScoreMatrix::new(
        model_id,
        samples.iter().map(|s| s.id.clone()).collect(),
        heads.len(),
        scores,
    )?)
}

/// Writes a score file for `samples`.
pub fn export_scores<W: Write>(heads: &[TrainedModel], samples: &[Sample], w: W) -> Result<ScoreMatrix, ModelError> {
    let matrix = score_samples(heads, samples, "baseline")?;
    write_score_file(w, &matrix).map_err(|source| ModelError::Io {
        path: PathBuf::from("<writer>"),
        source,
    })?;
    Ok(matrix)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub task: Task,
    pub heads: Vec<TrainedModel>,
}

impl ModelFile {
    pub fn new(task: Task, heads: Vec<TrainedModel>) -> Self {
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            task,
            heads,
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        let mut w = tsv::create(path).map_err(|source| ModelError::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::to_writer(&mut w, self).map_err(|source| ModelError::Json {
            path: path.to_owned(),
            source,
        })?;
        w.flush().map_err(|source| ModelError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let reader = tsv::open(path).map_err(|source| ModelError::Io {
            path: path.to_owned(),
            source,
        })?;
        let file: ModelFile = serde_json::from_reader(reader).map_err(|source| ModelError::Json {
            path: path.to_owned(),
            source,
        })?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(ModelError::Format(format!("{} v{}", file.format, file.version)));
        }
        if file.heads.len() != file.task.columns() {
            return Err(ModelError::Format(format!(
                "{} task needs {} heads, file has {}",
                file.task,
                file.task.columns(),
                file.heads.len()
            )));
        }
        for head in &file.heads {
            if head.weights.len() != head.config.input_dims() {
                return Err(ModelError::Format("weight vector length does not match hash_dims".into()));
            }
        }
        Ok(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::extract_features;
    use proptest::prelude::*;

    fn sample(id: &str, text: &str, target: f64) -> Sample {
        Sample {
            id: id.into(),
            text: text.into(),
            features: extract_features(text),
            target,
        }
    }

    /// Positives contain "zebra", negatives "table"; otherwise the texts share
    /// the same template, so a single weight separates the classes.
    fn toy(offset: usize, n: usize) -> Vec<Sample> {
        let fillers = ["red", "blue", "green", "small", "large"];
        (0..n)
            .map(|i| {
                let positive = i % 2 == 0;
                let word = if positive { "zebra" } else { "table" };
                let text = format!("The {} {word} stood near {} houses.", fillers[i % 5], fillers[(i + offset) % 5]);
                sample(&format!("s{}", i + offset), &text, if positive { 1.0 } else { 0.0 })
            })
            .collect()
    }

    fn small_config() -> ModelConfig {
        ModelConfig {
            hash_dims: 1 << 10,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn config_invariants() {
        assert!(ModelConfig::default().validate().is_ok());
        for bad in [
            ModelConfig { hash_dims: 0, ..ModelConfig::default() },
            ModelConfig { patience: 0, ..ModelConfig::default() },
            ModelConfig { learning_rate: 0.0, ..ModelConfig::default() },
        ] {
            assert!(matches!(bad.validate(), Err(ModelError::Config(_))));
        }
    }

    #[test]
    fn separable_toy_set_reaches_perfect_f1() {
        let model = train(&toy(0, 20), &toy(100, 10), &small_config()).unwrap();
        assert_eq!(model.validation_f1, 1.0);
        assert!(model.weights.iter().all(|w| w.is_finite()));
    }

    #[test]
    fn hard_labels_match_soft_labels_on_endpoints() {
        let soft = train(&toy(0, 20), &toy(100, 10), &small_config()).unwrap();
        let hard_config = ModelConfig {
            target: Target::HardLabels,
            ..small_config()
        };
        let hard = train(&toy(0, 20), &toy(100, 10), &hard_config).unwrap();
        assert_eq!(soft.weights, hard.weights);
        assert_eq!(soft.best_epoch, hard.best_epoch);
    }

    #[test]
    fn constant_validation_f1_with_patience_one_stops_at_epoch_two() {
        // With this learning rate every logit stays within rounding of 0, so
        // all outputs are exactly 0.5 and F1 never changes.
        let config = ModelConfig {
            patience: 1,
            learning_rate: 1e-300,
            ..small_config()
        };
        let model = train(&toy(0, 20), &toy(100, 10), &config).unwrap();
        assert_eq!(model.epochs_run, 2);
        assert_eq!(model.best_epoch, 1);
        assert_eq!(model.validation_history[0], model.validation_history[1]);
    }

    #[test]
    fn best_epoch_has_the_maximum_validation_f1() {
        let model = train(&toy(0, 20), &toy(100, 10), &small_config()).unwrap();
        let max = model.validation_history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(model.validation_history[model.best_epoch - 1], max);
        let first = model.validation_history.iter().position(|f| *f == max).unwrap();
        assert_eq!(first + 1, model.best_epoch);
    }

    #[test]
    fn single_class_validation_is_rejected() {
        let validation: Vec<Sample> = toy(100, 10).into_iter().filter(Sample::is_positive).collect();
        assert!(matches!(
            train(&toy(0, 20), &validation, &small_config()),
            Err(ModelError::SingleClassValidation { .. })
        ));
        assert!(matches!(
            train(&[], &toy(100, 10), &small_config()),
            Err(ModelError::EmptyTrain)
        ));
    }

    #[test]
    fn divergence_names_the_epoch() {
        let config = ModelConfig {
            learning_rate: f64::MAX,
            ..small_config()
        };
        match train(&toy(0, 20), &toy(100, 10), &config) {
            Err(e @ ModelError::Diverged { .. }) => assert!(e.to_string().contains("epoch")),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn training_is_seed_deterministic() {
        let a = train(&toy(0, 20), &toy(100, 10), &small_config()).unwrap();
        let b = train(&toy(0, 20), &toy(100, 10), &small_config()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn full_batch_loss_is_non_increasing_at_small_learning_rate() {
        let config = ModelConfig {
            learning_rate: 0.01,
            batch_size: usize::MAX,
            epochs_max: 30,
            patience: 30,
            ..small_config()
        };
        let model = train(&toy(0, 20), &toy(100, 10), &config).unwrap();
        for pair in model.train_loss.windows(2) {
            assert!(pair[1] <= pair[0], "{:?}", model.train_loss);
        }
    }

    #[test]
    fn zero_weights_predict_one_half() {
        let model = TrainedModel::zeros(small_config(), FeatureStats::fit([&FeatureVector::default()]));
        assert_eq!(model.predict("anything at all", &extract_features("anything at all")), 0.5);
    }

    #[test]
    fn bag_of_words_is_unit_norm() {
        let v = hashed_bag_of_words("the cat saw the Cat", 1 << 12);
        let norm: f64 = v.values.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(hashed_bag_of_words("", 16).indices.is_empty());
    }

    #[test]
    fn export_round_trips_and_is_deterministic() {
        let model = train(&toy(0, 20), &toy(100, 10), &small_config()).unwrap();
        let samples = toy(200, 3);
        let mut first = Vec::new();
        export_scores(std::slice::from_ref(&model), &samples, &mut first).unwrap();
        let mut second = Vec::new();
        export_scores(std::slice::from_ref(&model), &samples, &mut second).unwrap();
        assert_eq!(first, second);
        let parsed = crate::ensemble::read_score_file(first.as_slice(), "m").unwrap();
        assert_eq!(parsed.len(), 3);

        let mut empty = Vec::new();
        export_scores(std::slice::from_ref(&model), &[], &mut empty).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap(), "id\tscore\n");

        let dup = vec![samples[0].clone(), samples[0].clone()];
        assert!(matches!(
            export_scores(std::slice::from_ref(&model), &dup, Vec::new()),
            Err(ModelError::DuplicateId(_))
        ));
    }

    #[test]
    fn model_file_round_trip_predicts_identically() {
        let model = train(&toy(0, 20), &toy(100, 10), &small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        ModelFile::new(Task::Binary, vec![model.clone()]).save(&path).unwrap();
        let loaded = ModelFile::load(&path).unwrap();
        assert_eq!(loaded.heads[0], model);
    }

    proptest! {
        #[test]
        fn predictions_do_not_depend_on_sample_order(seed in any::<u64>()) {
            let model = train(&toy(0, 20), &toy(100, 10), &small_config()).unwrap();
            let samples = toy(300, 8);
            let mut shuffled = samples.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let a = score_samples(std::slice::from_ref(&model), &samples, "m").unwrap();
            let b = score_samples(std::slice::from_ref(&model), &shuffled, "m").unwrap();
            let ai = a.index();
            for (i, id) in b.ids().iter().enumerate() {
                prop_assert_eq!(b.row(i), a.row(ai[id.as_str()]));
            }
        }

        #[test]
        fn bce_gradient_matches_finite_differences(
            w in prop::collection::vec(-1.0f64..1.0, 8),
            x in prop::collection::vec(-1.0f64..1.0, 8),
            y in prop::sample::select(vec![0.0, 0.25, 0.5, 0.75, 1.0]),
        ) {
            let analytic = bce_gradient(&w, &x, y);
            let h = 1e-5;
            let mut diff = 0.0;
            let mut norm = 0.0;
            for j in 0..w.len() {
                let mut plus = w.clone();
                plus[j] += h;
                let mut minus = w.clone();
                minus[j] -= h;
                let numeric = (bce_loss(&plus, &x, y) - bce_loss(&minus, &x, y)) / (2.0 * h);
                diff += (analytic[j] - numeric).powi(2);
                norm += analytic[j].powi(2).max(numeric.powi(2));
            }
            prop_assume!(norm.sqrt() > 1e-6);
            prop_assert!(diff.sqrt() / norm.sqrt() <= 1e-5);
        }
    }
}
