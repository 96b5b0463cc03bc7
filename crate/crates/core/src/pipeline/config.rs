use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::augment::{AugmentOptions, AugmentPolicy, DEFAULT_PIVOT};
use crate::corpus::{DEFAULT_SEED, DEFAULT_TEST_FRACTION, DEFAULT_VALIDATION_FRACTION};
use crate::ensemble::Alignment;
use crate::model::{ModelConfig, Target};
use crate::threshold::ThresholdMode;
use crate::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TranslatorKind {
    #[default]
    Http,
    Identity,
    WordShuffle,
}

/// Flat key/value run configuration, read from TOML. Every key has a
/// default; unknown keys are rejected. Relative paths are resolved against
/// the working directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub task: Task,
    pub seed: u64,
    /// Binary corpus TSV.
    pub corpus: PathBuf,
    pub corpus_skip_lines: usize,
    /// Category corpus TSV; required for the multi-label task.
    pub categories: Option<PathBuf>,
    pub categories_skip_lines: usize,
    /// Two-column `id<TAB>split` file; a seeded split is made when absent.
    pub split_file: Option<PathBuf>,
    pub test_fraction: f64,
    pub validation_fraction: f64,

    pub augment: bool,
    pub augment_policy: AugmentPolicy,
    pub dedup: bool,
    pub pivot: String,
    pub translator: TranslatorKind,
    pub mt_url: Option<String>,
    pub mt_timeout_secs: u64,
    pub mt_retries: usize,
    pub mt_concurrency: usize,
    /// Defaults to `<out>/translation-cache.tsv`.
    pub translation_cache: Option<PathBuf>,

    pub hash_dims: usize,
    pub learning_rate: f64,
    pub epochs_max: usize,
    pub patience: usize,
    pub l2: f64,
    pub batch_size: usize,
    pub target: Target,

    /// Extra ensemble members: validation and test score files, pairwise.
    pub member_validation: Vec<PathBuf>,
    pub member_test: Vec<PathBuf>,
    pub alignment: Alignment,
    pub thresholds: ThresholdMode,

    pub out: PathBuf,
    /// Defaults to `<task>-seed<seed>`.
    pub run_id: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let model = ModelConfig::default();
        let augment = AugmentOptions::default();
        PipelineConfig {
            task: Task::Binary,
            seed: DEFAULT_SEED,
            corpus: PathBuf::from("data/dontpatronizeme_pcl.tsv"),
            corpus_skip_lines: 0,
            categories: None,
            categories_skip_lines: 0,
            split_file: None,
            test_fraction: DEFAULT_TEST_FRACTION,
            validation_fraction: DEFAULT_VALIDATION_FRACTION,
            augment: false,
            augment_policy: augment.policy,
            dedup: augment.dedup,
            pivot: DEFAULT_PIVOT.into(),
            translator: TranslatorKind::Http,
            mt_url: None,
            mt_timeout_secs: 30,
            mt_retries: 2,
            mt_concurrency: augment.concurrency,
            translation_cache: None,
            hash_dims: model.hash_dims,
            learning_rate: model.learning_rate,
            epochs_max: model.epochs_max,
            patience: model.patience,
            l2: model.l2,
            batch_size: model.batch_size,
            target: model.target,
            member_validation: Vec::new(),
            member_test: Vec::new(),
            alignment: Alignment::Strict,
            thresholds: ThresholdMode::Search,
            out: PathBuf::from("runs"),
            run_id: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        toml::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_table(&self) -> toml::Table {
        toml::Table::try_from(self).expect("config serializes to a TOML table")
    }

    pub fn from_table(table: toml::Table) -> Result<Self, PipelineError> {
        table.try_into().map_err(|e: toml::de::Error| PipelineError::Config(e.to_string()))
    }

    pub fn run_id(&self) -> String {
        self.run_id
            .clone()
            .unwrap_or_else(|| format!("{}-seed{}", self.task, self.seed))
    }

    pub fn run_dir(&self) -> PathBuf {
        self.out.join(self.run_id())
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            hash_dims: self.hash_dims,
            learning_rate: self.learning_rate,
            epochs_max: self.epochs_max,
            patience: self.patience,
            l2: self.l2,
            seed: self.seed,
            target: self.target,
            batch_size: self.batch_size,
        }
    }

    pub fn augment_options(&self) -> AugmentOptions {
        AugmentOptions {
            policy: self.augment_policy,
            dedup: self.dedup,
            pivot: self.pivot.clone(),
            concurrency: self.mt_concurrency,
        }
    }

    pub fn mt_timeout(&self) -> Duration {
        Duration::from_secs(self.mt_timeout_secs)
    }

    pub fn translation_cache_path(&self) -> PathBuf {
        self.translation_cache
            .clone()
            .unwrap_or_else(|| self.out.join("translation-cache.tsv"))
    }

    /// Checks value ranges and that every referenced input exists.
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.model_config()
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        let mut inputs = vec![&self.corpus];
        inputs.extend(self.categories.as_ref());
        inputs.extend(self.split_file.as_ref());
        inputs.extend(&self.member_validation);
        inputs.extend(&self.member_test);
        if let Some(missing) = inputs.into_iter().find(|p| !p.exists()) {
            return Err(PipelineError::MissingInput(missing.clone()));
        }
        if self.task == Task::Multilabel && self.categories.is_none() {
            return Err(PipelineError::Config(
                "the multilabel task needs `categories` (the category corpus)".into(),
            ));
        }
        if self.member_validation.len() != self.member_test.len() {
            return Err(PipelineError::Config(format!(
                "member_validation has {} files but member_test has {}",
                self.member_validation.len(),
                self.member_test.len()
            )));
        }
        if self.pivot == crate::augment::SOURCE_LANGUAGE {
            return Err(PipelineError::Config("pivot must differ from `en`".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides_parse() {
        let c = PipelineConfig::from_toml_str("").unwrap();
        assert_eq!(c, PipelineConfig::default());
        assert_eq!(c.seed, 221);
        let c = PipelineConfig::from_toml_str(
            "task = \"multilabel\"\nseed = 7\nthresholds = \"preset:paper\"\nalignment = \"lenient\"\n",
        )
        .unwrap();
        assert_eq!(c.task, Task::Multilabel);
        assert_eq!(c.thresholds, ThresholdMode::PresetPaper);
        assert_eq!(c.run_id(), "multilabel-seed7");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            PipelineConfig::from_toml_str("sed = 1\n"),
            Err(PipelineError::Config(_))
        ));
    }

    #[test]
    fn table_round_trip() {
        let c = PipelineConfig {
            categories: Some("c.tsv".into()),
            thresholds: ThresholdMode::Values(vec![0.25, 0.5]),
            ..PipelineConfig::default()
        };
        assert_eq!(PipelineConfig::from_table(c.to_table()).unwrap(), c);
    }

    #[test]
    fn validation_reports_missing_inputs() {
        let c = PipelineConfig {
            corpus: "definitely/not/here.tsv".into(),
            ..PipelineConfig::default()
        };
        assert!(matches!(c.validate(), Err(PipelineError::MissingInput(_))));
    }
}
