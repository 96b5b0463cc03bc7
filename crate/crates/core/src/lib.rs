//! Building blocks for patronizing and condescending language (PCL) detection
//! experiments.
//!
//! The crate covers the whole experiment loop for both the binary subtask and
//! the seven-category multi-label subtask:
//!
//! * [`corpus`]: parsing the competition TSV files, label derivation, seeded
//!   splits and negative expansion of the category data.
//! * [`features`]: the twelve sentence-level features computed per paragraph.
//! * [`augment`]: backtranslation through a pluggable [`augment::Translator`].
//! * [`model`]: a hashed bag-of-words linear baseline trained on soft labels.
//! * [`ensemble`]: score-file validation and mean-probability ensembling.
//! * [`metrics`] and [`threshold`]: F1 arithmetic and the empirical F1
//!   threshold search.
//! * [`report`]: metric tables, threshold curves, error analysis and run
//!   manifests.
//! * [`pipeline`]: the end-to-end driver used by the `pcl` command.
//!
//! The accompanying book (under `book/` in the repository) walks through each
//! stage; its code listings are compiled and run as doctests of this crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub mod augment;
pub mod corpus;
pub mod ensemble;
pub mod features;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod synth;
pub mod threshold;
mod tsv;

pub use corpus::{Category, CategoryRecord, OriginalLabel, Paragraph, SplitAssignment};
pub use ensemble::{EnsembleResult, ScoreMatrix};
pub use features::FeatureVector;
pub use metrics::{BinaryMetrics, MultiLabelMetrics};
pub use threshold::{LabeledScores, ThresholdSearchResult};

/// Which of the two subtasks a run targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    #[default]
    Binary,
    #[serde(alias = "multi-label")]
    Multilabel,
}

impl Task {
    /// Number of score columns the task uses.
    pub fn columns(self) -> usize {
        match self {
            Task::Binary => 1,
            Task::Multilabel => Category::COUNT,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Binary => "binary",
            Task::Multilabel => "multilabel",
        })
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(Task::Binary),
            "multilabel" | "multi-label" => Ok(Task::Multilabel),
            other => Err(format!("unknown task `{other}` (expected binary or multilabel)")),
        }
    }
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/augmentation.md")]
    mod augmentation {}
    #[doc = include_str!("../../../book/src/baseline.md")]
    mod baseline {}
    #[doc = include_str!("../../../book/src/ensemble.md")]
    mod ensemble {}
    #[doc = include_str!("../../../book/src/thresholds.md")]
    mod thresholds {}
    #[doc = include_str!("../../../book/src/reports.md")]
    mod reports {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
