//! Corpus ingestion and label derivation.
//!
//! The binary corpus assigns each paragraph an annotator label in `0..=4`.
//! That label is kept verbatim as [`OriginalLabel`] and the two derived views
//! are computed from it on demand:
//!
//! * the soft label `label / 4`, used as a probability target during training;
//! * the binary label `label >= 2`, used for evaluation.
//!
//! The category corpus annotates positive paragraphs with one or more of the
//! seven [`Category`] values plus the byte spans that carry each category.

mod auxiliary;
mod category;
mod paragraph;
mod split;

use std::io;
use std::path::PathBuf;

pub use auxiliary::{
    biascorp_score, derive_biascorp_label, derive_sbic_label, BiasCorpRecord, SbicRecord,
    BIASCORP_THRESHOLD, SBIC_THRESHOLD,
};
pub use category::{
    expand_multilabel_with_negatives, parse_category_corpus, read_category_corpus,
    write_category_corpus, Category, CategoryRecord, Span,
};
pub use paragraph::{
    parse_binary_corpus, read_binary_corpus, write_binary_corpus, BinaryCorpus, OriginalLabel,
    Paragraph, ParseOptions,
};
pub use split::{
    make_split, read_split_file, read_split_files, write_split_file, Split, SplitAssignment,
    DEFAULT_SEED, DEFAULT_TEST_FRACTION, DEFAULT_VALIDATION_FRACTION,
};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: expected {expected} tab-separated columns, found {found}")]
    Columns {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("inconsistent corpus: {0}")]
    Consistency(String),
    #[error("invalid split: {0}")]
    Split(String),
    #[error("invalid record: {0}")]
    Record(String),
}

impl CorpusError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.into(),
            source,
        }
    }
}
