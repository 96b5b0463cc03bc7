//! Exit codes by error category.

use std::process::ExitCode;

use pcl_core::augment::CacheError;
use pcl_core::corpus::CorpusError;
use pcl_core::ensemble::ScoreFileError;
use pcl_core::model::ModelError;
use pcl_core::pipeline::PipelineError;
use pcl_core::report::ReportError;
use pcl_core::threshold::ThresholdError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Anything not classified below.
    Other = 1,
    /// Bad flags or config values, missing inputs.
    Usage = 2,
    /// Malformed or inconsistent input data.
    Data = 3,
    /// Training failed.
    Model = 4,
    /// Filesystem errors.
    Io = 5,
    /// Translation service or cache failures.
    Augment = 6,
    /// A recorded run no longer matches its inputs.
    Integrity = 7,
}

impl Category {
    pub fn hint(self) -> Option<&'static str> {
        match self {
            Category::Usage => Some("check the flags and config keys; `pcl --help` lists them"),
            Category::Data => Some("check that the input files use the documented TSV layouts"),
            Category::Model => Some("try a smaller --learning-rate or check the split's class balance"),
            Category::Augment => Some("set --mt-url or PCL_MT_URL to a reachable translation service"),
            Category::Integrity => Some("an input changed since the run was recorded"),
            Category::Other | Category::Io => None,
        }
    }
}

impl From<Category> for ExitCode {
    fn from(c: Category) -> Self {
        ExitCode::from(c as u8)
    }
}

fn classify_pipeline(e: &PipelineError) -> Category {
    match e {
        PipelineError::Config(_) | PipelineError::MissingInput(_) => Category::Usage,
        PipelineError::Io { .. } => Category::Io,
        PipelineError::Corpus(e) => classify_corpus(e),
        PipelineError::Scores(e) => classify_scores(e),
        PipelineError::Model(e) => classify_model(e),
        PipelineError::Threshold(_) | PipelineError::Data(_) => Category::Data,
        PipelineError::Report(e) => classify_report(e),
        PipelineError::Augment(_) => Category::Augment,
    }
}

fn classify_corpus(e: &CorpusError) -> Category {
    match e {
        CorpusError::Io { .. } => Category::Io,
        _ => Category::Data,
    }
}

fn classify_scores(e: &ScoreFileError) -> Category {
    match e {
        ScoreFileError::Io { .. } => Category::Io,
        _ => Category::Data,
    }
}

fn classify_model(e: &ModelError) -> Category {
    match e {
        ModelError::Io { .. } => Category::Io,
        ModelError::Config(_) => Category::Usage,
        ModelError::Json { .. } | ModelError::Format(_) | ModelError::Scores(_) | ModelError::DuplicateId(_) => {
            Category::Data
        }
        _ => Category::Model,
    }
}

fn classify_report(e: &ReportError) -> Category {
    match e {
        ReportError::Checksum { .. } => Category::Integrity,
        ReportError::Io { .. } => Category::Io,
        _ => Category::Data,
    }
}

pub fn categorize(err: &anyhow::Error) -> Category {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<PipelineError>() {
            return classify_pipeline(e);
        }
        if let Some(e) = cause.downcast_ref::<CorpusError>() {
            return classify_corpus(e);
        }
        if let Some(e) = cause.downcast_ref::<ScoreFileError>() {
            return classify_scores(e);
        }
        if let Some(e) = cause.downcast_ref::<ModelError>() {
            return classify_model(e);
        }
        if let Some(e) = cause.downcast_ref::<ReportError>() {
            return classify_report(e);
        }
        if cause.downcast_ref::<ThresholdError>().is_some() {
            return Category::Data;
        }
        if cause.downcast_ref::<CacheError>().is_some() {
            return Category::Augment;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return Category::Io;
        }
    }
    Category::Other
}
