//! Run artifacts: metric tables, threshold curves, error analysis listings
//! and run manifests.
//!
//! Everything is plain text (TSV, Markdown, SVG, TOML). Rendered numbers are
//! rounded from the stored full-precision values at the moment of rendering.

mod analysis;
mod curve;
mod manifest;
mod table;

use std::path::PathBuf;

pub use analysis::{compare_systems, render_error_analysis, Bucket, ErrorAnalysisRow, ErrorKind, GoldSample};
pub use curve::{emit_threshold_curve, render_curve_svg, render_curve_tsv, CurveFiles};
pub use manifest::{sha256_file, FileChecksum, RunManifest, MANIFEST_FILE};
pub use table::{emit_metrics_table, render_metrics_table, percent};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot plot an empty threshold curve")]
    EmptyCurve,
    #[error("predictions are not aligned with the gold ids: {0}")]
    Misaligned(String),
    #[error("manifest {}: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
    #[error("checksum mismatch for {}: manifest has {expected}, file has {actual}", path.display())]
    Checksum {
        path: PathBuf,
        expected: String,
        actual: String,
    },
}

impl ReportError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ReportError::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn write_text(path: &std::path::Path, text: &str) -> Result<(), ReportError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| ReportError::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| ReportError::io(path, e))
}
