//! Binary label rules for the two intermediate-task corpora.

use super::CorpusError;

/// Weighted scores strictly above this are positive.
pub const BIASCORP_THRESHOLD: f64 = 1.0;
/// Offensiveness at or above this is positive.
pub const SBIC_THRESHOLD: f64 = 0.3;

/// One BiasCorp text with its three annotator ratings (0..=5) and
/// confidences (1..=10).
#[derive(Debug, Clone, PartialEq)]
pub struct BiasCorpRecord {
    pub text: String,
    pub ratings: [f64; 3],
    pub confidences: [f64; 3],
}

impl BiasCorpRecord {
    pub fn new(
        text: impl Into<String>,
        ratings: [f64; 3],
        confidences: [f64; 3],
    ) -> Result<Self, CorpusError> {
        if let Some(r) = ratings.iter().find(|r| !(0.0..=5.0).contains(*r)) {
            return Err(CorpusError::Record(format!("rating {r} outside 0..=5")));
        }
        if let Some(c) = confidences.iter().find(|c| !(1.0..=10.0).contains(*c)) {
            return Err(CorpusError::Record(format!("confidence {c} outside 1..=10")));
        }
        Ok(BiasCorpRecord {
            text: text.into(),
            ratings,
            confidences,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbicRecord {
    pub text: String,
    pub offensiveness: f64,
}

impl SbicRecord {
    pub fn new(text: impl Into<String>, offensiveness: f64) -> Result<Self, CorpusError> {
        if !(0.0..=1.0).contains(&offensiveness) {
            return Err(CorpusError::Record(format!(
                "offensiveness {offensiveness} outside 0..=1"
            )));
        }
        Ok(SbicRecord {
            text: text.into(),
            offensiveness,
        })
    }
}

/// Confidence-weighted mean rating `Σ r·c / Σ c`.
pub fn biascorp_score(record: &BiasCorpRecord) -> Result<f64, CorpusError> {
    let total: f64 = record.confidences.iter().sum();
    if total == 0.0 {
        return Err(CorpusError::Record(
            "all confidences are zero; weighted score undefined".into(),
        ));
    }
    let weighted: f64 = record
        .ratings
        .iter()
        .zip(&record.confidences)
        .map(|(r, c)| r * c)
        .sum();
    Ok(weighted / total)
}

pub fn derive_biascorp_label(record: &BiasCorpRecord) -> Result<bool, CorpusError> {
    Ok(biascorp_score(record)? > BIASCORP_THRESHOLD)
}

pub fn derive_sbic_label(record: &SbicRecord) -> bool {
    record.offensiveness >= SBIC_THRESHOLD
}
