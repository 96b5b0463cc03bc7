//! Empirical F1 threshold search.
//!
//! Every distinct model output is a candidate threshold. Because the
//! binarized prediction only changes when the threshold crosses an observed
//! score, F1 is piecewise constant between consecutive distinct scores and
//! the candidate set already contains a global maximizer.
//!
//! Candidates are swept from the highest score down while confusion counts
//! are updated incrementally, so the search costs one sort plus a linear pass.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Category;
use crate::metrics::{BinaryMetrics, Confusion};

/// Threshold used when no candidate achieves a positive F1.
pub const FALLBACK_THRESHOLD: f64 = 0.5;

/// Hand-picked binary threshold from the original system.
pub const PRESET_BINARY_THRESHOLD: f64 = 0.32;

/// Hand-picked per-category thresholds from the original system, in
/// [`Category::ALL`] order.
pub const PRESET_MULTILABEL_THRESHOLDS: [f64; Category::COUNT] =
    [0.5, 0.31, 0.49, 0.27, 0.29, 0.21, 0.4];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ThresholdError {
    #[error("y_true has {y_true} entries but y_out has {y_out}")]
    LengthMismatch { y_true: usize, y_out: usize },
    #[error("score {value} at index {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("y_true has no positive samples; F1 is identically 0")]
    NoPositives,
    #[error("expected {expected} thresholds, got {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("invalid threshold mode: {0}")]
    Mode(String),
}

/// Gold labels with the matching model outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScores {
    y_true: Vec<bool>,
    y_out: Vec<f64>,
}

impl LabeledScores {
    pub fn new(y_true: Vec<bool>, y_out: Vec<f64>) -> Result<Self, ThresholdError> {
        if y_true.len() != y_out.len() {
            return Err(ThresholdError::LengthMismatch {
                y_true: y_true.len(),
                y_out: y_out.len(),
            });
        }
        if let Some((index, &value)) = y_out
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(ThresholdError::OutOfRange { index, value });
        }
        Ok(LabeledScores { y_true, y_out })
    }

    pub fn y_true(&self) -> &[bool] {
        &self.y_true
    }

    pub fn y_out(&self) -> &[f64] {
        &self.y_out
    }

    pub fn positives(&self) -> usize {
        self.y_true.iter().filter(|t| **t).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearchResult {
    pub best_threshold: f64,
    pub best_f1: f64,
    /// One point per distinct score, ascending by threshold.
    pub curve: Vec<CurvePoint>,
    /// Set when the fallback threshold was used instead of a searched one.
    pub fallback: bool,
}

/// F1 at every distinct score, ascending by threshold.
pub fn threshold_curve(data: &LabeledScores) -> Vec<CurvePoint> {
    let mut order: Vec<usize> = (0..data.y_out.len()).collect();
    order.sort_by(|&a, &b| data.y_out[b].total_cmp(&data.y_out[a]));

    let positives = data.positives();
    let mut confusion = Confusion {
        true_positives: 0,
        false_positives: 0,
        false_negatives: positives,
        true_negatives: data.y_true.len() - positives,
    };
    let mut curve = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let threshold = data.y_out[order[i]];
        while i < order.len() && data.y_out[order[i]] == threshold {
            if data.y_true[order[i]] {
                confusion.true_positives += 1;
                confusion.false_negatives -= 1;
            } else {
                confusion.false_positives += 1;
                confusion.true_negatives -= 1;
            }
            i += 1;
        }
        let BinaryMetrics {
            precision,
            recall,
            f1,
        } = confusion.metrics();
        curve.push(CurvePoint {
            threshold,
            precision,
            recall,
            f1,
        });
    }
    curve.reverse();
    curve
}

fn best_index(curve: &[CurvePoint]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in curve.iter().enumerate() {
        let better = match best {
            None => true,
            Some(b) => {
                let q = &curve[b];
                p.f1 > q.f1
                    || (p.f1 == q.f1 && p.recall > q.recall)
                    || (p.f1 == q.f1 && p.recall == q.recall && p.threshold < q.threshold)
            }
        };
        if better {
            best = Some(i);
        }
    }
    best.filter(|&b| curve[b].f1 > 0.0)
}

/// Returns the candidate threshold with the highest F1.
///
/// Ties go to the candidate with higher recall, then to the smaller
/// threshold. If no candidate reaches a positive F1 the result carries
/// [`FALLBACK_THRESHOLD`] and `fallback = true`.
pub fn find_best_threshold(data: &LabeledScores) -> Result<ThresholdSearchResult, ThresholdError> {
    if data.positives() == 0 {
        return Err(ThresholdError::NoPositives);
    }
    let curve = threshold_curve(data);
    Ok(match best_index(&curve) {
        Some(i) => ThresholdSearchResult {
            best_threshold: curve[i].threshold,
            best_f1: curve[i].f1,
            curve,
            fallback: false,
        },
        None => ThresholdSearchResult {
            best_threshold: FALLBACK_THRESHOLD,
            best_f1: 0.0,
            curve,
            fallback: true,
        },
    })
}

/// Runs the search independently per category. Categories without a
/// positive sample get [`FALLBACK_THRESHOLD`] with `fallback = true`.
pub fn find_best_thresholds_multilabel(per_category: &[LabeledScores]) -> Vec<ThresholdSearchResult> {
    per_category
        .iter()
        .enumerate()
        .map(|(k, data)| match find_best_threshold(data) {
            Ok(result) => result,
            Err(_) => {
                log::warn!(
                    "category {} has no positive samples; using threshold {FALLBACK_THRESHOLD}",
                    Category::from_index(k).map_or("?", |c| c.name())
                );
                ThresholdSearchResult {
                    best_threshold: FALLBACK_THRESHOLD,
                    best_f1: 0.0,
                    curve: threshold_curve(data),
                    fallback: true,
                }
            }
        })
        .collect()
}

/// Midpoint of the maximal-F1 threshold interval that contains the chosen
/// best threshold.
///
/// The run of consecutive candidates sharing the best F1 covers thresholds in
/// `(previous distinct score, highest candidate in the run]`, with 0 as the
/// lower end when the run reaches the lowest score. Every threshold in that
/// interval yields the same predictions as some candidate in the run, and so
/// does its midpoint.
pub fn mid_of_plateau(result: &ThresholdSearchResult) -> f64 {
    if result.fallback {
        return result.best_threshold;
    }
    let curve = &result.curve;
    let Some(best) = curve
        .iter()
        .position(|p| p.threshold == result.best_threshold)
    else {
        return result.best_threshold;
    };
    let f1 = curve[best].f1;
    let mut lo = best;
    while lo > 0 && curve[lo - 1].f1 == f1 {
        lo -= 1;
    }
    let mut hi = best;
    while hi + 1 < curve.len() && curve[hi + 1].f1 == f1 {
        hi += 1;
    }
    let lower = if lo == 0 { 0.0 } else { curve[lo - 1].threshold };
    (lower + curve[hi].threshold) / 2.0
}

/// How thresholds are chosen for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(into = "String", try_from = "String")]
pub enum ThresholdMode {
    /// Best validation candidate.
    #[default]
    Search,
    /// Midpoint of the best validation plateau.
    MidOfPlateau,
    /// The hand-picked thresholds of the original system.
    PresetPaper,
    /// Fixed values: one for binary, one per category for multi-label.
    Values(Vec<f64>),
}

impl ThresholdMode {
    /// Thresholds for `columns` score columns given validation data per column.
    pub fn choose(
        &self,
        validation: &[LabeledScores],
    ) -> Result<(Vec<f64>, Vec<ThresholdSearchResult>), ThresholdError> {
        let columns = validation.len();
        let searches = find_best_thresholds_multilabel(validation);
        let thresholds = match self {
            ThresholdMode::Search => searches.iter().map(|r| r.best_threshold).collect(),
            ThresholdMode::MidOfPlateau => searches.iter().map(mid_of_plateau).collect(),
            ThresholdMode::PresetPaper => match columns {
                1 => vec![PRESET_BINARY_THRESHOLD],
                Category::COUNT => PRESET_MULTILABEL_THRESHOLDS.to_vec(),
                n => {
                    return Err(ThresholdError::WrongCount {
                        expected: Category::COUNT,
                        found: n,
                    })
                }
            },
            ThresholdMode::Values(values) => {
                if values.len() == columns {
                    values.clone()
                } else if values.len() == 1 {
                    vec![values[0]; columns]
                } else {
                    return Err(ThresholdError::WrongCount {
                        expected: columns,
                        found: values.len(),
                    });
                }
            }
        };
        Ok((thresholds, searches))
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdMode::Search => f.write_str("search"),
            ThresholdMode::MidOfPlateau => f.write_str("mid-of-plateau"),
            ThresholdMode::PresetPaper => f.write_str("preset:paper"),
            ThresholdMode::Values(values) => {
                let joined: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "value:{}", joined.join(","))
            }
        }
    }
}

impl FromStr for ThresholdMode {
    type Err = ThresholdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "search" => Ok(ThresholdMode::Search),
            "mid-of-plateau" => Ok(ThresholdMode::MidOfPlateau),
            "preset:paper" => Ok(ThresholdMode::PresetPaper),
            other => {
                let list = other.strip_prefix("value:").ok_or_else(|| {
                    ThresholdError::Mode(format!(
                        "`{other}` (expected search, mid-of-plateau, preset:paper or value:<list>)"
                    ))
                })?;
                let values = list
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|v| (0.0..=1.0).contains(v))
                            .ok_or_else(|| ThresholdError::Mode(format!("bad threshold `{v}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(ThresholdMode::Values(values))
            }
        }
    }
}

impl From<ThresholdMode> for String {
    fn from(mode: ThresholdMode) -> String {
        mode.to_string()
    }
}

impl TryFrom<String> for ThresholdMode {
    type Error = ThresholdError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{binarize, f1_score};
    use proptest::prelude::*;

    fn scores(y_true: &[u8], y_out: &[f64]) -> LabeledScores {
        LabeledScores::new(y_true.iter().map(|v| *v == 1).collect(), y_out.to_vec()).unwrap()
    }

    #[test]
    fn worked_example_by_enumeration() {
        let data = scores(&[1, 0, 1, 0], &[0.9, 0.8, 0.7, 0.1]);
        let result = find_best_threshold(&data).unwrap();
        assert_eq!(result.best_threshold, 0.7);
        assert!((result.best_f1 - 0.8).abs() < 1e-12);
        let f1s: Vec<f64> = result.curve.iter().map(|p| p.f1).collect();
        let expected = [2.0 / 3.0, 0.8, 0.5, 2.0 / 3.0];
        for (a, b) in f1s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{f1s:?}");
        }
        let thresholds: Vec<f64> = result.curve.iter().map(|p| p.threshold).collect();
        assert_eq!(thresholds, [0.1, 0.7, 0.8, 0.9]);
    }

    #[test]
    fn constant_scores_have_one_candidate() {
        let data = scores(&[1, 0, 0, 1, 0], &[0.6; 5]);
        let result = find_best_threshold(&data).unwrap();
        assert_eq!(result.best_threshold, 0.6);
        assert_eq!(result.curve.len(), 1);
        assert_eq!(result.best_f1, f1_score(data.y_true(), &[true; 5]).f1);
    }

    #[test]
    fn separated_scores_reach_one() {
        let data = scores(&[0, 1, 0, 1, 1], &[0.2, 0.75, 0.3, 0.6, 0.9]);
        let result = find_best_threshold(&data).unwrap();
        assert_eq!(result.best_f1, 1.0);
        assert_eq!(result.best_threshold, 0.6);
    }

    #[test]
    fn no_positives_is_an_error() {
        let data = scores(&[0, 0], &[0.2, 0.4]);
        assert_eq!(find_best_threshold(&data), Err(ThresholdError::NoPositives));
    }

    #[test]
    fn constructor_validates() {
        assert!(LabeledScores::new(vec![true], vec![]).is_err());
        assert!(LabeledScores::new(vec![true], vec![1.2]).is_err());
        assert!(LabeledScores::new(vec![true], vec![f64::NAN]).is_err());
    }

    #[test]
    fn ties_prefer_recall_then_smaller_threshold() {
        // t=0.8 gives P=1,R=0.5 (F1 2/3); t=0.2 gives P=0.5,R=1 (F1 2/3).
        let data = scores(&[1, 0, 0, 1], &[0.8, 0.5, 0.4, 0.2]);
        let result = find_best_threshold(&data).unwrap();
        assert!((result.best_f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(result.best_threshold, 0.2);
    }

    #[test]
    fn multilabel_runs_each_category_independently() {
        let data = scores(&[1, 0, 1, 0], &[0.9, 0.8, 0.7, 0.1]);
        let results = find_best_thresholds_multilabel(&vec![data; 7]);
        assert_eq!(results.len(), 7);
        assert!(results.iter().all(|r| r.best_threshold == 0.7 && !r.fallback));
    }

    #[test]
    fn category_without_positives_falls_back() {
        let mut data = vec![scores(&[1, 0, 1, 0], &[0.9, 0.8, 0.7, 0.1]); 7];
        data[6] = scores(&[0, 0, 0, 0], &[0.9, 0.8, 0.7, 0.1]);
        let results = find_best_thresholds_multilabel(&data);
        assert!(results[6].fallback);
        assert_eq!(results[6].best_threshold, FALLBACK_THRESHOLD);
        assert!(!results[0].fallback);
    }

    #[test]
    fn plateau_midpoint() {
        // Best F1 = 1 for any threshold in (0.3, 0.6].
        let data = scores(&[0, 1, 0, 1, 1], &[0.2, 0.75, 0.3, 0.6, 0.9]);
        let result = find_best_threshold(&data).unwrap();
        assert!((mid_of_plateau(&result) - 0.45).abs() < 1e-12);
        // Plateau spanning several candidates, reaching down to 0.
        let data = scores(&[1, 1, 1], &[0.2, 0.4, 0.6]);
        let result = find_best_threshold(&data).unwrap();
        assert_eq!(result.best_threshold, 0.2);
        assert!((mid_of_plateau(&result) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn preset_thresholds() {
        let data = scores(&[1, 0], &[0.9, 0.1]);
        let (t, _) = ThresholdMode::PresetPaper.choose(&vec![data.clone(); 7]).unwrap();
        assert_eq!(t, [0.5, 0.31, 0.49, 0.27, 0.29, 0.21, 0.4]);
        let (t, _) = ThresholdMode::PresetPaper.choose(&[data]).unwrap();
        assert_eq!(t, [0.32]);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("search".parse(), Ok(ThresholdMode::Search));
        assert_eq!("preset:paper".parse(), Ok(ThresholdMode::PresetPaper));
        assert_eq!("mid-of-plateau".parse(), Ok(ThresholdMode::MidOfPlateau));
        assert_eq!(
            "value:0.3,0.4".parse(),
            Ok(ThresholdMode::Values(vec![0.3, 0.4]))
        );
        assert!("value:1.4".parse::<ThresholdMode>().is_err());
        assert!("best".parse::<ThresholdMode>().is_err());
        let mode = ThresholdMode::Values(vec![0.25]);
        assert_eq!(mode.to_string().parse(), Ok(mode));
    }

    fn instance() -> impl Strategy<Value = LabeledScores> {
        (1usize..=50)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(any::<bool>(), n),
                    prop::collection::vec(0u32..=10_000, n),
                )
            })
            .prop_filter("needs a positive", |(t, _)| t.iter().any(|x| *x))
            .prop_map(|(t, s)| {
                LabeledScores::new(t, s.into_iter().map(|k| k as f64 / 10_000.0).collect())
                    .unwrap()
            })
    }

    proptest! {
        #[test]
        fn curve_matches_direct_evaluation(data in instance()) {
            let result = find_best_threshold(&data).unwrap();
            for p in &result.curve {
                let direct = f1_score(data.y_true(), &binarize(data.y_out(), p.threshold));
                prop_assert_eq!(p.f1, direct.f1);
                prop_assert!((0.0..=1.0).contains(&p.f1));
                prop_assert!(p.f1 <= result.best_f1);
            }
            prop_assert!(result.curve.iter().any(|p| p.threshold == result.best_threshold));
            prop_assert!(result.curve.windows(2).all(|w| w[0].threshold < w[1].threshold));
        }

        #[test]
        fn plateau_midpoint_keeps_best_f1(data in instance()) {
            let result = find_best_threshold(&data).unwrap();
            let mid = mid_of_plateau(&result);
            let f1 = f1_score(data.y_true(), &binarize(data.y_out(), mid)).f1;
            prop_assert_eq!(f1, result.best_f1);
        }

        #[test]
        fn strictly_increasing_transform_keeps_best_f1(data in instance()) {
            let cube = |x: f64| x * x * x;
            let before = find_best_threshold(&data).unwrap();
            let transformed = LabeledScores::new(
                data.y_true().to_vec(),
                data.y_out().iter().map(|x| cube(*x)).collect(),
            ).unwrap();
            let after = find_best_threshold(&transformed).unwrap();
            prop_assert_eq!(before.best_f1, after.best_f1);
            prop_assert_eq!(cube(before.best_threshold), after.best_threshold);
        }
    }
}
