//! Binarization and precision / recall / F1.
//!
//! Degenerate denominators follow the usual evaluation-tool convention:
//! precision is 0 when nothing is predicted positive, recall is 0 when there
//! are no positives, and F1 is 0 when precision + recall is 0.

use serde::{Deserialize, Serialize};

use crate::corpus::Category;

/// `y_out[i] >= threshold`.
pub fn binarize(y_out: &[f64], threshold: f64) -> Vec<bool> {
    y_out.iter().map(|&x| x >= threshold).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
}

impl Confusion {
    pub fn from_predictions(y_true: &[bool], y_pred: &[bool]) -> Self {
        assert_eq!(
            y_true.len(),
            y_pred.len(),
            "y_true and y_pred must have equal lengths"
        );
        let mut c = Confusion::default();
        for (&t, &p) in y_true.iter().zip(y_pred) {
            match (t, p) {
                (true, true) => c.true_positives += 1,
                (false, true) => c.false_positives += 1,
                (true, false) => c.false_negatives += 1,
                (false, false) => c.true_negatives += 1,
            }
        }
        c
    }

    pub fn metrics(&self) -> BinaryMetrics {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(
            self.true_positives,
            self.true_positives + self.false_positives,
        );
        let recall = ratio(
            self.true_positives,
            self.true_positives + self.false_negatives,
        );
        BinaryMetrics::from_precision_recall(precision, recall)
    }
}

/// Harmonic mean `2PR / (P + R)`, 0 when `P + R = 0`.
pub fn harmonic_f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl BinaryMetrics {
    pub fn from_precision_recall(precision: f64, recall: f64) -> Self {
        BinaryMetrics {
            precision,
            recall,
            f1: harmonic_f1(precision, recall),
        }
    }
}

pub fn f1_score(y_true: &[bool], y_pred: &[bool]) -> BinaryMetrics {
    Confusion::from_predictions(y_true, y_pred).metrics()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelMetrics {
    /// One entry per category, in [`Category::ALL`] order.
    pub per_category: Vec<BinaryMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

impl MultiLabelMetrics {
    pub fn from_per_category(per_category: Vec<BinaryMetrics>) -> Self {
        assert_eq!(per_category.len(), Category::COUNT);
        let mean = |f: fn(&BinaryMetrics) -> f64| {
            per_category.iter().map(f).sum::<f64>() / per_category.len() as f64
        };
        MultiLabelMetrics {
            macro_precision: mean(|m| m.precision),
            macro_recall: mean(|m| m.recall),
            macro_f1: macro_f1(&per_category),
            per_category,
        }
    }
}

/// Arithmetic mean of the per-category F1 values. This is not the harmonic
/// mean of the macro precision and macro recall.
pub fn macro_f1(per_category: &[BinaryMetrics]) -> f64 {
    assert_eq!(
        per_category.len(),
        Category::COUNT,
        "macro F1 expects one report per category"
    );
    per_category.iter().map(|m| m.f1).sum::<f64>() / per_category.len() as f64
}

/// Per-category metrics from column-major label and prediction vectors.
pub fn multilabel_metrics(y_true: &[Vec<bool>], y_pred: &[Vec<bool>]) -> MultiLabelMetrics {
    assert_eq!(y_true.len(), Category::COUNT);
    assert_eq!(y_pred.len(), Category::COUNT);
    MultiLabelMetrics::from_per_category(
        y_true
            .iter()
            .zip(y_pred)
            .map(|(t, p)| f1_score(t, p))
            .collect(),
    )
}

/// Either kind of report, as rendered in metric tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricsReport {
    Binary(BinaryMetrics),
    MultiLabel(MultiLabelMetrics),
}
