use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::corpus::Category;

/// A gold-labelled sample for error analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldSample {
    pub id: String,
    pub text: String,
    pub label: bool,
    /// Categories present in a positive sample; empty when unknown.
    pub categories: Vec<Category>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bucket {
    BothCorrect,
    SystemFixed,
    SystemBroke,
    BothWrong,
}

impl Bucket {
    pub const ALL: [Bucket; 4] = [
        Bucket::BothCorrect,
        Bucket::SystemFixed,
        Bucket::SystemBroke,
        Bucket::BothWrong,
    ];

    pub fn classify(gold: bool, baseline: bool, system: bool) -> Bucket {
        match (baseline == gold, system == gold) {
            (true, true) => Bucket::BothCorrect,
            (false, true) => Bucket::SystemFixed,
            (true, false) => Bucket::SystemBroke,
            (false, false) => Bucket::BothWrong,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Bucket::BothCorrect => "both-correct",
            Bucket::SystemFixed => "system-fixed",
            Bucket::SystemBroke => "system-broke",
            Bucket::BothWrong => "both-wrong",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The kind of mistake made by whichever system is wrong. With binary labels
/// it depends only on the gold label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    FalsePositive,
    FalseNegative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorAnalysisRow {
    pub id: String,
    pub text: String,
    pub gold: bool,
    pub baseline: bool,
    pub system: bool,
    pub categories: Vec<Category>,
    pub bucket: Bucket,
    /// `None` for [`Bucket::BothCorrect`].
    pub kind: Option<ErrorKind>,
}

fn index_predictions<'a>(name: &str, preds: &'a [(String, bool)], gold: &[GoldSample]) -> Result<HashMap<&'a str, bool>, ReportError> {
    let mut map = HashMap::with_capacity(preds.len());
    for (id, p) in preds {
        if map.insert(id.as_str(), *p).is_some() {
            return Err(ReportError::Misaligned(format!("{name} predicts `{id}` twice")));
        }
    }
    if map.len() != gold.len() {
        return Err(ReportError::Misaligned(format!(
            "{name} has {} predictions for {} gold samples",
            map.len(),
            gold.len()
        )));
    }
    Ok(map)
}

/// Buckets every gold sample by whether each system got it right. Both
/// prediction lists must cover exactly the gold ids (in any order).
pub fn compare_systems(
    gold: &[GoldSample],
    baseline: &[(String, bool)],
    system: &[(String, bool)],
) -> Result<Vec<ErrorAnalysisRow>, ReportError> {
    let base = index_predictions("baseline", baseline, gold)?;
    let sys = index_predictions("system", system, gold)?;
    gold.iter()
        .map(|g| {
            let lookup = |name: &str, map: &HashMap<&str, bool>| {
                map.get(g.id.as_str())
                    .copied()
                    .ok_or_else(|| ReportError::Misaligned(format!("{name} has no prediction for `{}`", g.id)))
            };
            let b = lookup("baseline", &base)?;
            let s = lookup("system", &sys)?;
            let bucket = Bucket::classify(g.label, b, s);
            let kind = (bucket != Bucket::BothCorrect).then_some(if g.label {
                ErrorKind::FalseNegative
            } else {
                ErrorKind::FalsePositive
            });
            Ok(ErrorAnalysisRow {
                id: g.id.clone(),
                text: g.text.clone(),
                gold: g.label,
                baseline: b,
                system: s,
                categories: g.categories.clone(),
                bucket,
                kind,
            })
        })
        .collect()
}

fn cell(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .replace('|', "\\|")
}

/// Markdown listing: bucket counts, then the samples of every error bucket
/// grouped into false positives and false negatives.
pub fn render_error_analysis(rows: &[ErrorAnalysisRow], baseline: &str, system: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Error analysis\n");
    let _ = writeln!(out, "Baseline: `{baseline}`. System: `{system}`.\n");
    let _ = writeln!(out, "| bucket | false positives | false negatives | total |");
    let _ = writeln!(out, "|---|---:|---:|---:|");
    let count = |b: Bucket, k: Option<ErrorKind>| {
        rows.iter()
            .filter(|r| r.bucket == b && (k.is_none() || r.kind == k))
            .count()
    };
    for b in Bucket::ALL {
        let (fp, fn_) = if b == Bucket::BothCorrect {
            (0, 0)
        } else {
            (count(b, Some(ErrorKind::FalsePositive)), count(b, Some(ErrorKind::FalseNegative)))
        };
        let _ = writeln!(out, "| {b} | {fp} | {fn_} | {} |", count(b, None));
    }
    for b in [Bucket::SystemFixed, Bucket::SystemBroke, Bucket::BothWrong] {
        for (kind, title) in [
            (ErrorKind::FalsePositive, "false positives"),
            (ErrorKind::FalseNegative, "false negatives"),
        ] {
            let selected: Vec<&ErrorAnalysisRow> = rows.iter().filter(|r| r.bucket == b && r.kind == Some(kind)).collect();
            if selected.is_empty() {
                continue;
            }
            let _ = writeln!(out, "\n## {b}: {title}\n");
            let _ = writeln!(out, "| id | categories | text |");
            let _ = writeln!(out, "|---|---|---|");
            for r in selected {
                let categories: Vec<&str> = r.categories.iter().map(|c| c.name()).collect();
                let _ = writeln!(out, "| {} | {} | {} |", cell(&r.id), categories.join(", "), cell(&r.text));
            }
        }
    }
    out
}
