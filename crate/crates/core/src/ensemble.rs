//! Score files and mean-probability ensembling.
//!
//! A score file is UTF-8 TSV with a header. Binary files have the columns
//! `id<TAB>score`; multi-label files have `id<TAB>c0<TAB>...<TAB>c6` in
//! [`Category::ALL`] order. Every value is a probability in `[0, 1]`.
//! Producers normalize model outputs (softmax or per-category sigmoid) before
//! writing, so files can be averaged directly.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::Category;
use crate::tsv;

/// Decimal places written for each score.
pub const SCORE_DECIMALS: usize = 9;

#[derive(Debug, thiserror::Error)]
pub enum ScoreFileError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("score file header must be `id<TAB>score` or `id<TAB>c0..c6`, found `{0}`")]
    Header(String),
    #[error("row {row}: expected {expected} columns, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: score `{value}` is not a probability in [0, 1]")]
    Range { row: usize, value: String },
    #[error("row {row}: duplicate id `{id}`")]
    DuplicateId { row: usize, id: String },
    #[error("score matrix: {0}")]
    Shape(String),
    #[error("ensemble needs at least one member")]
    NoMembers,
    #[error("members disagree on column count: {0} vs {1}")]
    ColumnMismatch(usize, usize),
    #[error("member `{model}` does not cover the same ids as `{first}`: {detail}")]
    Misaligned {
        first: String,
        model: String,
        detail: String,
    },
    #[error("members share no ids")]
    NoOverlap,
}

/// Per-sample probabilities from one model, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMatrix {
    model_id: String,
    ids: Vec<String>,
    columns: usize,
    scores: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(
        model_id: impl Into<String>,
        ids: Vec<String>,
        columns: usize,
        scores: Vec<f64>,
    ) -> Result<Self, ScoreFileError> {
        if columns != 1 && columns != Category::COUNT {
            return Err(ScoreFileError::Shape(format!(
                "column count must be 1 or {}, got {columns}",
                Category::COUNT
            )));
        }
        if scores.len() != ids.len() * columns {
            return Err(ScoreFileError::Shape(format!(
                "{} ids x {columns} columns needs {} scores, got {}",
                ids.len(),
                ids.len() * columns,
                scores.len()
            )));
        }
        if let Some(i) = scores.iter().position(|s| !(0.0..=1.0).contains(s)) {
            return Err(ScoreFileError::Range {
                row: i / columns + 1,
                value: scores[i].to_string(),
            });
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for (row, id) in ids.iter().enumerate() {
            if !seen.insert(id.as_str()) {
                return Err(ScoreFileError::DuplicateId {
                    row: row + 1,
                    id: id.clone(),
                });
            }
        }
        Ok(ScoreMatrix {
            model_id: model_id.into(),
            ids,
            columns,
            scores,
        })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.scores[index * self.columns..(index + 1) * self.columns]
    }

    pub fn column(&self, column: usize) -> Vec<f64> {
        self.scores
            .iter()
            .skip(column)
            .step_by(self.columns)
            .copied()
            .collect()
    }

    pub fn index(&self) -> HashMap<&str, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect()
    }

    /// Rows for `ids`, in that order. Unknown ids are an error.
    pub fn select(&self, ids: &[String]) -> Result<ScoreMatrix, ScoreFileError> {
        let index = self.index();
        let mut scores = Vec::with_capacity(ids.len() * self.columns);
        for id in ids {
            let &i = index.get(id.as_str()).ok_or_else(|| ScoreFileError::Misaligned {
                first: "requested ids".into(),
                model: self.model_id.clone(),
                detail: format!("missing id `{id}`"),
            })?;
            scores.extend_from_slice(self.row(i));
        }
        Ok(ScoreMatrix {
            model_id: self.model_id.clone(),
            ids: ids.to_vec(),
            columns: self.columns,
            scores,
        })
    }

    pub fn with_model_id(mut self, model_id: impl Into<String>) -> Self {
        self.model_id = model_id.into();
        self
    }
}

fn header_for(columns: usize) -> Vec<String> {
    let mut header = vec!["id".to_string()];
    if columns == 1 {
        header.push("score".into());
    } else {
        header.extend((0..columns).map(|k| format!("c{k}")));
    }
    header
}

pub fn write_score_file<W: Write>(mut w: W, matrix: &ScoreMatrix) -> std::io::Result<()> {
    writeln!(w, "{}", header_for(matrix.columns).join("\t"))?;
    for (i, id) in matrix.ids.iter().enumerate() {
        write!(w, "{id}")?;
        for s in matrix.row(i) {
            write!(w, "\t{s:.prec$}", prec = SCORE_DECIMALS)?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn save_score_file(path: impl AsRef<Path>, matrix: &ScoreMatrix) -> Result<(), ScoreFileError> {
    let path = path.as_ref();
    let io = |source| ScoreFileError::Io {
        path: path.to_owned(),
        source,
    };
    let w = tsv::create(path).map_err(io)?;
    write_score_file(w, matrix).map_err(io)
}

/// Parses and validates a score file read from `reader`.
///
/// Row numbers in errors are 1-based file lines (the header is line 1).
pub fn read_score_file<R: BufRead>(
    reader: R,
    model_id: impl Into<String>,
) -> Result<ScoreMatrix, ScoreFileError> {
    let io = |source| ScoreFileError::Io {
        path: PathBuf::from("<reader>"),
        source,
    };
    let mut lines = tsv::numbered_lines(reader);
    let header = match lines.next() {
        Some(line) => line.map_err(io)?.1,
        None => return Err(ScoreFileError::Header(String::new())),
    };
    let header_fields: Vec<&str> = header.split('\t').collect();
    let columns = header_fields.len().saturating_sub(1);
    if header_fields.first() != Some(&"id") || (columns != 1 && columns != Category::COUNT) {
        return Err(ScoreFileError::Header(header));
    }

    let mut ids = Vec::new();
    let mut scores = Vec::new();
    let mut seen = HashSet::new();
    for item in lines {
        let (row, line) = item.map_err(io)?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != columns + 1 {
            return Err(ScoreFileError::Ragged {
                row,
                expected: columns + 1,
                found: fields.len(),
            });
        }
        for field in &fields[1..] {
            let value = field
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| (0.0..=1.0).contains(v))
                .ok_or_else(|| ScoreFileError::Range {
                    row,
                    value: field.to_string(),
                })?;
            scores.push(value);
        }
        let id = fields[0].to_owned();
        if !seen.insert(id.clone()) {
            return Err(ScoreFileError::DuplicateId { row, id });
        }
        ids.push(id);
    }
    Ok(ScoreMatrix {
        model_id: model_id.into(),
        ids,
        columns,
        scores,
    })
}

/// Reads and validates a score file; the model id is the file stem.
pub fn validate_score_file(path: impl AsRef<Path>) -> Result<ScoreMatrix, ScoreFileError> {
    let path = path.as_ref();
    let reader = tsv::open(path).map_err(|source| ScoreFileError::Io {
        path: path.to_owned(),
        source,
    })?;
    let model_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    read_score_file(reader, model_id)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    /// Every member must cover exactly the same ids.
    #[default]
    Strict,
    /// Average over the ids shared by all members.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub ids: Vec<String>,
    pub columns: usize,
    pub scores: Vec<f64>,
    pub member_models: Vec<String>,
    /// Ids of the first member left out in lenient mode.
    pub dropped_ids: usize,
}

impl EnsembleResult {
    pub fn into_matrix(self, model_id: impl Into<String>) -> ScoreMatrix {
        ScoreMatrix {
            model_id: model_id.into(),
            ids: self.ids,
            columns: self.columns,
            scores: self.scores,
        }
    }
}

/// Mean of the member values. Values are summed in ascending order so the
/// result does not depend on member order, then clamped to the member range,
/// which the exact mean always lies in.
fn mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let sum: f64 = values.iter().sum();
    let lo = values[0];
    let hi = values[values.len() - 1];
    (sum / values.len() as f64).clamp(lo, hi)
}

/// Unweighted mean probability per id and column. Output ids follow the
/// first member's order.
pub fn average(members: &[ScoreMatrix], alignment: Alignment) -> Result<EnsembleResult, ScoreFileError> {
    let first = members.first().ok_or(ScoreFileError::NoMembers)?;
    for m in &members[1..] {
        if m.columns != first.columns {
            return Err(ScoreFileError::ColumnMismatch(first.columns, m.columns));
        }
    }
    let indexes: Vec<HashMap<&str, usize>> = members.iter().map(ScoreMatrix::index).collect();

    let ids: Vec<&String> = match alignment {
        Alignment::Strict => {
            for (m, index) in members.iter().zip(&indexes).skip(1) {
                let detail = if m.len() != first.len() {
                    Some(format!("{} ids vs {}", m.len(), first.len()))
                } else {
                    first
                        .ids
                        .iter()
                        .find(|id| !index.contains_key(id.as_str()))
                        .map(|id| format!("missing id `{id}`"))
                };
                if let Some(detail) = detail {
                    return Err(ScoreFileError::Misaligned {
                        first: first.model_id.clone(),
                        model: m.model_id.clone(),
                        detail,
                    });
                }
            }
            first.ids.iter().collect()
        }
        Alignment::Lenient => {
            let shared: Vec<&String> = first
                .ids
                .iter()
                .filter(|id| indexes.iter().all(|ix| ix.contains_key(id.as_str())))
                .collect();
            if shared.is_empty() {
                return Err(ScoreFileError::NoOverlap);
            }
            if shared.len() < first.len() || members.iter().any(|m| m.len() != shared.len()) {
                log::warn!(
                    "lenient alignment kept {} shared ids ({} of the first member dropped)",
                    shared.len(),
                    first.len() - shared.len()
                );
            }
            shared
        }
    };

    let columns = first.columns;
    let mut scores = Vec::with_capacity(ids.len() * columns);
    let mut buffer = Vec::with_capacity(members.len());
    for id in &ids {
        let rows: Vec<&[f64]> = members
            .iter()
            .zip(&indexes)
            .map(|(m, ix)| m.row(ix[id.as_str()]))
            .collect();
        for k in 0..columns {
            buffer.clear();
            buffer.extend(rows.iter().map(|r| r[k]));
            scores.push(mean(&mut buffer));
        }
    }
    Ok(EnsembleResult {
        dropped_ids: first.len() - ids.len(),
        ids: ids.into_iter().cloned().collect(),
        columns,
        scores,
        member_models: members.iter().map(|m| m.model_id.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(model: &str, ids: &[&str], scores: &[f64]) -> ScoreMatrix {
        let columns = scores.len() / ids.len().max(1);
        ScoreMatrix::new(
            model,
            ids.iter().map(|s| s.to_string()).collect(),
            columns.max(1),
            scores.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn out_of_range_score_names_its_row() {
        let err = read_score_file("id\tscore\na\t0.5\nb\t1.5\n".as_bytes(), "m").unwrap_err();
        assert!(matches!(err, ScoreFileError::Range { row: 3, .. }), "{err}");
        let err = read_score_file("id\tscore\na\tNaN\n".as_bytes(), "m").unwrap_err();
        assert!(matches!(err, ScoreFileError::Range { row: 2, .. }));
    }

    #[test]
    fn seven_column_file_parses() {
        let body = "id\tc0\tc1\tc2\tc3\tc4\tc5\tc6\nx\t0\t0.1\t0.2\t0.3\t0.4\t0.5\t1\n";
        let m = read_score_file(body.as_bytes(), "m").unwrap();
        assert_eq!(m.columns(), 7);
        assert_eq!(m.row(0)[6], 1.0);
        assert_eq!(m.column(1), [0.1]);
    }

    #[test]
    fn duplicate_and_ragged_rows_are_rejected() {
        let err = read_score_file("id\tscore\na\t0.1\na\t0.2\n".as_bytes(), "m").unwrap_err();
        assert!(matches!(err, ScoreFileError::DuplicateId { row: 3, .. }));
        let err = read_score_file("id\tscore\na\t0.1\t0.3\n".as_bytes(), "m").unwrap_err();
        assert!(matches!(err, ScoreFileError::Ragged { row: 2, .. }));
        assert!(read_score_file("id\tc0\tc1\n".as_bytes(), "m").is_err());
        assert!(read_score_file("".as_bytes(), "m").is_err());
    }

    #[test]
    fn write_read_round_trip_and_header_only() {
        let m = matrix("m", &["a", "b"], &[0.25, 0.125]);
        let mut buf = Vec::new();
        write_score_file(&mut buf, &m).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "id\tscore\na\t0.250000000\nb\t0.125000000\n"
        );
        assert_eq!(read_score_file(buf.as_slice(), "m").unwrap(), m);

        let empty = ScoreMatrix::new("m", vec![], 7, vec![]).unwrap();
        let mut buf = Vec::new();
        write_score_file(&mut buf, &empty).unwrap();
        assert_eq!(buf.iter().filter(|b| **b == b'\n').count(), 1);
    }

    #[test]
    fn mean_examples() {
        let members = [
            matrix("a", &["x"], &[0.2]),
            matrix("b", &["x"], &[0.4]),
            matrix("c", &["x"], &[0.9]),
        ];
        let r = average(&members, Alignment::Strict).unwrap();
        assert!((r.scores[0] - 0.5).abs() < 1e-12);
        assert_eq!(r.member_models, ["a", "b", "c"]);

        let single = matrix("a", &["x", "y"], &[0.3, 0.7]);
        let r = average(std::slice::from_ref(&single), Alignment::Strict).unwrap();
        assert_eq!(r.scores, single.scores());
    }

    #[test]
    fn strict_mode_rejects_mismatched_ids() {
        let a = matrix("a", &["x", "y"], &[0.3, 0.7]);
        let b = matrix("b", &["x", "z"], &[0.3, 0.7]);
        assert!(matches!(
            average(&[a.clone(), b.clone()], Alignment::Strict),
            Err(ScoreFileError::Misaligned { .. })
        ));
        let r = average(&[a, b], Alignment::Lenient).unwrap();
        assert_eq!(r.ids, ["x"]);
        assert_eq!(r.dropped_ids, 1);
    }

    #[test]
    fn strict_mode_reorders_by_first_member() {
        let a = matrix("a", &["x", "y"], &[0.2, 0.6]);
        let b = matrix("b", &["y", "x"], &[0.8, 0.4]);
        let r = average(&[a, b], Alignment::Strict).unwrap();
        assert_eq!(r.ids, ["x", "y"]);
        assert!((r.scores[0] - 0.3).abs() < 1e-12);
        assert!((r.scores[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn lenient_mode_without_overlap_fails() {
        let a = matrix("a", &["x"], &[0.2]);
        let b = matrix("b", &["y"], &[0.2]);
        assert!(matches!(
            average(&[a, b], Alignment::Lenient),
            Err(ScoreFileError::NoOverlap)
        ));
        assert!(matches!(
            average(&[], Alignment::Lenient),
            Err(ScoreFileError::NoMembers)
        ));
    }

    #[test]
    fn column_mismatch_is_rejected() {
        let a = matrix("a", &["x"], &[0.2]);
        let b = ScoreMatrix::new("b", vec!["x".into()], 7, vec![0.1; 7]).unwrap();
        assert!(matches!(
            average(&[a, b], Alignment::Strict),
            Err(ScoreFileError::ColumnMismatch(1, 7))
        ));
    }

    fn members() -> impl Strategy<Value = Vec<ScoreMatrix>> {
        (1usize..6, 1usize..12, prop::sample::select(vec![1usize, 7])).prop_flat_map(|(k, n, columns)| {
            prop::collection::vec(prop::collection::vec(0.0f64..=1.0, n * columns), k).prop_map(
                move |tables| {
                    let ids: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
                    tables
                        .into_iter()
                        .enumerate()
                        .map(|(m, scores)| ScoreMatrix::new(format!("m{m}"), ids.clone(), columns, scores).unwrap())
                        .collect()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn average_is_permutation_invariant(ms in members(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = ms.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = average(&ms, Alignment::Strict).unwrap();
            let b = average(&shuffled, Alignment::Strict).unwrap();
            prop_assert_eq!(a.scores, b.scores);
        }

        #[test]
        fn average_lies_between_member_extremes(ms in members()) {
            let r = average(&ms, Alignment::Strict).unwrap();
            for (i, value) in r.scores.iter().enumerate() {
                let cell: Vec<f64> = ms.iter().map(|m| m.scores()[i]).collect();
                let lo = cell.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = cell.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(lo <= *value && *value <= hi);
            }
        }

        #[test]
        fn averaging_copies_of_one_model_is_identity(ms in members(), k in 1usize..6) {
            let copies = vec![ms[0].clone(); k];
            let r = average(&copies, Alignment::Strict).unwrap();
            prop_assert_eq!(&r.scores[..], ms[0].scores());
        }

        #[test]
        fn two_member_average_is_the_midpoint(
            a in prop::collection::vec(0.0f64..=1.0, 1..30),
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let b: Vec<f64> = a.iter().map(|_| rng.gen_range(0.0..=1.0)).collect();
            let ids: Vec<String> = (0..a.len()).map(|i| i.to_string()).collect();
            let ma = ScoreMatrix::new("a", ids.clone(), 1, a.clone()).unwrap();
            let mb = ScoreMatrix::new("b", ids, 1, b.clone()).unwrap();
            let r = average(&[ma, mb], Alignment::Strict).unwrap();
            for ((x, y), m) in a.iter().zip(&b).zip(&r.scores) {
                prop_assert_eq!(*m, (x + y) / 2.0);
            }
        }
    }
}
