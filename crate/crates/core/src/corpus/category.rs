use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Paragraph};
use crate::tsv;

/// The seven PCL categories. The declaration order is the column order used by
/// every label vector and multi-label score file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    UnbalancedPowerRelations,
    ShallowSolution,
    Presupposition,
    AuthorityVoice,
    Metaphor,
    Compassion,
    ThePoorerTheMerrier,
}

impl Category {
    pub const COUNT: usize = 7;

    pub const ALL: [Category; Category::COUNT] = [
        Category::UnbalancedPowerRelations,
        Category::ShallowSolution,
        Category::Presupposition,
        Category::AuthorityVoice,
        Category::Metaphor,
        Category::Compassion,
        Category::ThePoorerTheMerrier,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Category> {
        Category::ALL.get(index).copied()
    }

    /// Human-readable name.
    pub fn name(self) -> &'static str {
        match self {
            Category::UnbalancedPowerRelations => "unbalanced power relations",
            Category::ShallowSolution => "shallow solution",
            Category::Presupposition => "presupposition",
            Category::AuthorityVoice => "authority voice",
            Category::Metaphor => "metaphor",
            Category::Compassion => "compassion",
            Category::ThePoorerTheMerrier => "the poorer the merrier",
        }
    }

    /// Identifier-style name used in table headers.
    pub fn slug(self) -> &'static str {
        match self {
            Category::UnbalancedPowerRelations => "unbalanced_power_relations",
            Category::ShallowSolution => "shallow_solution",
            Category::Presupposition => "presupposition",
            Category::AuthorityVoice => "authority_voice",
            Category::Metaphor => "metaphor",
            Category::Compassion => "compassion",
            Category::ThePoorerTheMerrier => "the_poorer_the_merrier",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    /// Accepts the readable names, the official file spelling
    /// (`Unbalanced_power_relations`, `Metaphors`, `The_poorer_the_merrier`)
    /// and the slugs, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let normalized: String = s
            .trim()
            .to_lowercase()
            .chars()
            .map(|c| if c == '_' || c == '-' { ' ' } else { c })
            .filter(|c| *c != ',')
            .collect::<String>()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        let normalized = match normalized.as_str() {
            "metaphors" => "metaphor",
            "authority voices" => "authority voice",
            "shallow solutions" => "shallow solution",
            other => other,
        };
        Category::ALL
            .into_iter()
            .find(|c| c.name() == normalized)
            .ok_or_else(|| {
                let accepted: Vec<_> = Category::ALL.iter().map(|c| c.name()).collect();
                format!(
                    "unknown category `{}`; accepted: {}",
                    s.trim(),
                    accepted.join(", ")
                )
            })
    }
}

/// A byte range of the paragraph text that carries `category`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub category: Category,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRecord {
    pub paragraph_id: String,
    pub labels: [bool; Category::COUNT],
    pub spans: Vec<Span>,
}

impl CategoryRecord {
    /// The all-false record used for binary-negative paragraphs.
    pub fn negative(paragraph_id: impl Into<String>) -> Self {
        CategoryRecord {
            paragraph_id: paragraph_id.into(),
            labels: [false; Category::COUNT],
            spans: Vec::new(),
        }
    }

    pub fn has(&self, category: Category) -> bool {
        self.labels[category.index()]
    }

    pub fn is_negative(&self) -> bool {
        self.labels.iter().all(|l| !l)
    }

    pub fn categories(&self) -> impl Iterator<Item = Category> + '_ {
        Category::ALL.into_iter().filter(|c| self.has(*c))
    }
}

const CATEGORY_COLUMNS: usize = 10;

/// Parses the category TSV:
/// `id, art_id, text, keyword, country, span_start, span_end, span_text, category, annotators`.
///
/// Rows for the same paragraph merge into one record. Records come back in
/// the order of `paragraphs`.
pub fn parse_category_corpus(
    path: impl AsRef<Path>,
    paragraphs: &[Paragraph],
    skip_lines: usize,
) -> Result<Vec<CategoryRecord>, CorpusError> {
    let path = path.as_ref();
    let reader = tsv::open(path).map_err(|e| CorpusError::io(path, e))?;
    read_category_corpus(reader, paragraphs, skip_lines)
}

pub fn read_category_corpus<R: BufRead>(
    reader: R,
    paragraphs: &[Paragraph],
    skip_lines: usize,
) -> Result<Vec<CategoryRecord>, CorpusError> {
    let by_id: HashMap<&str, (usize, &Paragraph)> = paragraphs
        .iter()
        .enumerate()
        .map(|(i, p)| (p.id.as_str(), (i, p)))
        .collect();
    let mut records: HashMap<usize, CategoryRecord> = HashMap::new();

    for item in tsv::numbered_lines(reader).skip(skip_lines) {
        let (line, row) = item.map_err(|e| CorpusError::io("<reader>", e))?;
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != CATEGORY_COLUMNS {
            return Err(CorpusError::Columns {
                line,
                expected: CATEGORY_COLUMNS,
                found: fields.len(),
            });
        }
        let invalid = |message: String| CorpusError::Invalid { line, message };
        let id = fields[0].trim();
        let (index, paragraph) = *by_id
            .get(id)
            .ok_or_else(|| invalid(format!("paragraph `{id}` is not in the binary corpus")))?;
        let category: Category = fields[8].parse().map_err(invalid)?;
        let parse_offset = |s: &str, what: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| invalid(format!("{what} `{}` is not a byte offset", s.trim())))
        };
        let start = parse_offset(fields[5], "span_start")?;
        let end = parse_offset(fields[6], "span_end")?;
        if start >= end || end > paragraph.text.len() {
            return Err(invalid(format!(
                "span {start}..{end} outside text of length {}",
                paragraph.text.len()
            )));
        }
        if !fields[9].trim().is_empty() && fields[9].trim().parse::<u32>().is_err() {
            return Err(invalid(format!(
                "annotator count `{}` is not an integer",
                fields[9].trim()
            )));
        }

        let record = records
            .entry(index)
            .or_insert_with(|| CategoryRecord::negative(id));
        record.labels[category.index()] = true;
        record.spans.push(Span {
            category,
            start,
            end,
        });
    }

    let mut ordered: Vec<(usize, CategoryRecord)> = records.into_iter().collect();
    ordered.sort_by_key(|(i, _)| *i);
    Ok(ordered.into_iter().map(|(_, r)| r).collect())
}

/// Writes records in the category corpus layout, one row per span. Records
/// without spans produce no rows.
pub fn write_category_corpus<W: std::io::Write>(
    mut w: W,
    records: &[CategoryRecord],
    paragraphs: &[Paragraph],
) -> Result<(), CorpusError> {
    let by_id: HashMap<&str, &Paragraph> =
        paragraphs.iter().map(|p| (p.id.as_str(), p)).collect();
    let io = |e| CorpusError::io("<writer>", e);
    for record in records {
        let p = by_id.get(record.paragraph_id.as_str()).ok_or_else(|| {
            CorpusError::Record(format!("record `{}` has no paragraph", record.paragraph_id))
        })?;
        for span in &record.spans {
            let span_text = p.text.get(span.start..span.end).ok_or_else(|| {
                CorpusError::Record(format!(
                    "span {}..{} is not a valid range of `{}`",
                    span.start, span.end, p.id
                ))
            })?;
            let (start, end) = (span.start.to_string(), span.end.to_string());
            tsv::write_line(
                &mut w,
                &[
                    &p.id,
                    "",
                    &p.text,
                    &p.keyword,
                    &p.country,
                    &start,
                    &end,
                    span_text,
                    span.category.slug(),
                    "1",
                ],
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Adds an all-false record for every binary-negative paragraph.
///
/// The input records are returned unchanged and in their original order,
/// followed by the negatives in corpus order.
pub fn expand_multilabel_with_negatives(
    records: &[CategoryRecord],
    paragraphs: &[Paragraph],
) -> Result<Vec<CategoryRecord>, CorpusError> {
    let by_id: HashMap<&str, &Paragraph> =
        paragraphs.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut covered = HashSet::with_capacity(records.len());
    for record in records {
        let paragraph = by_id.get(record.paragraph_id.as_str()).ok_or_else(|| {
            CorpusError::Consistency(format!(
                "category record `{}` has no paragraph",
                record.paragraph_id
            ))
        })?;
        if !paragraph.binary_label() {
            return Err(CorpusError::Consistency(format!(
                "negative paragraph `{}` already has a category record",
                record.paragraph_id
            )));
        }
        if !covered.insert(record.paragraph_id.as_str()) {
            return Err(CorpusError::Consistency(format!(
                "duplicate category record for `{}`",
                record.paragraph_id
            )));
        }
    }
    if let Some(missing) = paragraphs
        .iter()
        .find(|p| p.binary_label() && !covered.contains(p.id.as_str()))
    {
        return Err(CorpusError::Consistency(format!(
            "positive paragraph `{}` has no category record",
            missing.id
        )));
    }

    let mut out = records.to_vec();
    out.extend(
        paragraphs
            .iter()
            .filter(|p| !p.binary_label())
            .map(|p| CategoryRecord::negative(p.id.clone())),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::OriginalLabel;

    fn paragraph(id: &str, text: &str, label: u8) -> Paragraph {
        Paragraph {
            id: id.into(),
            text: text.into(),
            keyword: "poor-families".into(),
            country: "gb".into(),
            original_label: OriginalLabel::new(label).unwrap(),
        }
    }

    fn row(id: &str, start: usize, end: usize, category: &str) -> String {
        format!("{id}\ta1\ttext\tpoor-families\tgb\t{start}\t{end}\tspan\t{category}\t2\n")
    }

    #[test]
    fn rows_for_one_paragraph_merge() {
        let paragraphs = [paragraph("p1", "they need our help so badly", 3)];
        let input = row("p1", 0, 4, "Compassion") + &row("p1", 5, 9, "Metaphors");
        let records = read_category_corpus(input.as_bytes(), &paragraphs, 0).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert!(r.labels[4] && r.labels[5]);
        assert_eq!(r.labels.iter().filter(|l| **l).count(), 2);
        assert_eq!(r.spans.len(), 2);
    }

    #[test]
    fn authority_voice_is_index_three() {
        let paragraphs = [paragraph("p1", "experts say so", 2)];
        let records =
            read_category_corpus(row("p1", 0, 7, "authority voice").as_bytes(), &paragraphs, 0)
                .unwrap();
        assert!(records[0].labels[3]);
        assert_eq!("Authority_voice".parse::<Category>(), Ok(Category::AuthorityVoice));
        assert_eq!(
            "The_poorer_the_merrier".parse::<Category>(),
            Ok(Category::ThePoorerTheMerrier)
        );
        assert_eq!(
            "Unbalanced_power_relations".parse::<Category>(),
            Ok(Category::UnbalancedPowerRelations)
        );
    }

    #[test]
    fn unknown_category_lists_accepted_names() {
        let paragraphs = [paragraph("p1", "experts say so", 2)];
        let err = read_category_corpus(row("p1", 0, 7, "sarcasm").as_bytes(), &paragraphs, 0)
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sarcasm") && msg.contains("the poorer the merrier"), "{msg}");
    }

    #[test]
    fn span_outside_text_is_rejected() {
        let paragraphs = [paragraph("p1", "short", 2)];
        for (s, e) in [(0, 6), (3, 3), (4, 2)] {
            let err = read_category_corpus(row("p1", s, e, "metaphor").as_bytes(), &paragraphs, 0)
                .unwrap_err();
            assert!(matches!(err, CorpusError::Invalid { line: 1, .. }));
        }
    }

    #[test]
    fn unknown_paragraph_is_rejected() {
        let err = read_category_corpus(row("zz", 0, 1, "metaphor").as_bytes(), &[], 0).unwrap_err();
        assert!(matches!(err, CorpusError::Invalid { .. }));
    }

    #[test]
    fn expansion_adds_one_negative_per_negative_paragraph() {
        let paragraphs = vec![
            paragraph("a", "x", 3),
            paragraph("b", "x", 0),
            paragraph("c", "x", 2),
            paragraph("d", "x", 1),
            paragraph("e", "x", 0),
        ];
        let mut pos_a = CategoryRecord::negative("a");
        pos_a.labels[0] = true;
        let mut pos_c = CategoryRecord::negative("c");
        pos_c.labels[6] = true;
        let records = vec![pos_a.clone(), pos_c.clone()];
        let out = expand_multilabel_with_negatives(&records, &paragraphs).unwrap();
        assert_eq!(out.len(), 5);
        assert_eq!(out.iter().filter(|r| r.is_negative()).count(), 3);
        assert_eq!(&out[..2], &records[..]);
    }

    #[test]
    fn expansion_without_negatives_is_identity() {
        let paragraphs = vec![paragraph("a", "x", 4)];
        let mut r = CategoryRecord::negative("a");
        r.labels[2] = true;
        let out = expand_multilabel_with_negatives(&[r.clone()], &paragraphs).unwrap();
        assert_eq!(out, vec![r]);
    }

    #[test]
    fn record_for_negative_paragraph_is_a_consistency_error() {
        let paragraphs = vec![paragraph("a", "x", 1)];
        let mut r = CategoryRecord::negative("a");
        r.labels[2] = true;
        let err = expand_multilabel_with_negatives(&[r], &paragraphs).unwrap_err();
        assert!(matches!(err, CorpusError::Consistency(_)));
    }
}
