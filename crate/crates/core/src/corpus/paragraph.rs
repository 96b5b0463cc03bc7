use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::tsv;

/// Annotator label in `0..=4`; 0 means no PCL, 4 highly patronizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct OriginalLabel(u8);

impl OriginalLabel {
    pub const MAX: u8 = 4;

    pub fn new(value: u8) -> Option<Self> {
        (value <= Self::MAX).then_some(OriginalLabel(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// `label / 4`, so 0, 0.25, 0.5, 0.75 or 1.0.
    pub fn soft_label(self) -> f64 {
        f64::from(self.0) / f64::from(Self::MAX)
    }

    /// Labels 2 and above count as PCL.
    pub fn binary_label(self) -> bool {
        self.0 >= 2
    }
}

impl TryFrom<u8> for OriginalLabel {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        OriginalLabel::new(value).ok_or_else(|| format!("label {value} outside 0..=4"))
    }
}

impl From<OriginalLabel> for u8 {
    fn from(label: OriginalLabel) -> u8 {
        label.0
    }
}

impl fmt::Display for OriginalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub id: String,
    pub text: String,
    pub keyword: String,
    pub country: String,
    pub original_label: OriginalLabel,
}

impl Paragraph {
    pub fn soft_label(&self) -> f64 {
        self.original_label.soft_label()
    }

    pub fn binary_label(&self) -> bool {
        self.original_label.binary_label()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Leading lines to skip (header or disclaimer lines).
    pub skip_lines: usize,
}

#[derive(Debug, Clone, Default)]
pub struct BinaryCorpus {
    pub paragraphs: Vec<Paragraph>,
    /// Rows dropped because their text was empty after trimming.
    pub dropped_empty: usize,
}

const BINARY_COLUMNS: usize = 6;

/// Parses the binary corpus TSV: `id, art_id, keyword, country, text, label`.
pub fn parse_binary_corpus(
    path: impl AsRef<Path>,
    options: ParseOptions,
) -> Result<BinaryCorpus, CorpusError> {
    let path = path.as_ref();
    let reader = tsv::open(path).map_err(|e| CorpusError::io(path, e))?;
    read_binary_corpus(reader, options).map_err(|e| match e {
        CorpusError::Io { source, .. } => CorpusError::io(path, source),
        other => other,
    })
}

pub fn read_binary_corpus<R: BufRead>(
    reader: R,
    options: ParseOptions,
) -> Result<BinaryCorpus, CorpusError> {
    let mut corpus = BinaryCorpus::default();
    for item in tsv::numbered_lines(reader).skip(options.skip_lines) {
        let (line, row) = item.map_err(|e| CorpusError::io("<reader>", e))?;
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != BINARY_COLUMNS {
            return Err(CorpusError::Columns {
                line,
                expected: BINARY_COLUMNS,
                found: fields.len(),
            });
        }
        let label = fields[5]
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(OriginalLabel::new)
            .ok_or_else(|| CorpusError::Invalid {
                line,
                message: format!("label `{}` is not an integer in 0..=4", fields[5].trim()),
            })?;
        let text = fields[4].trim();
        if text.is_empty() {
            corpus.dropped_empty += 1;
            continue;
        }
        corpus.paragraphs.push(Paragraph {
            id: fields[0].trim().to_owned(),
            text: text.to_owned(),
            keyword: fields[2].trim().to_owned(),
            country: fields[3].trim().to_owned(),
            original_label: label,
        });
    }
    if corpus.dropped_empty > 0 {
        log::warn!("dropped {} rows with empty text", corpus.dropped_empty);
    }
    Ok(corpus)
}

/// Writes paragraphs in the binary corpus layout (no header, empty `art_id`).
pub fn write_binary_corpus<W: Write>(mut w: W, paragraphs: &[Paragraph]) -> std::io::Result<()> {
    for p in paragraphs {
        let label = p.original_label.to_string();
        tsv::write_line(
            &mut w,
            &[&p.id, "", &p.keyword, &p.country, &p.text, &label],
        )?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(input: &str) -> Result<BinaryCorpus, CorpusError> {
        read_binary_corpus(input.as_bytes(), ParseOptions::default())
    }

    #[test]
    fn table_row_maps_to_soft_and_binary_labels() {
        let corpus = parse("p1\ta1\thomeless\tgb\tThis wally of an MP ...\t3\n").unwrap();
        let p = &corpus.paragraphs[0];
        assert_eq!(p.keyword, "homeless");
        assert_eq!(p.country, "gb");
        assert_eq!(p.original_label.value(), 3);
        assert_eq!(p.soft_label(), 0.75);
        assert!(p.binary_label());
    }

    #[test]
    fn zero_label_is_negative() {
        let corpus = parse("p1\ta1\timmigrant\tin\tSome text\t0").unwrap();
        assert_eq!(corpus.paragraphs[0].soft_label(), 0.0);
        assert!(!corpus.paragraphs[0].binary_label());
    }

    #[test]
    fn soft_label_mapping_is_exact() {
        let expected = [0.0, 0.25, 0.5, 0.75, 1.0];
        for (v, want) in expected.iter().enumerate() {
            assert_eq!(OriginalLabel::new(v as u8).unwrap().soft_label(), *want);
        }
        assert!(OriginalLabel::new(5).is_none());
    }

    #[test]
    fn wrong_column_count_reports_line() {
        let err = parse("p1\ta\tk\tc\ttext\t1\np2\ta\tk\ttext\t1\n").unwrap_err();
        assert!(matches!(
            err,
            CorpusError::Columns {
                line: 2,
                expected: 6,
                found: 5
            }
        ));
    }

    #[test]
    fn out_of_range_label_is_rejected() {
        let err = parse("p1\ta\tk\tc\ttext\t7\n").unwrap_err();
        assert!(matches!(err, CorpusError::Invalid { line: 1, .. }), "{err}");
    }

    #[test]
    fn empty_text_rows_are_dropped_and_counted() {
        let corpus = parse("p1\ta\tk\tc\t   \t1\np2\ta\tk\tc\tok\t2\n").unwrap();
        assert_eq!(corpus.dropped_empty, 1);
        assert_eq!(corpus.paragraphs.len(), 1);
        assert_eq!(corpus.paragraphs[0].id, "p2");
    }

    #[test]
    fn skip_lines_skips_header() {
        let corpus = read_binary_corpus(
            "par_id\tart_id\tkeyword\tcountry\ttext\tlabel\np1\ta\tk\tc\tt\t4\n".as_bytes(),
            ParseOptions { skip_lines: 1 },
        )
        .unwrap();
        assert_eq!(corpus.paragraphs.len(), 1);
    }

    fn paragraph_strategy() -> impl Strategy<Value = Paragraph> {
        (
            "[a-z0-9]{1,8}",
            "[A-Za-z][A-Za-z ,.!?']{0,40}[A-Za-z.!?]",
            "[a-z-]{1,12}",
            "[a-z]{2}",
            0u8..=4,
        )
            .prop_map(|(id, text, keyword, country, label)| Paragraph {
                id,
                text,
                keyword,
                country,
                original_label: OriginalLabel::new(label).unwrap(),
            })
    }

    proptest! {
        #[test]
        fn write_then_parse_round_trips(paragraphs in prop::collection::vec(paragraph_strategy(), 0..20)) {
            let mut buf = Vec::new();
            write_binary_corpus(&mut buf, &paragraphs).unwrap();
            let parsed = read_binary_corpus(buf.as_slice(), ParseOptions::default()).unwrap();
            prop_assert_eq!(parsed.paragraphs, paragraphs);
        }

        #[test]
        fn binary_label_iff_soft_label_at_least_half(label in 0u8..=4) {
            let l = OriginalLabel::new(label).unwrap();
            prop_assert_eq!(l.binary_label(), l.soft_label() >= 0.5);
        }
    }
}
