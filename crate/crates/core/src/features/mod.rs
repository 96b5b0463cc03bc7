//! The twelve engineered sentence-level features.
//!
//! Feature order: word count, sentence count, `!`, `?` and `,` counts, average
//! word length (characters), average sentence length (words), noun, verb,
//! adjective and adverb counts, stopword count. Averages over an empty
//! denominator are 0.

mod pos;
mod tokenize;

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use pos::{lexicon_len, tag_sentence, PosTag};
pub use tokenize::{split_sentences, tokenize, Token, TokenKind};

use crate::tsv;

pub const FEATURE_COUNT: usize = 12;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "n_words",
    "n_sentences",
    "n_exclamations",
    "n_questions",
    "n_commas",
    "avg_word_length",
    "avg_sentence_length",
    "n_nouns",
    "n_verbs",
    "n_adjectives",
    "n_adverbs",
    "n_stopwords",
];

/// Indices of the dimensions that are plain counts (not averages).
pub const COUNT_FEATURES: [usize; 10] = [0, 1, 2, 3, 4, 7, 8, 9, 10, 11];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn values(&self) -> &[f64; FEATURE_COUNT] {
        &self.0
    }
    pub fn n_words(&self) -> f64 {
        self.0[0]
    }
    pub fn n_sentences(&self) -> f64 {
        self.0[1]
    }
    pub fn n_exclamations(&self) -> f64 {
        self.0[2]
    }
    pub fn n_questions(&self) -> f64 {
        self.0[3]
    }
    pub fn n_commas(&self) -> f64 {
        self.0[4]
    }
    pub fn avg_word_length(&self) -> f64 {
        self.0[5]
    }
    pub fn avg_sentence_length(&self) -> f64 {
        self.0[6]
    }
    pub fn n_nouns(&self) -> f64 {
        self.0[7]
    }
    pub fn n_verbs(&self) -> f64 {
        self.0[8]
    }
    pub fn n_adjectives(&self) -> f64 {
        self.0[9]
    }
    pub fn n_adverbs(&self) -> f64 {
        self.0[10]
    }
    pub fn n_stopwords(&self) -> f64 {
        self.0[11]
    }
}

static STOPWORDS_SOURCE: &str = include_str!("stopwords.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static STOPWORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    STOPWORDS.get_or_init(|| {
        STOPWORDS_SOURCE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect()
    })
}

/// Case-insensitive membership in the bundled stopword list.
pub fn is_stopword(word: &str) -> bool {
    let lower = word.replace('\u{2019}', "'").to_lowercase();
    stopwords().contains(lower.as_str())
}

pub fn extract_features(text: &str) -> FeatureVector {
    let mut n_words = 0usize;
    let mut word_chars = 0usize;
    let mut pos_counts = [0usize; 4];
    let mut n_stopwords = 0usize;

    let sentences = split_sentences(text);
    for range in &sentences {
        let tokens = tokenize(&text[range.clone()]);
        let tags = tag_sentence(&tokens);
        for (token, tag) in tokens.iter().zip(tags) {
            if token.kind != TokenKind::Word {
                continue;
            }
            n_words += 1;
            word_chars += token.text.chars().count();
            if is_stopword(token.text) {
                n_stopwords += 1;
            }
            match tag {
                Some(PosTag::Noun) => pos_counts[0] += 1,
                Some(PosTag::Verb) => pos_counts[1] += 1,
                Some(PosTag::Adjective) => pos_counts[2] += 1,
                Some(PosTag::Adverb) => pos_counts[3] += 1,
                _ => {}
            }
        }
    }

    let count = |c: char| text.chars().filter(|x| *x == c).count() as f64;
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    FeatureVector([
        n_words as f64,
        sentences.len() as f64,
        count('!'),
        count('?'),
        count(','),
        ratio(word_chars, n_words),
        ratio(n_words, sentences.len()),
        pos_counts[0] as f64,
        pos_counts[1] as f64,
        pos_counts[2] as f64,
        pos_counts[3] as f64,
        n_stopwords as f64,
    ])
}

#[derive(Debug, thiserror::Error)]
pub enum FeatureCacheError {
    #[error("feature cache io: {0}")]
    Io(#[from] std::io::Error),
    #[error("feature cache line {line}: {message}")]
    Invalid { line: usize, message: String },
}

/// Writes the feature cache: header, then `id` and the twelve values with six decimals.
pub fn write_feature_cache<'a, W: Write>(
    mut w: W,
    rows: impl IntoIterator<Item = (&'a str, &'a FeatureVector)>,
) -> std::io::Result<()> {
    let mut header = vec!["id"];
    header.extend(FEATURE_NAMES);
    tsv::write_line(&mut w, &header)?;
    for (id, features) in rows {
        write!(w, "{id}")?;
        for v in features.values() {
            write!(w, "\t{v:.6}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn read_feature_cache<R: BufRead>(
    reader: R,
) -> Result<Vec<(String, FeatureVector)>, FeatureCacheError> {
    let mut rows = Vec::new();
    for item in tsv::numbered_lines(reader) {
        let (line, row) = item?;
        let fields: Vec<&str> = row.split('\t').collect();
        if line == 1 {
            if fields.first() != Some(&"id") || fields[1..] != FEATURE_NAMES {
                return Err(FeatureCacheError::Invalid {
                    line,
                    message: "unexpected header".into(),
                });
            }
            continue;
        }
        if row.is_empty() {
            continue;
        }
        if fields.len() != FEATURE_COUNT + 1 {
            return Err(FeatureCacheError::Invalid {
                line,
                message: format!("expected {} columns, found {}", FEATURE_COUNT + 1, fields.len()),
            });
        }
        let mut values = [0.0; FEATURE_COUNT];
        for (slot, field) in values.iter_mut().zip(&fields[1..]) {
            *slot = field.parse().map_err(|_| FeatureCacheError::Invalid {
                line,
                message: format!("`{field}` is not a number"),
            })?;
        }
        rows.push((fields[0].to_owned(), FeatureVector(values)));
    }
    Ok(rows)
}

pub fn load_feature_cache(
    path: impl AsRef<Path>,
) -> Result<Vec<(String, FeatureVector)>, FeatureCacheError> {
    read_feature_cache(tsv::open(path.as_ref())?)
}
