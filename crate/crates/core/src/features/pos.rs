//! Coarse part-of-speech tagging from a bundled lexicon plus suffix rules.
//!
//! Lookup order for a word token:
//! 1. numbers and contractions ending in `n't` are [`PosTag::Other`];
//! 2. the lowercased word (or the part before its apostrophe) in the lexicon;
//! 3. unknown capitalized words that do not start the sentence are nouns;
//! 4. suffix rules; anything left over is a noun.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::tokenize::{Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosTag {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Other,
}

static LEXICON_SOURCE: &str = include_str!("lexicon.tsv");

fn lexicon() -> &'static HashMap<&'static str, PosTag> {
    static LEXICON: OnceLock<HashMap<&'static str, PosTag>> = OnceLock::new();
    LEXICON.get_or_init(|| {
        LEXICON_SOURCE
            .lines()
            .filter(|l| !l.starts_with('#') && !l.is_empty())
            .filter_map(|l| {
                let (word, tag) = l.split_once('\t')?;
                let tag = match tag {
                    "N" => PosTag::Noun,
                    "V" => PosTag::Verb,
                    "J" => PosTag::Adjective,
                    "R" => PosTag::Adverb,
                    _ => PosTag::Other,
                };
                Some((word, tag))
            })
            .collect()
    })
}

/// Number of entries in the bundled lexicon.
pub fn lexicon_len() -> usize {
    lexicon().len()
}

const ADJECTIVE_SUFFIXES: &[&str] = &[
    "ous", "ful", "ive", "able", "ible", "less", "ish", "ical", "ic", "ary", "est",
];
const VERB_SUFFIXES: &[&str] = &["ing", "ed", "ize", "ise", "ify", "ate", "en"];

fn by_suffix(lower: &str) -> PosTag {
    let long_enough = |suffix: &str| lower.len() >= suffix.len() + 2;
    if lower.ends_with("ly") && long_enough("ly") {
        PosTag::Adverb
    } else if ADJECTIVE_SUFFIXES
        .iter()
        .any(|s| lower.ends_with(s) && long_enough(s))
    {
        PosTag::Adjective
    } else if VERB_SUFFIXES
        .iter()
        .any(|s| lower.ends_with(s) && long_enough(s))
    {
        PosTag::Verb
    } else {
        PosTag::Noun
    }
}

fn normalize_apostrophes(word: &str) -> String {
    word.replace('\u{2019}', "'").to_lowercase()
}

fn tag_word(word: &str, sentence_initial: bool) -> PosTag {
    if !word.chars().any(char::is_alphabetic) {
        return PosTag::Other;
    }
    let lower = normalize_apostrophes(word);
    if lower.ends_with("n't") {
        return PosTag::Other;
    }
    let lexicon = lexicon();
    if let Some(tag) = lexicon.get(lower.as_str()) {
        return *tag;
    }
    let head = lower.split('\'').next().unwrap_or(&lower);
    if head != lower {
        if let Some(tag) = lexicon.get(head) {
            return *tag;
        }
    }
    if !sentence_initial && word.chars().next().is_some_and(char::is_uppercase) {
        return PosTag::Noun;
    }
    by_suffix(head)
}

/// Tags the word tokens of one sentence; punctuation tokens get `None`.
pub fn tag_sentence(tokens: &[Token<'_>]) -> Vec<Option<PosTag>> {
    let mut seen_word = false;
    tokens
        .iter()
        .map(|t| match t.kind {
            TokenKind::Punct => None,
            TokenKind::Word => {
                let tag = tag_word(t.text, !seen_word);
                seen_word = true;
                Some(tag)
            }
        })
        .collect()
}
