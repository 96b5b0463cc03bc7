//! Seeded synthetic corpora with a planted lexical signal.
//!
//! Every document mixes neutral report-style sentences about one of the
//! corpus keywords. Positive documents additionally contain one or two
//! category marker sentences; each marker phrase is recorded as a span of its
//! category. Negatives never contain a marker, so a bag-of-words model can
//! separate the classes. Positives are labelled 3 with one marker and 4
//! with two; negatives are labelled 0 or 1 at random.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    write_binary_corpus, write_category_corpus, Category, CategoryRecord, CorpusError, OriginalLabel, Paragraph, Span,
};

pub const KEYWORDS: [&str; 10] = [
    "disabled",
    "homeless",
    "hopeless",
    "immigrant",
    "in-need",
    "migrant",
    "poor-families",
    "refugee",
    "vulnerable",
    "women",
];

const COUNTRIES: [&str; 8] = ["gb", "us", "in", "ng", "ke", "au", "ie", "ca"];

const SUBJECTS: [&str; 8] = [
    "The council",
    "Local officials",
    "A new report",
    "The regional office",
    "Researchers",
    "The annual survey",
    "The committee",
    "A spokesperson",
];

const VERBS: [&str; 8] = [
    "reviewed",
    "published",
    "discussed",
    "announced",
    "measured",
    "described",
    "recorded",
    "examined",
];

const OBJECTS: [&str; 8] = [
    "housing figures for",
    "the budget for services used by",
    "new statistics about",
    "transport plans affecting",
    "employment data covering",
    "the schedule of meetings with",
    "a study of",
    "census results for",
];

/// Marker phrase per category, in [`Category::ALL`] order.
pub const MARKERS: [&str; Category::COUNT] = [
    "we generously grant favours to",
    "a single donation will instantly cure",
    "everyone knows how helpless are",
    "as privileged experts we decide for",
    "a shining beacon of hope for",
    "the heartbreaking plight of the poor",
    "they are blessed with happiness despite owning nothing, like",
];

fn keyword_phrase(keyword: &str) -> String {
    match keyword {
        "in-need" => "people in need".into(),
        "poor-families" => "poor families".into(),
        "disabled" | "homeless" | "hopeless" | "vulnerable" => format!("{keyword} people"),
        other => format!("{other}s"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub documents: usize,
    pub positive_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            documents: 200,
            positive_rate: 0.3,
            seed: crate::corpus::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub paragraphs: Vec<Paragraph>,
    /// One record per positive paragraph, in corpus order.
    pub records: Vec<CategoryRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthPaths {
    pub binary: PathBuf,
    pub categories: PathBuf,
}

fn neutral_sentence(rng: &mut ChaCha8Rng, keyword: &str) -> String {
    format!(
        "{} {} {} {} in the district.",
        SUBJECTS.choose(rng).unwrap(),
        VERBS.choose(rng).unwrap(),
        OBJECTS.choose(rng).unwrap(),
        keyword_phrase(keyword)
    )
}

/// Generates `round(documents * positive_rate)` positives, placed at random.
pub fn generate(config: &SynthConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.documents;
    let positives = ((n as f64 * config.positive_rate).round() as usize).min(n);
    let mut is_positive: Vec<bool> = (0..n).map(|i| i < positives).collect();
    is_positive.shuffle(&mut rng);

    let mut paragraphs = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(positives);
    for (i, positive) in is_positive.into_iter().enumerate() {
        let id = format!("syn{:04}", i + 1);
        let keyword = *KEYWORDS.choose(&mut rng).unwrap();
        let country = *COUNTRIES.choose(&mut rng).unwrap();
        let mut text = neutral_sentence(&mut rng, keyword);
        let mut record = CategoryRecord::negative(id.clone());
        let label = if positive {
            let mut categories = Category::ALL.to_vec();
            categories.shuffle(&mut rng);
            let count = rng.gen_range(1..=2);
            categories.truncate(count);
            categories.sort();
            for category in categories {
                text.push(' ');
                let marker = MARKERS[category.index()];
                let start = text.len();
                text.push_str(marker);
                let end = text.len();
                text.push_str(&format!(" {}.", keyword_phrase(keyword)));
                record.labels[category.index()] = true;
                record.spans.push(Span { category, start, end });
            }
            2 + count as u8
        } else {
            rng.gen_range(0..=1)
        };
        for _ in 0..rng.gen_range(1..=2) {
            text.push(' ');
            text.push_str(&neutral_sentence(&mut rng, keyword));
        }
        paragraphs.push(Paragraph {
            id,
            text,
            keyword: keyword.into(),
            country: country.into(),
            original_label: OriginalLabel::new(label).expect("label in range"),
        });
        if positive {
            records.push(record);
        }
    }
    SyntheticCorpus { paragraphs, records }
}

impl SyntheticCorpus {
    /// Writes `dpm.tsv` (binary layout, no header) and `categories.tsv`
    /// (category layout, no header) into `dir`.
    pub fn write(&self, dir: &Path) -> Result<SynthPaths, CorpusError> {
        std::fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
        let paths = SynthPaths {
            binary: dir.join("dpm.tsv"),
            categories: dir.join("categories.tsv"),
        };
        let create = |p: &Path| {
            std::fs::File::create(p)
                .map(std::io::BufWriter::new)
                .map_err(|e| CorpusError::io(p, e))
        };
        write_binary_corpus(create(&paths.binary)?, &self.paragraphs).map_err(|e| CorpusError::io(&paths.binary, e))?;
        write_category_corpus(create(&paths.categories)?, &self.records, &self.paragraphs)?;
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{expand_multilabel_with_negatives, parse_binary_corpus, parse_category_corpus, ParseOptions};

    #[test]
    fn default_corpus_shape() {
        let c = generate(&SynthConfig::default());
        assert_eq!(c.paragraphs.len(), 200);
        assert_eq!(c.paragraphs.iter().filter(|p| p.binary_label()).count(), 60);
        assert_eq!(c.records.len(), 60);
        for r in &c.records {
            let p = c.paragraphs.iter().find(|p| p.id == r.paragraph_id).unwrap();
            for s in &r.spans {
                assert_eq!(&p.text[s.start..s.end], MARKERS[s.category.index()]);
            }
        }
        for p in c.paragraphs.iter().filter(|p| !p.binary_label()) {
            assert!(MARKERS.iter().all(|m| !p.text.contains(m)));
        }
    }

    #[test]
    fn generation_is_seeded() {
        let a = generate(&SynthConfig::default());
        assert_eq!(a, generate(&SynthConfig::default()));
        let other = generate(&SynthConfig {
            seed: 7,
            ..SynthConfig::default()
        });
        assert_ne!(a, other);
    }

    #[test]
    fn written_files_parse_back() {
        let c = generate(&SynthConfig {
            documents: 40,
            ..SynthConfig::default()
        });
        let dir = tempfile::tempdir().unwrap();
        let paths = c.write(dir.path()).unwrap();
        let parsed = parse_binary_corpus(&paths.binary, ParseOptions::default()).unwrap();
        assert_eq!(parsed.paragraphs, c.paragraphs);
        let records = parse_category_corpus(&paths.categories, &parsed.paragraphs, 0).unwrap();
        assert_eq!(records, c.records);
        let expanded = expand_multilabel_with_negatives(&records, &parsed.paragraphs).unwrap();
        assert_eq!(expanded.len(), 40);
    }
}
