//! Backtranslation augmentation.
//!
//! A paragraph is translated from English into a pivot language and back; the
//! result is a paraphrase that keeps the source's labels. Translation goes
//! through the [`Translator`] trait, implemented by two mocks for tests, a
//! word-shuffling mock that changes text deterministically, and an HTTP
//! client for a real MT service.
//!
//! Results are cached by `(source id, pivot, translator id)` so repeated runs
//! never re-translate. With deduplication enabled, outputs whose
//! whitespace-normalized text already occurs in the input corpus (or earlier in
//! the output) are dropped, and paragraphs that are themselves augmentations
//! are not augmented again. Augmenting a merged corpus a second time is then a
//! no-op for deterministic translators.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::hash::Hasher;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{OriginalLabel, Paragraph};
use crate::tsv;

pub const DEFAULT_PIVOT: &str = "fr";
pub const SOURCE_LANGUAGE: &str = "en";
/// Environment variable holding the MT service URL.
pub const MT_URL_ENV: &str = "PCL_MT_URL";
/// Separates the source id from the pivot in augmented sample ids.
pub const AUGMENTED_ID_MARKER: &str = "#bt-";

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("{0}")]
pub struct TranslateError(pub String);

pub trait Translator: Send + Sync {
    /// Stable identifier recorded in provenance and cache keys.
    fn id(&self) -> &str;

    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, TranslateError>;
}

impl<T: Translator + ?Sized> Translator for &T {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, TranslateError> {
        (**self).translate(text, source, target)
    }
}

/// Returns its input unchanged.
#[derive(Debug, Default, Clone, Copy)]
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn id(&self) -> &str {
        "identity"
    }

    fn translate(&self, text: &str, _: &str, _: &str) -> Result<String, TranslateError> {
        Ok(text.to_owned())
    }
}

/// Reverses the characters on every call, so a round trip is the identity.
#[derive(Debug, Default, Clone, Copy)]
pub struct ReversingTranslator;

impl Translator for ReversingTranslator {
    fn id(&self) -> &str {
        "reverse"
    }

    fn translate(&self, text: &str, _: &str, _: &str) -> Result<String, TranslateError> {
        Ok(text.chars().rev().collect())
    }
}

/// Passes text through into the pivot and shuffles the word order on the
/// way back, seeded by a hash of the text. Texts with at least two distinct
/// words always come back changed.
#[derive(Debug, Default, Clone, Copy)]
pub struct WordShuffleTranslator;

impl Translator for WordShuffleTranslator {
    fn id(&self) -> &str {
        "word-shuffle"
    }

    fn translate(&self, text: &str, _: &str, target: &str) -> Result<String, TranslateError> {
        if target != SOURCE_LANGUAGE {
            return Ok(text.to_owned());
        }
        let words: Vec<&str> = text.split_whitespace().collect();
        let mut hasher = fnv::FnvHasher::default();
        hasher.write(text.as_bytes());
        let mut shuffled = words.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(hasher.finish()));
        if shuffled == words {
            shuffled.rotate_left(1);
        }
        Ok(shuffled.join(" "))
    }
}

/// Counts calls to the wrapped translator.
#[derive(Debug, Default)]
pub struct CountingTranslator<T> {
    inner: T,
    calls: AtomicUsize,
}

impl<T> CountingTranslator<T> {
    pub fn new(inner: T) -> Self {
        CountingTranslator {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<T: Translator> Translator for CountingTranslator<T> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, TranslateError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.translate(text, source, target)
    }
}

/// Client for an MT service speaking the JSON wire contract
/// `POST {"text", "source", "target"}` → `{"text"}`.
#[derive(Debug, Clone)]
pub struct HttpTranslator {
    url: String,
    id: String,
    retries: usize,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct MtRequest<'a> {
    text: &'a str,
    source: &'a str,
    target: &'a str,
}

#[derive(Deserialize)]
struct MtResponse {
    text: String,
}

impl HttpTranslator {
    pub fn new(url: impl Into<String>, timeout: Duration, retries: usize) -> Self {
        let url = url.into();
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpTranslator {
            id: format!("http:{url}"),
            url,
            retries,
            agent,
        }
    }

    /// Uses `PCL_MT_URL` when `url` is `None`.
    pub fn from_env_or(url: Option<String>, timeout: Duration, retries: usize) -> Result<Self, TranslateError> {
        let url = url
            .or_else(|| std::env::var(MT_URL_ENV).ok())
            .filter(|u| !u.is_empty())
            .ok_or_else(|| TranslateError(format!("no MT service URL: pass --mt-url or set {MT_URL_ENV}")))?;
        Ok(Self::new(url, timeout, retries))
    }

    fn attempt(&self, request: &MtRequest<'_>) -> Result<String, (bool, TranslateError)> {
        let mut response = self
            .agent
            .post(&self.url)
            .send_json(request)
            .map_err(|e| (true, TranslateError(format!("request to {} failed: {e}", self.url))))?;
        let status = response.status().as_u16();
        if status != 200 {
            let retryable = status >= 500 || status == 429;
            return Err((retryable, TranslateError(format!("{} returned HTTP {status}", self.url))));
        }
        let body: MtResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| (false, TranslateError(format!("malformed response from {}: {e}", self.url))))?;
        Ok(body.text)
    }
}

impl Translator for HttpTranslator {
    fn id(&self) -> &str {
        &self.id
    }

    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, TranslateError> {
        let request = MtRequest { text, source, target };
        let mut attempt = 0;
        loop {
            match self.attempt(&request) {
                Ok(text) => return Ok(text),
                Err((true, e)) if attempt < self.retries => {
                    attempt += 1;
                    log::warn!("{e}; retry {attempt}/{}", self.retries);
                    std::thread::sleep(Duration::from_millis(50 * attempt as u64));
                }
                Err((_, e)) => return Err(e),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AugmentError {
    #[error("{source_id}: cannot backtranslate empty text")]
    EmptyInput { source_id: String },
    #[error("pivot language must differ from `{SOURCE_LANGUAGE}`")]
    Pivot,
    #[error("{source_id}: translator returned empty text")]
    EmptyOutput { source_id: String },
    #[error("{source_id}: {error}")]
    Translator { source_id: String, error: TranslateError },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedSample {
    pub source_id: String,
    pub text: String,
    pub keyword: String,
    pub country: String,
    pub original_label: OriginalLabel,
    pub pivot: String,
    pub translator_id: String,
}

impl AugmentedSample {
    pub fn id(&self) -> String {
        format!("{}{AUGMENTED_ID_MARKER}{}", self.source_id, self.pivot)
    }

    /// A corpus paragraph carrying the source's labels.
    pub fn to_paragraph(&self) -> Paragraph {
        Paragraph {
            id: self.id(),
            text: self.text.clone(),
            keyword: self.keyword.clone(),
            country: self.country.clone(),
            original_label: self.original_label,
        }
    }

    fn from_source(p: &Paragraph, text: String, pivot: &str, translator_id: &str) -> Self {
        AugmentedSample {
            source_id: p.id.clone(),
            text,
            keyword: p.keyword.clone(),
            country: p.country.clone(),
            original_label: p.original_label,
            pivot: pivot.to_owned(),
            translator_id: translator_id.to_owned(),
        }
    }
}

pub fn is_augmented_id(id: &str) -> bool {
    id.contains(AUGMENTED_ID_MARKER)
}

/// English → `pivot` → English.
pub fn backtranslate(p: &Paragraph, t: &dyn Translator, pivot: &str) -> Result<AugmentedSample, AugmentError> {
    if pivot == SOURCE_LANGUAGE {
        return Err(AugmentError::Pivot);
    }
    if p.text.trim().is_empty() {
        return Err(AugmentError::EmptyInput {
            source_id: p.id.clone(),
        });
    }
    let wrap = |error| AugmentError::Translator {
        source_id: p.id.clone(),
        error,
    };
    let forward = t.translate(&p.text, SOURCE_LANGUAGE, pivot).map_err(wrap)?;
    let back = t.translate(&forward, pivot, SOURCE_LANGUAGE).map_err(wrap)?;
    if back.trim().is_empty() {
        return Err(AugmentError::EmptyOutput {
            source_id: p.id.clone(),
        });
    }
    Ok(AugmentedSample::from_source(p, back, pivot, t.id()))
}

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: expected 4 columns", path.display())]
    Columns { path: PathBuf, line: usize },
}

type CacheKey = (String, String, String);

/// Backtranslation results keyed by `(source id, pivot, translator id)`.
///
/// The file-backed form is an append-only TSV with the columns
/// `source_id, pivot, translator_id, text`; fields are escaped so each entry
/// stays on one line. Later entries win when a key repeats.
#[derive(Debug, Default)]
pub struct TranslationCache {
    entries: Mutex<HashMap<CacheKey, String>>,
    file: Option<(PathBuf, Mutex<BufWriter<File>>)>,
}

impl TranslationCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self, CacheError> {
        let path = path.as_ref().to_owned();
        let io = |source| CacheError::Io {
            path: path.clone(),
            source,
        };
        let mut entries = HashMap::new();
        if path.exists() {
            for item in tsv::numbered_lines(tsv::open(&path).map_err(io)?) {
                let (line, row) = item.map_err(io)?;
                if row.is_empty() {
                    continue;
                }
                let fields: Vec<String> = row.split('\t').map(tsv::unescape).collect();
                let [source_id, pivot, translator_id, text]: [String; 4] = fields
                    .try_into()
                    .map_err(|_| CacheError::Columns {
                        path: path.clone(),
                        line,
                    })?;
                entries.insert((source_id, pivot, translator_id), text);
            }
        } else if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        Ok(TranslationCache {
            entries: Mutex::new(entries),
            file: Some((path, Mutex::new(BufWriter::new(file)))),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, source_id: &str, pivot: &str, translator_id: &str) -> Option<String> {
        self.entries
            .lock()
            .unwrap()
            .get(&(source_id.to_owned(), pivot.to_owned(), translator_id.to_owned()))
            .cloned()
    }

    pub fn insert(&self, source_id: &str, pivot: &str, translator_id: &str, text: &str) -> Result<(), CacheError> {
        if let Some((path, file)) = &self.file {
            let mut w = file.lock().unwrap();
            let fields = [source_id, pivot, translator_id, text].map(tsv::escape);
            writeln!(w, "{}", fields.join("\t"))
                .and_then(|_| w.flush())
                .map_err(|source| CacheError::Io {
                    path: path.clone(),
                    source,
                })?;
        }
        self.entries.lock().unwrap().insert(
            (source_id.to_owned(), pivot.to_owned(), translator_id.to_owned()),
            text.to_owned(),
        );
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AugmentPolicy {
    /// Only paragraphs with a positive binary label.
    #[default]
    PositivesOnly,
    All,
}

impl fmt::Display for AugmentPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AugmentPolicy::PositivesOnly => "positives-only",
            AugmentPolicy::All => "all",
        })
    }
}

impl FromStr for AugmentPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positives-only" | "positives" => Ok(AugmentPolicy::PositivesOnly),
            "all" => Ok(AugmentPolicy::All),
            other => Err(format!("unknown augmentation policy `{other}` (expected positives-only or all)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentOptions {
    pub policy: AugmentPolicy,
    pub dedup: bool,
    pub pivot: String,
    /// Maximum concurrent translations.
    pub concurrency: usize,
}

impl Default for AugmentOptions {
    fn default() -> Self {
        AugmentOptions {
            policy: AugmentPolicy::PositivesOnly,
            dedup: true,
            pivot: DEFAULT_PIVOT.into(),
            concurrency: 4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AugmentReport {
    /// Augmented samples in input order.
    pub samples: Vec<AugmentedSample>,
    pub failures: Vec<AugmentError>,
    /// Outputs dropped as duplicates.
    pub deduplicated: usize,
    pub cache_hits: usize,
    pub translator_calls: usize,
}

fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Backtranslates the paragraphs selected by `options.policy`.
///
/// Per-sample failures are collected in the report; only cache write errors
/// abort the batch.
pub fn augment_corpus(
    paragraphs: &[Paragraph],
    translator: &dyn Translator,
    options: &AugmentOptions,
    cache: &TranslationCache,
) -> Result<AugmentReport, CacheError> {
    let selected: Vec<&Paragraph> = paragraphs
        .iter()
        .filter(|p| options.policy == AugmentPolicy::All || p.binary_label())
        .filter(|p| !(options.dedup && is_augmented_id(&p.id)))
        .collect();

    let calls = AtomicUsize::new(0);
    let hits = AtomicUsize::new(0);
    let counted = CallCounter {
        inner: translator,
        calls: &calls,
    };
    let run = |p: &&Paragraph| -> Result<Result<AugmentedSample, AugmentError>, CacheError> {
        if let Some(text) = cache.get(&p.id, &options.pivot, translator.id()) {
            hits.fetch_add(1, Ordering::SeqCst);
            return Ok(Ok(AugmentedSample::from_source(p, text, &options.pivot, translator.id())));
        }
        match backtranslate(p, &counted, &options.pivot) {
            Ok(sample) => {
                cache.insert(&p.id, &options.pivot, translator.id(), &sample.text)?;
                Ok(Ok(sample))
            }
            Err(e) => Ok(Err(e)),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.concurrency.max(1))
        .build()
        .expect("thread pool");
    let results: Vec<_> = pool.install(|| selected.par_iter().map(run).collect::<Result<Vec<_>, _>>())?;

    let mut report = AugmentReport::default();
    let mut seen: HashSet<String> = if options.dedup {
        paragraphs.iter().map(|p| normalize_whitespace(&p.text)).collect()
    } else {
        HashSet::new()
    };
    for result in results {
        match result {
            Ok(sample) => {
                if options.dedup && !seen.insert(normalize_whitespace(&sample.text)) {
                    report.deduplicated += 1;
                } else {
                    report.samples.push(sample);
                }
            }
            Err(e) => {
                log::warn!("augmentation failed: {e}");
                report.failures.push(e);
            }
        }
    }
    report.cache_hits = hits.into_inner();
    report.translator_calls = calls.into_inner();
    Ok(report)
}

struct CallCounter<'a> {
    inner: &'a dyn Translator,
    calls: &'a AtomicUsize,
}

impl Translator for CallCounter<'_> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn translate(&self, text: &str, source: &str, target: &str) -> Result<String, TranslateError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.translate(text, source, target)
    }
}

/// Writes augmented samples as a binary-corpus TSV (see
/// [`write_binary_corpus`](crate::corpus::write_binary_corpus)).
pub fn write_augmented<W: Write>(w: W, samples: &[AugmentedSample]) -> std::io::Result<()> {
    let paragraphs: Vec<Paragraph> = samples.iter().map(AugmentedSample::to_paragraph).collect();
    crate::corpus::write_binary_corpus(w, &paragraphs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read};
    use std::net::TcpListener;

    fn paragraph(id: &str, text: &str, label: u8) -> Paragraph {
        Paragraph {
            id: id.into(),
            text: text.into(),
            keyword: "homeless".into(),
            country: "gb".into(),
            original_label: OriginalLabel::new(label).unwrap(),
        }
    }

    fn corpus() -> Vec<Paragraph> {
        (0..20)
            .map(|i| {
                let label = if i < 10 { 2 + (i % 3) as u8 } else { (i % 2) as u8 };
                paragraph(&format!("p{i}"), &format!("Families in need number {i} receive help today"), label)
            })
            .collect()
    }

    #[test]
    fn mock_round_trips_are_identity() {
        let p = paragraph("a", "They are poor souls.", 3);
        for t in [&IdentityTranslator as &dyn Translator, &ReversingTranslator] {
            let s = backtranslate(&p, t, "fr").unwrap();
            assert_eq!(s.text, p.text);
            assert_eq!(s.original_label, p.original_label);
            assert_eq!(s.pivot, "fr");
        }
    }

    #[test]
    fn backtranslate_preconditions() {
        let p = paragraph("a", "text", 3);
        assert_eq!(backtranslate(&p, &IdentityTranslator, "en"), Err(AugmentError::Pivot));
        let empty = paragraph("b", "  ", 3);
        assert!(matches!(
            backtranslate(&empty, &IdentityTranslator, "fr"),
            Err(AugmentError::EmptyInput { .. })
        ));
    }

    struct Failing;
    impl Translator for Failing {
        fn id(&self) -> &str {
            "failing"
        }
        fn translate(&self, text: &str, _: &str, _: &str) -> Result<String, TranslateError> {
            if text.contains('7') {
                Err(TranslateError("boom".into()))
            } else {
                Ok(String::new())
            }
        }
    }

    #[test]
    fn failures_are_reported_per_sample() {
        let report = augment_corpus(&corpus(), &Failing, &AugmentOptions::default(), &TranslationCache::in_memory()).unwrap();
        assert!(report.samples.is_empty());
        assert_eq!(report.failures.len(), 10);
        assert!(report.failures.contains(&AugmentError::Translator {
            source_id: "p7".into(),
            error: TranslateError("boom".into())
        }));
        assert!(report.failures.contains(&AugmentError::EmptyOutput { source_id: "p0".into() }));
    }

    #[test]
    fn identity_with_dedup_yields_nothing() {
        let report = augment_corpus(&corpus(), &IdentityTranslator, &AugmentOptions::default(), &TranslationCache::in_memory()).unwrap();
        assert!(report.samples.is_empty());
        assert_eq!(report.deduplicated, 10);
    }

    #[test]
    fn positives_only_shuffle_keeps_labels_and_order() {
        let corpus = corpus();
        let report = augment_corpus(&corpus, &WordShuffleTranslator, &AugmentOptions::default(), &TranslationCache::in_memory()).unwrap();
        assert_eq!(report.samples.len(), 10);
        for (s, p) in report.samples.iter().zip(&corpus[..10]) {
            assert_eq!(s.source_id, p.id);
            assert_eq!(s.original_label, p.original_label);
            assert_ne!(s.text, p.text);
            assert!(s.to_paragraph().binary_label());
        }
        let all = AugmentOptions {
            policy: AugmentPolicy::All,
            ..AugmentOptions::default()
        };
        let report = augment_corpus(&corpus, &WordShuffleTranslator, &all, &TranslationCache::in_memory()).unwrap();
        assert_eq!(report.samples.len(), 20);
    }

    #[test]
    fn cached_second_run_makes_no_calls() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.tsv");
        let translator = CountingTranslator::new(WordShuffleTranslator);
        let first = augment_corpus(&corpus(), &translator, &AugmentOptions::default(), &TranslationCache::open(&path).unwrap()).unwrap();
        assert_eq!(translator.calls(), 20);
        assert_eq!(first.translator_calls, 20);

        let second = augment_corpus(&corpus(), &translator, &AugmentOptions::default(), &TranslationCache::open(&path).unwrap()).unwrap();
        assert_eq!(translator.calls(), 20);
        assert_eq!(second.translator_calls, 0);
        assert_eq!(second.cache_hits, 10);
        assert_eq!(first.samples, second.samples);
    }

    #[test]
    fn cache_escapes_awkward_text() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/cache.tsv");
        let cache = TranslationCache::open(&path).unwrap();
        cache.insert("a", "fr", "t", "line\tone\nline two \\").unwrap();
        drop(cache);
        let cache = TranslationCache::open(&path).unwrap();
        assert_eq!(cache.get("a", "fr", "t").unwrap(), "line\tone\nline two \\");
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn merged_corpus_is_a_fixed_point() {
        let corpus = corpus();
        let cache = TranslationCache::in_memory();
        let first = augment_corpus(&corpus, &WordShuffleTranslator, &AugmentOptions::default(), &cache).unwrap();
        let mut merged = corpus.clone();
        merged.extend(first.samples.iter().map(AugmentedSample::to_paragraph));
        let second = augment_corpus(&merged, &WordShuffleTranslator, &AugmentOptions::default(), &cache).unwrap();
        assert!(second.samples.is_empty());
    }

    /// Serves one JSON response per connection; the first `fail_first`
    /// requests get HTTP 503.
    fn mock_server(fail_first: usize, requests: usize) -> (String, std::thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/translate", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let mut bodies = Vec::new();
            for i in 0..requests {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream);
                let mut length = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        length = v.trim().parse().unwrap();
                    }
                }
                let mut body = vec![0; length];
                reader.read_exact(&mut body).unwrap();
                let body = String::from_utf8(body).unwrap();
                let request: serde_json::Value = serde_json::from_str(&body).unwrap();
                let reply = serde_json::json!({ "text": format!("[{}]{}", request["target"].as_str().unwrap(), request["text"].as_str().unwrap()) }).to_string();
                let response = if i < fail_first {
                    "HTTP/1.1 503 Service Unavailable\r\nContent-Length: 0\r\nConnection: close\r\n\r\n".to_string()
                } else {
                    format!(
                        "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                        reply.len()
                    )
                };
                reader.get_mut().write_all(response.as_bytes()).unwrap();
                bodies.push(body);
            }
            bodies
        });
        (url, handle)
    }

    #[test]
    fn http_translator_follows_the_wire_contract() {
        let (url, server) = mock_server(1, 3);
        let t = HttpTranslator::new(url, Duration::from_secs(5), 2);
        let p = paragraph("a", "Hello there", 3);
        let s = backtranslate(&p, &t, "fr").unwrap();
        assert_eq!(s.text, "[en][fr]Hello there");
        assert!(s.translator_id.starts_with("http:"));
        let bodies = server.join().unwrap();
        let first: serde_json::Value = serde_json::from_str(&bodies[1]).unwrap();
        assert_eq!(first, serde_json::json!({"text": "Hello there", "source": "en", "target": "fr"}));
    }

    #[test]
    fn http_errors_surface_after_retries() {
        let (url, server) = mock_server(2, 2);
        let t = HttpTranslator::new(url, Duration::from_secs(5), 1);
        let err = backtranslate(&paragraph("x", "Hi", 2), &t, "fr").unwrap_err();
        assert!(matches!(err, AugmentError::Translator { ref source_id, .. } if source_id == "x"), "{err}");
        server.join().unwrap();
    }
}
