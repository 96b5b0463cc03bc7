use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Paragraph};
use crate::tsv;

pub const DEFAULT_SEED: u64 = 221;
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;
pub const DEFAULT_VALIDATION_FRACTION: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "validation" | "val" | "dev" | "valid" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

/// Disjoint train/validation/test id lists. Each list keeps corpus order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub train_ids: Vec<String>,
    pub validation_ids: Vec<String>,
    pub test_ids: Vec<String>,
    /// `None` when the assignment came from a split file.
    pub seed: Option<u64>,
}

impl SplitAssignment {
    pub fn ids(&self, split: Split) -> &[String] {
        match split {
            Split::Train => &self.train_ids,
            Split::Validation => &self.validation_ids,
            Split::Test => &self.test_ids,
        }
    }

    pub fn lookup(&self) -> HashMap<&str, Split> {
        let mut map = HashMap::new();
        for split in [Split::Train, Split::Validation, Split::Test] {
            for id in self.ids(split) {
                map.insert(id.as_str(), split);
            }
        }
        map
    }

    /// Checks that the three lists partition exactly the ids of `paragraphs`,
    /// and reorders each list to corpus order.
    pub fn align_to(mut self, paragraphs: &[Paragraph]) -> Result<Self, CorpusError> {
        let mut seen: HashMap<&str, Split> = HashMap::new();
        for split in [Split::Train, Split::Validation, Split::Test] {
            for id in self.ids(split) {
                if let Some(prev) = seen.insert(id.as_str(), split) {
                    return Err(CorpusError::Split(format!(
                        "id `{id}` assigned to both {prev} and {split}"
                    )));
                }
            }
        }
        let corpus: HashSet<&str> = paragraphs.iter().map(|p| p.id.as_str()).collect();
        if let Some(id) = seen.keys().find(|id| !corpus.contains(*id)) {
            return Err(CorpusError::Split(format!("id `{id}` is not in the corpus")));
        }
        if let Some(p) = paragraphs.iter().find(|p| !seen.contains_key(p.id.as_str())) {
            return Err(CorpusError::Split(format!(
                "corpus id `{}` has no split assignment",
                p.id
            )));
        }
        let mut train = Vec::new();
        let mut validation = Vec::new();
        let mut test = Vec::new();
        for p in paragraphs {
            match seen[p.id.as_str()] {
                Split::Train => train.push(p.id.clone()),
                Split::Validation => validation.push(p.id.clone()),
                Split::Test => test.push(p.id.clone()),
            }
        }
        self.train_ids = train;
        self.validation_ids = validation;
        self.test_ids = test;
        Ok(self)
    }
}

fn check_fraction(name: &str, value: f64) -> Result<(), CorpusError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(CorpusError::Split(format!(
            "{name} must lie strictly between 0 and 1, got {value}"
        )))
    }
}

/// Seeded uniform split.
///
/// The test set takes `round(N * test_fraction)` ids and the validation set
/// `round((N - test) * validation_fraction)` of the remainder. The shuffle is
/// a ChaCha8 stream seeded with `seed`, so the result depends only on the seed
/// and the corpus order.
pub fn make_split(
    paragraphs: &[Paragraph],
    seed: u64,
    test_fraction: f64,
    validation_fraction: f64,
) -> Result<SplitAssignment, CorpusError> {
    check_fraction("test fraction", test_fraction)?;
    check_fraction("validation fraction", validation_fraction)?;
    let composed = test_fraction + validation_fraction * (1.0 - test_fraction);
    if composed >= 1.0 {
        return Err(CorpusError::Split(format!(
            "test and validation fractions leave no training data ({composed})"
        )));
    }

    let n = paragraphs.len();
    let test_n = (n as f64 * test_fraction).round() as usize;
    let validation_n = ((n - test_n) as f64 * validation_fraction).round() as usize;

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut assignment = vec![Split::Train; n];
    for &i in &order[..test_n] {
        assignment[i] = Split::Test;
    }
    for &i in &order[test_n..test_n + validation_n] {
        assignment[i] = Split::Validation;
    }

    let mut split = SplitAssignment {
        train_ids: Vec::with_capacity(n - test_n - validation_n),
        validation_ids: Vec::with_capacity(validation_n),
        test_ids: Vec::with_capacity(test_n),
        seed: Some(seed),
    };
    for (p, s) in paragraphs.iter().zip(assignment) {
        match s {
            Split::Train => split.train_ids.push(p.id.clone()),
            Split::Validation => split.validation_ids.push(p.id.clone()),
            Split::Test => split.test_ids.push(p.id.clone()),
        }
    }
    Ok(split)
}

/// Reads a two-column `id<TAB>split` file. A leading `id<TAB>split` header is skipped.
pub fn read_split_file(path: impl AsRef<Path>) -> Result<SplitAssignment, CorpusError> {
    let path = path.as_ref();
    let reader = tsv::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut split = SplitAssignment {
        train_ids: Vec::new(),
        validation_ids: Vec::new(),
        test_ids: Vec::new(),
        seed: None,
    };
    for item in tsv::numbered_lines(reader) {
        let (line, row) = item.map_err(|e| CorpusError::io(path, e))?;
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != 2 {
            return Err(CorpusError::Columns {
                line,
                expected: 2,
                found: fields.len(),
            });
        }
        if line == 1 && fields[0].trim() == "id" && fields[1].trim() == "split" {
            continue;
        }
        let which: Split = fields[1]
            .parse()
            .map_err(|message| CorpusError::Invalid { line, message })?;
        let id = fields[0].trim().to_owned();
        match which {
            Split::Train => split.train_ids.push(id),
            Split::Validation => split.validation_ids.push(id),
            Split::Test => split.test_ids.push(id),
        }
    }
    Ok(split)
}

/// Reads three one-id-per-line files.
pub fn read_split_files(
    train: impl AsRef<Path>,
    validation: impl AsRef<Path>,
    test: impl AsRef<Path>,
) -> Result<SplitAssignment, CorpusError> {
    let read_ids = |path: &Path| -> Result<Vec<String>, CorpusError> {
        let reader = tsv::open(path).map_err(|e| CorpusError::io(path, e))?;
        let mut ids = Vec::new();
        for item in tsv::numbered_lines(reader) {
            let (_, row) = item.map_err(|e| CorpusError::io(path, e))?;
            let id = row.trim();
            if !id.is_empty() {
                ids.push(id.to_owned());
            }
        }
        Ok(ids)
    };
    Ok(SplitAssignment {
        train_ids: read_ids(train.as_ref())?,
        validation_ids: read_ids(validation.as_ref())?,
        test_ids: read_ids(test.as_ref())?,
        seed: None,
    })
}

/// Writes the two-column form with an `id<TAB>split` header.
pub fn write_split_file<W: Write>(mut w: W, split: &SplitAssignment) -> std::io::Result<()> {
    tsv::write_line(&mut w, &["id", "split"])?;
    for which in [Split::Train, Split::Validation, Split::Test] {
        let name = which.to_string();
        for id in split.ids(which) {
            tsv::write_line(&mut w, &[id, &name])?;
        }
    }
    w.flush()
}
