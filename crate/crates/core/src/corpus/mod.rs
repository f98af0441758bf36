//! Tweet corpus model, canonical JSON-Lines storage and the synthetic generator.

mod generate;
mod io;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate, template_count, CorpusGenerator};
pub use io::{load, load_with, save, CorpusReader};

/// Latitude-like query and generation domain.
pub const GEO_X_RANGE: (f64, f64) = (15.0, 50.0);
/// Longitude-like query and generation domain.
pub const GEO_Y_RANGE: (f64, f64) = (-124.0, 120.0);
/// Generated ages are uniform over this closed range.
pub const AGE_RANGE: (u32, u32) = (13, 90);

/// First second of the date domain: 2015-09-17 20:41:35 UTC.
pub fn date_min() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2015, 9, 17, 20, 41, 35).unwrap()
}

/// Last second of the date domain: 2015-09-19 04:05:45 UTC.
pub fn date_max() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2015, 9, 19, 4, 5, 45).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Male, Gender::Female];

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "male" => Ok(Gender::Male),
            "female" => Ok(Gender::Female),
            other => Err(Error::invalid(format!("unknown gender `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Author {
    pub author_id: u64,
    pub first_name: String,
    pub last_name: String,
    pub age: u32,
    pub gender: Gender,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub x: f64,
    pub y: f64,
}

/// One term of a document: occurrence count `f(t,d)` and augmented `TF(t,d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabularyEntry {
    pub tf: f64,
    pub count: u64,
    pub word: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TweetRecord {
    pub id: u64,
    pub raw_text: String,
    pub clean_text: String,
    pub lemma_text: String,
    pub author: Author,
    pub geo: GeoPoint,
    pub date: DateTime<Utc>,
    pub lemma_text_length: u64,
    pub words: Vec<VocabularyEntry>,
}

impl TweetRecord {
    /// Checks the per-record invariants.
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Err(Error::Validation { id: self.id, message });
        let mut seen = HashSet::with_capacity(self.words.len());
        let mut total = 0u64;
        for entry in &self.words {
            if entry.count == 0 {
                return fail(format!("word `{}` has count 0", entry.word));
            }
            if !(entry.tf > 0.0 && entry.tf <= 1.0) {
                return fail(format!("word `{}` has tf {} outside (0, 1]", entry.word, entry.tf));
            }
            if entry.word.is_empty() {
                return fail("empty word in vocabulary".into());
            }
            if !seen.insert(entry.word.as_str()) {
                return fail(format!("word `{}` listed twice", entry.word));
            }
            total += entry.count;
        }
        if total != self.lemma_text_length {
            return fail(format!(
                "lemmaTextLength {} differs from the sum of word counts {}",
                self.lemma_text_length, total
            ));
        }
        if !self.geo.x.is_finite() || !self.geo.y.is_finite() {
            return fail("non-finite geo location".into());
        }
        if self.date.timestamp_subsec_nanos() != 0 {
            return fail("date must have second precision".into());
        }
        Ok(())
    }

    pub fn gender(&self) -> Gender {
        self.author.gender
    }
}

/// Size of a benchmark dataset, as a multiple of one million tweets.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ScaleFactor(f64);

impl ScaleFactor {
    /// The five full-size datasets.
    pub const FULL: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 2.5];
    /// Small sizes for development machines and CI.
    pub const DESK: [f64; 3] = [0.001, 0.01, 0.1];

    pub fn new(sf: f64) -> Result<Self> {
        let s = ScaleFactor(sf);
        if !sf.is_finite() || sf <= 0.0 || s.tweet_count() == 0 {
            return Err(Error::invalid(format!("scale factor {sf} yields no tweets")));
        }
        Ok(s)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn tweet_count(self) -> u64 {
        (self.0 * 1_000_000.0).round() as u64
    }
}

impl fmt::Display for ScaleFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for ScaleFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("invalid scale factor `{s}`")))?;
        ScaleFactor::new(v)
    }
}

/// An immutable, validated collection of tweets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    records: Vec<TweetRecord>,
}

impl Corpus {
    /// Validates every record plus the corpus-wide invariants: unique tweet
    /// ids and one consistent author row per author id.
    pub fn new(records: Vec<TweetRecord>) -> Result<Self> {
        let mut check = CorpusChecker::default();
        for r in &records {
            check.admit(r)?;
        }
        Ok(Corpus { records })
    }

    pub fn records(&self) -> &[TweetRecord] {
        &self.records
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TweetRecord> {
        self.records.iter()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_records(self) -> Vec<TweetRecord> {
        self.records
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a TweetRecord;
    type IntoIter = std::slice::Iter<'a, TweetRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

/// Incremental corpus-level validation used by both `Corpus::new` and the reader.
#[derive(Debug, Default)]
pub(crate) struct CorpusChecker {
    ids: HashSet<u64>,
    authors: HashMap<u64, Author>,
}

impl CorpusChecker {
    pub(crate) fn admit(&mut self, record: &TweetRecord) -> Result<()> {
        record.validate()?;
        if !self.ids.insert(record.id) {
            return Err(Error::Validation {
                id: record.id,
                message: "duplicate tweet id".into(),
            });
        }
        match self.authors.get(&record.author.author_id) {
            Some(known) if known != &record.author => Err(Error::Validation {
                id: record.id,
                message: format!(
                    "author {} conflicts with an earlier record",
                    record.author.author_id
                ),
            }),
            Some(_) => Ok(()),
            None => {
                self.authors.insert(record.author.author_id, record.author.clone());
                Ok(())
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The sample document from the benchmark's document-store description.
    pub fn sample_record() -> TweetRecord {
        TweetRecord {
            id: 644626677310603264,
            raw_text: "Amanda's car is too much for my headache".into(),
            clean_text: "Amanda is car is too much for my headache".into(),
            lemma_text: "amanda car headache".into(),
            author: Author {
                author_id: 970993142,
                first_name: String::new(),
                last_name: String::new(),
                age: 23,
                gender: Gender::Male,
            },
            geo: GeoPoint { x: 32.0, y: 79.0 },
            date: Utc.with_ymd_and_hms(2015, 9, 17, 23, 39, 11).unwrap(),
            lemma_text_length: 3,
            words: ["amanda", "car", "headache"]
                .iter()
                .map(|w| VocabularyEntry { tf: 1.0, count: 1, word: w.to_string() })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_factor_counts() {
        let counts: Vec<u64> = ScaleFactor::FULL
            .iter()
            .map(|&sf| ScaleFactor::new(sf).unwrap().tweet_count())
            .collect();
        assert_eq!(counts, vec![500_000, 1_000_000, 1_500_000, 2_000_000, 2_500_000]);
        assert_eq!(ScaleFactor::new(0.001).unwrap().tweet_count(), 1_000);
        assert!(ScaleFactor::new(0.0).is_err());
        assert!(ScaleFactor::new(1e-9).is_err());
        assert!("abc".parse::<ScaleFactor>().is_err());
    }

    #[test]
    fn validate_rejects_zero_count() {
        let mut r = fixtures::sample_record();
        r.words[0].count = 0;
        let err = r.validate().unwrap_err();
        assert!(matches!(err, Error::Validation { id: 644626677310603264, .. }), "{err}");
    }

    #[test]
    fn validate_rejects_length_mismatch_and_duplicates() {
        let mut r = fixtures::sample_record();
        r.lemma_text_length = 4;
        assert!(r.validate().is_err());

        let mut r = fixtures::sample_record();
        r.words[1].word = "amanda".into();
        assert!(r.validate().is_err());
    }

    #[test]
    fn corpus_rejects_duplicate_ids_and_conflicting_authors() {
        let a = fixtures::sample_record();
        assert!(Corpus::new(vec![a.clone(), a.clone()]).is_err());

        let mut b = a.clone();
        b.id += 1;
        b.author.gender = Gender::Female;
        assert!(Corpus::new(vec![a, b]).is_err());
    }

    #[test]
    fn gender_parsing() {
        assert_eq!("Male".parse::<Gender>().unwrap(), Gender::Male);
        assert_eq!("female".parse::<Gender>().unwrap(), Gender::Female);
        assert!("other".parse::<Gender>().is_err());
    }
}
