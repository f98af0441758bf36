use std::borrow::Borrow;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::{Author, Corpus, CorpusChecker, Gender, GeoPoint, TweetRecord, VocabularyEntry};
use crate::error::{Error, Result};
use crate::preprocess;

/// One line of the canonical JSON-Lines corpus format.
///
/// Field names and order follow the document-store sample record. The derived
/// text fields are optional on input: a record without `words` is run through
/// the preprocessing pipeline when loaded.
#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TweetDocument {
    #[serde(rename = "_id")]
    id: u64,
    raw_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clean_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lemma_text: Option<String>,
    author: u64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    author_first_name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    author_last_name: String,
    geo_location: [f64; 2],
    gender: Gender,
    age: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lemma_text_length: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    words: Option<Vec<VocabularyEntry>>,
    #[serde(with = "iso_date")]
    date: DateTime<Utc>,
}

mod iso_date {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(date: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&date.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|dt| dt.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

impl From<&TweetRecord> for TweetDocument {
    fn from(r: &TweetRecord) -> Self {
        TweetDocument {
            id: r.id,
            raw_text: r.raw_text.clone(),
            clean_text: Some(r.clean_text.clone()),
            lemma_text: Some(r.lemma_text.clone()),
            author: r.author.author_id,
            author_first_name: r.author.first_name.clone(),
            author_last_name: r.author.last_name.clone(),
            geo_location: [r.geo.x, r.geo.y],
            gender: r.author.gender,
            age: r.author.age,
            lemma_text_length: Some(r.lemma_text_length),
            words: Some(r.words.clone()),
            date: r.date,
        }
    }
}

impl TweetDocument {
    fn into_record(self, k: f64) -> Result<TweetRecord> {
        let id = self.id;
        let (clean_text, lemma_text, words, lemma_text_length) = match self.words {
            None => {
                let out = preprocess::preprocess(&self.raw_text, k)?;
                (out.clean_text, out.lemma_text, out.vocabulary, out.lemma_text_length)
            }
            Some(words) => {
                let missing = |field: &str| Error::Validation {
                    id,
                    message: format!("`words` present but `{field}` missing"),
                };
                let clean = self.clean_text.ok_or_else(|| missing("cleanText"))?;
                let lemma = self.lemma_text.ok_or_else(|| missing("lemmaText"))?;
                let len = self
                    .lemma_text_length
                    .unwrap_or_else(|| words.iter().map(|w| w.count).sum());
                (clean, lemma, words, len)
            }
        };
        Ok(TweetRecord {
            id,
            raw_text: self.raw_text,
            clean_text,
            lemma_text,
            author: Author {
                author_id: self.author,
                first_name: self.author_first_name,
                last_name: self.author_last_name,
                age: self.age,
                gender: self.gender,
            },
            geo: GeoPoint {
                x: self.geo_location[0],
                y: self.geo_location[1],
            },
            date: self.date,
            lemma_text_length,
            words,
        })
    }
}

/// Streams validated records from a JSON-Lines source.
pub struct CorpusReader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    k: f64,
    path: PathBuf,
    checker: CorpusChecker,
}

impl CorpusReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>, k: f64) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(BufReader::new(file), path, k))
    }
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, path: impl Into<PathBuf>, k: f64) -> Self {
        CorpusReader {
            lines: reader.lines(),
            line_no: 0,
            k,
            path: path.into(),
            checker: CorpusChecker::default(),
        }
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<TweetRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<TweetDocument>(&line)
                .map_err(|e| Error::Parse {
                    line: self.line_no,
                    message: e.to_string(),
                })
                .and_then(|doc| doc.into_record(self.k))
                .and_then(|rec| self.checker.admit(&rec).map(|_| rec));
            return Some(parsed);
        }
    }
}

/// Loads a corpus, preprocessing records that lack term statistics with the
/// default `K`.
pub fn load(path: impl AsRef<Path>) -> Result<Corpus> {
    load_with(path, preprocess::DEFAULT_TF_K)
}

pub fn load_with(path: impl AsRef<Path>, k: f64) -> Result<Corpus> {
    let records = CorpusReader::open(path, k)?.collect::<Result<Vec<_>>>()?;
    // The reader has already enforced every invariant.
    Ok(Corpus { records })
}

/// Writes records in the canonical format, one document per line.
pub fn save<I>(records: I, path: impl AsRef<Path>) -> Result<()>
where
    I: IntoIterator,
    I::Item: Borrow<TweetRecord>,
{
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_records(records, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn write_records<I, W>(records: I, out: &mut W) -> std::io::Result<()>
where
    I: IntoIterator,
    I::Item: Borrow<TweetRecord>,
    W: Write,
{
    for record in records {
        serde_json::to_writer(&mut *out, &TweetDocument::from(record.borrow()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::sample_record;
    use std::io::Cursor;

    const SAMPLE_LINE: &str = r#"{"_id":644626677310603264,"rawText":"Amanda's car is too much for my headache","cleanText":"Amanda is car is too much for my headache","lemmaText":"amanda car headache","author":970993142,"geoLocation":[32,79],"gender":"male","age":23,"lemmaTextLength":3,"words":[{"tf":1,"count":1,"word":"amanda"},{"tf":1,"count":1,"word":"car"},{"tf":1,"count":1,"word":"headache"}],"date":"2015-09-17T23:39:11Z"}"#;

    fn read(src: &str) -> Result<Vec<TweetRecord>> {
        CorpusReader::new(Cursor::new(src.to_string()), "<mem>", 0.5).collect()
    }

    #[test]
    fn loads_sample_document() {
        let records = read(SAMPLE_LINE).unwrap();
        assert_eq!(records, vec![sample_record()]);
    }

    #[test]
    fn empty_input_is_empty_corpus() {
        assert!(read("").unwrap().is_empty());
        assert!(read("\n\n").unwrap().is_empty());
    }

    #[test]
    fn zero_count_is_validation_error() {
        let line = SAMPLE_LINE.replacen(r#""count":1"#, r#""count":0"#, 1);
        match read(&line) {
            Err(Error::Validation { id, .. }) => assert_eq!(id, 644626677310603264),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_line_names_line_number() {
        let src = format!("{SAMPLE_LINE}\n{{not json\n");
        match read(&src) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_words_are_preprocessed() {
        let line = r#"{"_id":1,"rawText":"Amanda's car is too much for my headache #sad http://t.co/x","author":7,"geoLocation":[20.5,-3.25],"gender":"female","age":31,"date":"2015-09-18T01:02:03Z"}"#;
        let records = read(line).unwrap();
        let r = &records[0];
        assert_eq!(r.clean_text, "Amanda is car is too much for my headache");
        assert_eq!(r.lemma_text, "amanda car headache");
        assert_eq!(r.lemma_text_length, 3);
        assert_eq!(r.words.len(), 3);
    }

    #[test]
    fn duplicate_ids_rejected_while_streaming() {
        let src = format!("{SAMPLE_LINE}\n{SAMPLE_LINE}\n");
        assert!(matches!(read(&src), Err(Error::Validation { .. })));
    }

    #[test]
    fn sample_round_trip_is_field_identical() {
        let mut buf = Vec::new();
        write_records([&sample_record()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let original: serde_json::Value = serde_json::from_str(SAMPLE_LINE).unwrap();
        let written: serde_json::Value = serde_json::from_str(text.trim_end()).unwrap();
        let keys = |v: &serde_json::Value| -> Vec<String> {
            v.as_object().unwrap().keys().cloned().collect()
        };
        assert_eq!(keys(&original), keys(&written));
        assert_eq!(read(&text).unwrap(), vec![sample_record()]);
    }

    #[test]
    fn save_to_unwritable_path_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("missing-dir").join("c.jsonl");
        let err = save([&sample_record()], &target).unwrap_err();
        assert!(err.is_io(), "{err}");
        assert!(err.to_string().contains("missing-dir"));
    }
}
