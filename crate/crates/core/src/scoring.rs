//! Term weighting: augmented TF (see [`crate::preprocess::term_stats`]), IDF,
//! TF-IDF and Okapi BM25, plus the per-term sums used for ranking.
//!
//! ```text
//! IDF(t)          = 1 + log(N / n)
//! TFIDF(t, d)     = TF(t, d) * IDF(t)
//! Okapi(t, d)     = TFIDF(t, d) * (k1 + 1) / (TF(t, d) + k1 * (1 - b + b * |d| / avgdl))
//! ```
//!
//! Okapi is evaluated as `TFIDF * ((k1 + 1) / (TF + k1 * (1 + b * (|d| / avgdl - 1))))`,
//! which is the same expression rearranged so that `TF = 1, |d| = avgdl` and
//! `b = 0` hit their closed forms exactly in floating point.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[serde(rename = "tfidf")]
    TfIdf,
    Okapi,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::TfIdf, Scheme::Okapi];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::TfIdf => "tfidf",
            Scheme::Okapi => "okapi",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tfidf" | "tf-idf" => Ok(Scheme::TfIdf),
            "okapi" | "bm25" => Ok(Scheme::Okapi),
            other => Err(Error::invalid(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Base10,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Base10 => x.log10(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::Natural => "natural",
            LogBase::Base10 => "base10",
        }
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "natural" | "e" | "ln" => Ok(LogBase::Natural),
            "base10" | "10" | "log10" => Ok(LogBase::Base10),
            other => Err(Error::invalid(format!("unknown log base `{other}`"))),
        }
    }
}

/// Which documents N, n and avgdl are counted over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatsScope {
    /// Only the documents selected by the query's constraints.
    #[default]
    Filtered,
    /// Every document in the store.
    Global,
}

impl StatsScope {
    pub fn as_str(self) -> &'static str {
        match self {
            StatsScope::Filtered => "filtered",
            StatsScope::Global => "global",
        }
    }
}

impl FromStr for StatsScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "filtered" => Ok(StatsScope::Filtered),
            "global" => Ok(StatsScope::Global),
            other => Err(Error::invalid(format!("unknown statistics scope `{other}`"))),
        }
    }
}

/// Free parameters of the weighting schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    /// Augmented TF constant.
    #[serde(rename = "K")]
    pub k: f64,
    pub k1: f64,
    pub b: f64,
    pub log_base: LogBase,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            k: 0.5,
            k1: 1.2,
            b: 0.75,
            log_base: LogBase::Natural,
        }
    }
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.k) {
            return Err(Error::invalid(format!("K must lie in [0, 1), got {}", self.k)));
        }
        if !(1.2..=2.0).contains(&self.k1) {
            return Err(Error::invalid(format!("k1 must lie in [1.2, 2.0], got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::invalid(format!("b must lie in [0, 1], got {}", self.b)));
        }
        Ok(())
    }
}

/// Document length `||d||`: total lemma occurrences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DocLen(u64);

impl DocLen {
    pub fn new(len: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("document length must be positive"));
        }
        Ok(DocLen(len))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

/// N, per-term document frequency and average length over a document set.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    n_docs: u64,
    doc_freq: HashMap<String, u64>,
    avg_doc_len: f64,
}

impl CorpusStats {
    pub fn new(n_docs: u64, doc_freq: HashMap<String, u64>, avg_doc_len: f64) -> Result<Self> {
        if n_docs == 0 {
            return Err(Error::invalid("statistics need at least one document"));
        }
        if !(avg_doc_len.is_finite() && avg_doc_len > 0.0) {
            return Err(Error::invalid(format!("average length {avg_doc_len} must be positive")));
        }
        if let Some((word, &n)) = doc_freq.iter().find(|(_, &n)| n == 0 || n > n_docs) {
            return Err(Error::invalid(format!(
                "document frequency {n} of `{word}` outside [1, {n_docs}]"
            )));
        }
        Ok(CorpusStats { n_docs, doc_freq, avg_doc_len })
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn doc_freq(&self, word: &str) -> Option<u64> {
        self.doc_freq.get(word).copied()
    }
}

/// Accumulates [`CorpusStats`] one document at a time.
#[derive(Debug, Default)]
pub struct StatsBuilder {
    n_docs: u64,
    total_len: u64,
    doc_freq: HashMap<String, u64>,
}

impl StatsBuilder {
    pub fn add<'a>(&mut self, doc_len: u64, words: impl IntoIterator<Item = &'a str>) {
        self.n_docs += 1;
        self.total_len += doc_len;
        for w in words {
            match self.doc_freq.get_mut(w) {
                Some(n) => *n += 1,
                None => {
                    self.doc_freq.insert(w.to_string(), 1);
                }
            }
        }
    }

    /// `None` when no document (or no term) was added.
    pub fn finish(self) -> Option<CorpusStats> {
        if self.n_docs == 0 || self.total_len == 0 {
            return None;
        }
        let avg = average_len(self.total_len, self.n_docs);
        Some(CorpusStats {
            n_docs: self.n_docs,
            doc_freq: self.doc_freq,
            avg_doc_len: avg,
        })
    }
}

pub fn average_len(total_len: u64, n_docs: u64) -> f64 {
    total_len as f64 / n_docs as f64
}

/// `1 + log(N / n)` for a term present in the statistics.
pub fn idf(stats: &CorpusStats, word: &str, params: &SchemeParams) -> Result<f64> {
    let n = stats
        .doc_freq(word)
        .ok_or_else(|| Error::AbsentTerm(word.to_string()))?;
    Ok(idf_value(stats.n_docs, n, params.log_base))
}

pub fn idf_value(n_docs: u64, doc_freq: u64, base: LogBase) -> f64 {
    1.0 + base.log(n_docs as f64 / doc_freq as f64)
}

pub fn tfidf(tf: f64, idf: f64) -> f64 {
    tf * idf
}

pub fn okapi(tf: f64, idf: f64, doc_len: DocLen, stats: &CorpusStats, params: &SchemeParams) -> f64 {
    okapi_value(tf, idf, doc_len.get(), stats.avg_doc_len, params)
}

pub(crate) fn okapi_value(tf: f64, idf: f64, doc_len: u64, avg_doc_len: f64, params: &SchemeParams) -> f64 {
    let norm = 1.0 + params.b * (doc_len as f64 / avg_doc_len - 1.0);
    tfidf(tf, idf) * ((params.k1 + 1.0) / (tf + params.k1 * norm))
}

/// Weight of one (document, term) posting under `scheme`.
pub fn posting_weight(
    scheme: Scheme,
    tf: f64,
    idf: f64,
    doc_len: u64,
    avg_doc_len: f64,
    params: &SchemeParams,
) -> f64 {
    match scheme {
        Scheme::TfIdf => tfidf(tf, idf),
        Scheme::Okapi => okapi_value(tf, idf, doc_len, avg_doc_len, params),
    }
}

/// Sum of per-document weights of a term over the selected documents.
pub fn sum_weights(weights: impl IntoIterator<Item = f64>) -> f64 {
    weights.into_iter().fold(0.0, |acc, w| acc + w)
}
