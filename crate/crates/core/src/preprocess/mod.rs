//! Raw tweet text to clean text, lemma text and per-document term statistics.
//!
//! The pipeline runs five steps in order:
//!
//! 1. extract `#tags` / `@mentions` and drop `http(s)://` links
//! 2. expand contractions
//! 3. split sentences on `.`, `!`, `?` and delete punctuation
//! 4. lowercase, drop stopwords, lemmatize
//! 5. count term occurrences and compute the augmented term frequency
//!
//! Every function here is pure and can be applied to documents in parallel.

mod contractions;
mod lemma;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;

use crate::corpus::VocabularyEntry;
use crate::error::{Error, Result};

pub use contractions::expand_contractions;
pub use lemma::{is_stopword, Lemmatizer, RuleLemmatizer};

/// Default augmentation constant for the term frequency.
pub const DEFAULT_TF_K: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessOutput {
    pub tags: Vec<String>,
    pub clean_text: String,
    pub lemma_text: String,
    pub vocabulary: Vec<VocabularyEntry>,
    pub lemma_text_length: u64,
}

/// Runs all five steps with the default lemmatizer.
pub fn preprocess(raw: &str, k: f64) -> Result<PreprocessOutput> {
    preprocess_with(raw, k, &RuleLemmatizer::default())
}

pub fn preprocess_with(raw: &str, k: f64, lemmatizer: &dyn Lemmatizer) -> Result<PreprocessOutput> {
    let (tags, without) = strip_tags_links(raw);
    let expanded = expand_contractions(&without);
    let clean_text = sentences_and_clean(&expanded);
    let lemma_text = lemmatize_with(&clean_text, lemmatizer);
    let vocabulary = term_stats(&lemma_text, k)?;
    let lemma_text_length = vocabulary.iter().map(|e| e.count).sum();
    Ok(PreprocessOutput {
        tags,
        clean_text,
        lemma_text,
        vocabulary,
        lemma_text_length,
    })
}

fn url_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"https?://\S*").expect("static regex"))
}

fn tag_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // A tag must not be glued to a preceding word character (`a@b.com` is not a mention).
    RE.get_or_init(|| Regex::new(r"(^|[^\w])([#@]\w+)").expect("static regex"))
}

/// Extracts `#tag` and `@mention` tokens and removes links.
///
/// Tags and links are cut out in place; the surrounding whitespace stays, so
/// `"see #news at http://x.co now"` becomes `"see  at  now"`.
pub fn strip_tags_links(raw: &str) -> (Vec<String>, String) {
    let without_links = url_pattern().replace_all(raw, "");
    let mut tags = Vec::new();
    let text = tag_pattern().replace_all(&without_links, |caps: &regex::Captures<'_>| {
        tags.push(caps[2].to_string());
        caps[1].to_string()
    });
    (tags, text.into_owned())
}

/// Splits on sentence terminators, deletes punctuation and collapses whitespace.
///
/// Punctuation is deleted without inserting a space: `"a,b c"` becomes `"ab c"`.
pub fn sentences_and_clean(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for sentence in text.split(['.', '!', '?']) {
        let cleaned: String = sentence
            .chars()
            .filter(|c| c.is_alphanumeric() || c.is_whitespace())
            .collect();
        for token in cleaned.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(token);
        }
    }
    out
}

/// Lowercases, removes stopwords and lemmatizes with the default rule set.
pub fn lemmatize(clean_text: &str) -> String {
    lemmatize_with(clean_text, &RuleLemmatizer::default())
}

pub fn lemmatize_with(clean_text: &str, lemmatizer: &dyn Lemmatizer) -> String {
    let mut out = String::new();
    for raw in clean_text.split_whitespace() {
        // Lowercasing can introduce combining marks (e.g. U+0130); keep only
        // alphanumerics so the result is stable under re-cleaning.
        let token: String = raw
            .to_lowercase()
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect();
        if token.is_empty() || is_stopword(&token) {
            continue;
        }
        let lemma = lemmatizer.lemma(&token);
        if lemma.is_empty() || is_stopword(&lemma) {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&lemma);
    }
    out
}

/// Per-term occurrence counts and augmented term frequencies, sorted by word.
///
/// `tf = K + (1 - K) * count / max_count`; terms reaching `max_count` get
/// exactly `1.0`.
pub fn term_stats(lemma_text: &str, k: f64) -> Result<Vec<VocabularyEntry>> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::invalid(format!("K must lie in [0, 1), got {k}")));
    }
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for token in lemma_text.split_whitespace() {
        *counts.entry(token).or_default() += 1;
    }
    let max_count = counts.values().copied().max().unwrap_or(0);
    Ok(counts
        .into_iter()
        .map(|(word, count)| VocabularyEntry {
            word: word.to_string(),
            count,
            tf: augmented_tf(count, max_count, k),
        })
        .collect())
}

pub fn augmented_tf(count: u64, max_count: u64, k: f64) -> f64 {
    if count == max_count {
        1.0
    } else {
        k + (1.0 - k) * (count as f64 / max_count as f64)
    }
}
