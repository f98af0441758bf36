//! Normalized, column-oriented tables mirroring the relational schema.
//!
//! Surrogate ids equal row positions. Documents are stored in ascending tweet
//! id order and the vocabulary is stored grouped by document, so a
//! vocabulary scan visits each word's postings in tweet-id order.

use std::collections::HashMap;

use super::{top_k, LayoutKind, QuerySpec, StorageLayout, Strategy, TopKResult};
use crate::corpus::{Corpus, Gender, TweetRecord};
use crate::error::{Error, Result};
use crate::scoring::{average_len, idf_value, posting_weight, StatsScope};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenderTable {
    pub id: Vec<u32>,
    pub kind: Vec<Gender>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuthorTable {
    pub id: Vec<u32>,
    pub author_id: Vec<u64>,
    pub first_name: Vec<String>,
    pub last_name: Vec<String>,
    pub age: Vec<u32>,
    pub gender_id: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocumentTable {
    pub id: Vec<u32>,
    pub tweet_id: Vec<u64>,
    pub raw_text: Vec<String>,
    pub clean_text: Vec<String>,
    pub lemma_text: Vec<String>,
    /// Seconds since the Unix epoch, UTC.
    pub date: Vec<i64>,
    pub lemma_text_length: Vec<u64>,
    pub geo_id: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocumentAuthorTable {
    pub document_id: Vec<u32>,
    pub author_id: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeoTable {
    pub id: Vec<u32>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordTable {
    pub id: Vec<u32>,
    pub word: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VocabularyTable {
    pub document_id: Vec<u32>,
    pub word_id: Vec<u32>,
    pub count: Vec<u64>,
    pub tf: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelationalLayout {
    pub genders: GenderTable,
    pub authors: AuthorTable,
    pub documents: DocumentTable,
    pub documents_authors: DocumentAuthorTable,
    pub geo_location: GeoTable,
    pub words: WordTable,
    pub vocabulary: VocabularyTable,
}

fn row_id(n: usize) -> u32 {
    u32::try_from(n).expect("table exceeds u32 rows")
}

impl RelationalLayout {
    pub fn build(corpus: &Corpus) -> Result<Self> {
        Self::from_records(corpus.records())
    }

    pub fn from_records(records: &[TweetRecord]) -> Result<Self> {
        let mut order: Vec<&TweetRecord> = records.iter().collect();
        order.sort_by_key(|r| r.id);
        if let Some(w) = order.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Validation { id: w[0].id, message: "duplicate tweet id".into() });
        }

        let mut t = RelationalLayout::default();
        let mut gender_ids: HashMap<Gender, u32> = HashMap::new();
        let mut author_rows: HashMap<u64, u32> = HashMap::new();
        let mut geo_rows: HashMap<(u64, u64), u32> = HashMap::new();
        let mut word_rows: HashMap<&str, u32> = HashMap::new();

        for r in order {
            let gender = *gender_ids.entry(r.author.gender).or_insert_with(|| {
                let id = row_id(t.genders.id.len());
                t.genders.id.push(id);
                t.genders.kind.push(r.author.gender);
                id
            });
            let author = match author_rows.get(&r.author.author_id) {
                Some(&row) => {
                    if t.authors.gender_id[row as usize] != gender {
                        return Err(Error::Validation {
                            id: r.id,
                            message: format!("author {} changes gender", r.author.author_id),
                        });
                    }
                    row
                }
                None => {
                    let a = &mut t.authors;
                    let row = row_id(a.id.len());
                    a.id.push(row);
                    a.author_id.push(r.author.author_id);
                    a.first_name.push(r.author.first_name.clone());
                    a.last_name.push(r.author.last_name.clone());
                    a.age.push(r.author.age);
                    a.gender_id.push(gender);
                    author_rows.insert(r.author.author_id, row);
                    row
                }
            };
            let geo = *geo_rows
                .entry((r.geo.x.to_bits(), r.geo.y.to_bits()))
                .or_insert_with(|| {
                    let id = row_id(t.geo_location.id.len());
                    t.geo_location.id.push(id);
                    t.geo_location.x.push(r.geo.x);
                    t.geo_location.y.push(r.geo.y);
                    id
                });

            let d = &mut t.documents;
            let doc = row_id(d.id.len());
            d.id.push(doc);
            d.tweet_id.push(r.id);
            d.raw_text.push(r.raw_text.clone());
            d.clean_text.push(r.clean_text.clone());
            d.lemma_text.push(r.lemma_text.clone());
            d.date.push(r.date.timestamp());
            d.lemma_text_length.push(r.lemma_text_length);
            d.geo_id.push(geo);

            t.documents_authors.document_id.push(doc);
            t.documents_authors.author_id.push(author);

            for entry in &r.words {
                let word = match word_rows.get(entry.word.as_str()) {
                    Some(&id) => id,
                    None => {
                        let id = row_id(t.words.id.len());
                        t.words.id.push(id);
                        t.words.word.push(entry.word.clone());
                        word_rows.insert(entry.word.as_str(), id);
                        id
                    }
                };
                let v = &mut t.vocabulary;
                v.document_id.push(doc);
                v.word_id.push(word);
                v.count.push(entry.count);
                v.tf.push(entry.tf);
            }
        }
        Ok(t)
    }

    /// Rows of `documents` passing the active constraints, as a membership mask.
    fn select_documents(&self, spec: &QuerySpec) -> Vec<bool> {
        // genders: sigma(c1)
        let gender_ok: Vec<bool> = self.genders.kind.iter().map(|&g| g == spec.gender).collect();
        // authors join genders (c6)
        let author_ok: Vec<bool> = self
            .authors
            .gender_id
            .iter()
            .map(|&g| gender_ok[g as usize])
            .collect();
        // documents join documents_authors join authors (c4, c5)
        let mut selected = vec![false; self.documents.id.len()];
        for (doc, author) in self
            .documents_authors
            .document_id
            .iter()
            .zip(&self.documents_authors.author_id)
        {
            if author_ok[*author as usize] {
                selected[*doc as usize] = true;
            }
        }
        if let Some(range) = &spec.date_range {
            for (sel, &date) in selected.iter_mut().zip(&self.documents.date) {
                *sel = *sel && range.contains_secs(date);
            }
        }
        if let Some(geo) = &spec.geo_box {
            // documents join geo_location (c9)
            let geo_ok: Vec<bool> = self
                .geo_location
                .x
                .iter()
                .zip(&self.geo_location.y)
                .map(|(&x, &y)| geo.contains(x, y))
                .collect();
            for (sel, &g) in selected.iter_mut().zip(&self.documents.geo_id) {
                *sel = *sel && geo_ok[g as usize];
            }
        }
        selected
    }
}

impl StorageLayout for RelationalLayout {
    fn kind(&self) -> LayoutKind {
        LayoutKind::Relational
    }

    fn document_count(&self) -> usize {
        self.documents.id.len()
    }

    fn run(&self, spec: &QuerySpec, _strategy: Strategy) -> Result<TopKResult> {
        let selected = self.select_documents(spec);
        let matched = selected.iter().filter(|&&s| s).count() as u64;
        if matched == 0 {
            return Ok(TopKResult::default());
        }

        // Statistics: N, per-word n and the length total over the scope.
        let in_scope = |doc: u32| spec.scope == StatsScope::Global || selected[doc as usize];
        let (n_docs, total_len) = match spec.scope {
            StatsScope::Filtered => (
                matched,
                self.documents
                    .lemma_text_length
                    .iter()
                    .zip(&selected)
                    .filter(|(_, &s)| s)
                    .map(|(&l, _)| l)
                    .sum::<u64>(),
            ),
            StatsScope::Global => (
                self.documents.id.len() as u64,
                self.documents.lemma_text_length.iter().sum::<u64>(),
            ),
        };
        if total_len == 0 {
            return Ok(TopKResult { entries: Vec::new(), matched_docs: matched });
        }
        let avg_len = average_len(total_len, n_docs);
        let mut doc_freq = vec![0u64; self.words.id.len()];
        for (&doc, &word) in self.vocabulary.document_id.iter().zip(&self.vocabulary.word_id) {
            if in_scope(doc) {
                doc_freq[word as usize] += 1;
            }
        }
        let idf: Vec<f64> = doc_freq
            .iter()
            .map(|&n| if n == 0 { 0.0 } else { idf_value(n_docs, n, spec.params.log_base) })
            .collect();

        // vocabulary join documents (c7) join words (c8), projection, gamma(sum) by word.
        let mut sums = vec![0.0f64; self.words.id.len()];
        let mut touched = vec![false; self.words.id.len()];
        let v = &self.vocabulary;
        for row in 0..v.document_id.len() {
            let doc = v.document_id[row] as usize;
            if !selected[doc] {
                continue;
            }
            let word = v.word_id[row] as usize;
            let w = posting_weight(
                spec.scheme,
                v.tf[row],
                idf[word],
                self.documents.lemma_text_length[doc],
                avg_len,
                &spec.params,
            );
            sums[word] += w;
            touched[word] = true;
        }
        let groups = touched
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(word, _)| (self.words.word[word].clone(), sums[word]))
            .collect();
        Ok(top_k(groups, spec.k, matched))
    }
}
