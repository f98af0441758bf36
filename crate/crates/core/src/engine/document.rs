//! Single-collection layout: one nested record per tweet.

use std::collections::HashMap;

use super::mapreduce::map_reduce;
use super::{top_k, LayoutKind, QuerySpec, StorageLayout, Strategy, TopKResult};
use crate::corpus::{Corpus, TweetRecord};
use crate::error::{Error, Result};
use crate::scoring::{
    idf_value, posting_weight, sum_weights, tfidf, CorpusStats, Scheme, StatsBuilder, StatsScope,
};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocumentLayout {
    collection: Vec<TweetRecord>,
}

impl DocumentLayout {
    pub fn build(corpus: &Corpus) -> Result<Self> {
        Self::from_records(corpus.records().to_vec())
    }

    pub fn from_records(mut collection: Vec<TweetRecord>) -> Result<Self> {
        collection.sort_by_key(|r| r.id);
        if let Some(w) = collection.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Validation { id: w[0].id, message: "duplicate tweet id".into() });
        }
        Ok(DocumentLayout { collection })
    }

    /// Stored documents in ascending id order.
    pub fn documents(&self) -> &[TweetRecord] {
        &self.collection
    }

    fn selects(spec: &QuerySpec, doc: &TweetRecord) -> bool {
        spec.selects(doc.author.gender, doc.date.timestamp(), doc.geo.x, doc.geo.y)
    }

    /// Statistics pre-pass over the configured scope.
    fn scope_stats(&self, spec: &QuerySpec) -> Option<CorpusStats> {
        let mut builder = StatsBuilder::default();
        for doc in &self.collection {
            if spec.scope == StatsScope::Global || Self::selects(spec, doc) {
                builder.add(doc.lemma_text_length, doc.words.iter().map(|w| w.word.as_str()));
            }
        }
        builder.finish()
    }

    fn run_map_reduce(&self, spec: &QuerySpec) -> TopKResult {
        let Some(stats) = self.scope_stats(spec) else {
            let matched = self.collection.iter().filter(|d| Self::selects(spec, d)).count();
            return TopKResult { entries: Vec::new(), matched_docs: matched as u64 };
        };
        let mut matched = 0u64;
        let reduced = map_reduce(
            &self.collection,
            |doc: &TweetRecord, out| {
                if !Self::selects(spec, doc) {
                    return;
                }
                matched += 1;
                for entry in &doc.words {
                    let n = stats.doc_freq(&entry.word).expect("pre-pass saw every selected term");
                    let idf = idf_value(stats.n_docs(), n, spec.params.log_base);
                    let w = posting_weight(
                        spec.scheme,
                        entry.tf,
                        idf,
                        doc.lemma_text_length,
                        stats.avg_doc_len(),
                        &spec.params,
                    );
                    out.emit(entry.word.as_str(), w);
                }
            },
            |_, weights| sum_weights(weights.iter().copied()),
        );
        let groups = reduced.into_iter().map(|(w, s)| (w.to_string(), s)).collect();
        top_k(groups, spec.k, matched)
    }

    /// Fused match / unwind / group pipeline; TF-IDF only.
    fn run_native(&self, spec: &QuerySpec) -> Result<TopKResult> {
        if spec.scheme != Scheme::TfIdf {
            return Err(Error::UnsupportedStrategy {
                strategy: "na",
                scheme: spec.scheme.as_str(),
            });
        }
        // $match + $unwind + $group { _id: word, tfs: $push tf }
        let mut matched = 0u64;
        let mut groups: HashMap<&str, Vec<f64>> = HashMap::new();
        for doc in &self.collection {
            if !Self::selects(spec, doc) {
                continue;
            }
            matched += 1;
            for entry in &doc.words {
                groups.entry(entry.word.as_str()).or_default().push(entry.tf);
            }
        }
        let global = match spec.scope {
            StatsScope::Global => self.scope_stats(spec),
            StatsScope::Filtered => None,
        };
        let n_docs = global.as_ref().map_or(matched, |s| s.n_docs());
        // $project: weight = idf * each tf, summed in document order.
        let ranked = groups
            .into_iter()
            .map(|(word, tfs)| {
                let n = match &global {
                    Some(s) => s.doc_freq(word).expect("global stats cover every term"),
                    None => tfs.len() as u64,
                };
                let idf = idf_value(n_docs, n, spec.params.log_base);
                (word.to_string(), sum_weights(tfs.iter().map(|&tf| tfidf(tf, idf))))
            })
            .collect();
        Ok(top_k(ranked, spec.k, matched))
    }
}

impl StorageLayout for DocumentLayout {
    fn kind(&self) -> LayoutKind {
        LayoutKind::Document
    }

    fn document_count(&self) -> usize {
        self.collection.len()
    }

    fn run(&self, spec: &QuerySpec, strategy: Strategy) -> Result<TopKResult> {
        match strategy {
            Strategy::Mr => Ok(self.run_map_reduce(spec)),
            Strategy::Na => self.run_native(spec),
        }
    }
}
