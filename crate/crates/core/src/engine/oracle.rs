//! Brute-force reference for query results.
//!
//! Written with plain nested loops over the raw records and sharing no code
//! with the layouts: its own filter, its own statistics, its own weight
//! formulas, grouping and ordering. Intended for corpora of up to ~10,000
//! documents.

use super::{QuerySpec, TopKResult};
use crate::corpus::TweetRecord;
use crate::scoring::{LogBase, Scheme, StatsScope};

pub fn brute_force_oracle(corpus: &[TweetRecord], spec: &QuerySpec) -> TopKResult {
    // Documents in ascending id order.
    let mut docs: Vec<&TweetRecord> = Vec::new();
    for r in corpus {
        let mut pos = docs.len();
        for (i, d) in docs.iter().enumerate() {
            if r.id < d.id {
                pos = i;
                break;
            }
        }
        docs.insert(pos, r);
    }

    let mut selected: Vec<&TweetRecord> = Vec::new();
    for d in &docs {
        if d.author.gender != spec.gender {
            continue;
        }
        if let Some(range) = &spec.date_range {
            if d.date < range.start || d.date > range.end {
                continue;
            }
        }
        if let Some(geo) = &spec.geo_box {
            if d.geo.x < geo.start_x || d.geo.x > geo.end_x {
                continue;
            }
            if d.geo.y < geo.start_y || d.geo.y > geo.end_y {
                continue;
            }
        }
        selected.push(d);
    }
    let matched_docs = selected.len() as u64;

    let scope: &[&TweetRecord] = match spec.scope {
        StatsScope::Filtered => &selected,
        StatsScope::Global => &docs,
    };
    let n_docs = scope.len() as f64;
    let mut total_len: u64 = 0;
    for d in scope {
        total_len += d.lemma_text_length;
    }
    let avg_len = total_len as f64 / n_docs;

    let doc_freq = |word: &str| -> f64 {
        let mut n = 0u64;
        for d in scope {
            for w in &d.words {
                if w.word == word {
                    n += 1;
                    break;
                }
            }
        }
        n as f64
    };

    let k1 = spec.params.k1;
    let b = spec.params.b;
    let mut groups: Vec<(String, f64)> = Vec::new();
    let mut idf_cache: Vec<(String, f64)> = Vec::new();
    for d in &selected {
        for w in &d.words {
            let mut idf = None;
            for (word, v) in &idf_cache {
                if *word == w.word {
                    idf = Some(*v);
                }
            }
            let idf = match idf {
                Some(v) => v,
                None => {
                    let ratio = n_docs / doc_freq(&w.word);
                    let log = match spec.params.log_base {
                        LogBase::Natural => ratio.ln(),
                        LogBase::Base10 => ratio.log10(),
                    };
                    let v = 1.0 + log;
                    idf_cache.push((w.word.clone(), v));
                    v
                }
            };
            let tfidf = w.tf * idf;
            let weight = match spec.scheme {
                Scheme::TfIdf => tfidf,
                Scheme::Okapi => {
                    let len_ratio = d.lemma_text_length as f64 / avg_len;
                    tfidf * ((k1 + 1.0) / (w.tf + k1 * (1.0 + b * (len_ratio - 1.0))))
                }
            };
            let mut found = false;
            for g in groups.iter_mut() {
                if g.0 == w.word {
                    g.1 += weight;
                    found = true;
                    break;
                }
            }
            if !found {
                groups.push((w.word.clone(), 0.0 + weight));
            }
        }
    }

    // Insertion sort: weight descending, word ascending.
    let mut ranked: Vec<(String, f64)> = Vec::new();
    for g in groups {
        let mut pos = ranked.len();
        for (i, r) in ranked.iter().enumerate() {
            let before = g.1 > r.1 || (g.1 == r.1 && g.0 < r.0);
            if before {
                pos = i;
                break;
            }
        }
        ranked.insert(pos, g);
    }
    ranked.truncate(spec.k);
    TopKResult { entries: ranked, matched_docs }
}
