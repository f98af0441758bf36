use chrono::{TimeZone, Utc};
use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest, ProptestConfig};
use proptest::strategy::Strategy as Gen;

use super::*;
use crate::corpus::{self, fixtures::sample_record, Author, Corpus, GeoPoint, ScaleFactor, TweetRecord};
use crate::preprocess::term_stats;
use crate::scoring::LogBase;

fn doc(id: u64, gender: Gender, minute: i64, x: f64, y: f64, lemma: &str) -> TweetRecord {
    let words = term_stats(lemma, 0.5).unwrap();
    TweetRecord {
        id,
        raw_text: lemma.into(),
        clean_text: lemma.into(),
        lemma_text: lemma.into(),
        author: Author {
            author_id: 1000 + gender as u64,
            first_name: "A".into(),
            last_name: "B".into(),
            age: 30,
            gender,
        },
        geo: GeoPoint { x, y },
        date: corpus::date_min() + chrono::Duration::minutes(minute),
        lemma_text_length: words.iter().map(|w| w.count).sum(),
        words,
    }
}

fn four_docs() -> Vec<TweetRecord> {
    vec![
        doc(4, Gender::Male, 10, 20.0, 0.0, "car car road rain"),
        doc(2, Gender::Female, 20, 30.0, 10.0, "car sun"),
        doc(1, Gender::Male, 30, 40.0, 20.0, "road sun sun car"),
        doc(3, Gender::Male, 40, 45.0, 30.0, "rain"),
    ]
}

fn full_domain() -> (DateRange, GeoBox) {
    (
        DateRange { start: corpus::date_min(), end: corpus::date_max() },
        GeoBox { start_x: 15.0, end_x: 50.0, start_y: -124.0, end_y: 120.0 },
    )
}

fn run_all(records: &[TweetRecord], spec: &QuerySpec) -> Vec<TopKResult> {
    let rel = RelationalLayout::from_records(records).unwrap();
    let docs = DocumentLayout::from_records(records.to_vec()).unwrap();
    let mut out = vec![
        execute(&rel, spec, Strategy::Mr).unwrap(),
        execute(&docs, spec, Strategy::Mr).unwrap(),
    ];
    if spec.scheme == Scheme::TfIdf {
        out.push(execute(&docs, spec, Strategy::Na).unwrap());
    }
    out
}

#[test]
fn four_document_q1_matches_hand_enumeration() {
    let records = four_docs();
    let spec = QuerySpec::q1(Gender::Male);
    // Male documents: 1, 3, 4. N = 3.
    // doc1 "road sun sun car": max 2 -> road .75, sun 1, car .75
    // doc3 "rain": rain 1
    // doc4 "car car road rain": max 2 -> car 1, road .75, rain .75
    // n: car 2, road 2, rain 2, sun 1
    let idf2 = 1.0 + (3.0f64 / 2.0).ln();
    let idf1 = 1.0 + 3.0f64.ln();
    let mut expected = vec![
        ("car".to_string(), 0.75 * idf2 + 1.0 * idf2),
        ("rain".to_string(), 1.0 * idf2 + 0.75 * idf2),
        ("road".to_string(), 0.75 * idf2 + 0.75 * idf2),
        ("sun".to_string(), 1.0 * idf1),
    ];
    expected.sort_by(rank_order);
    let oracle = brute_force_oracle(&records, &spec);
    assert_eq!(oracle.matched_docs, 3);
    assert_eq!(oracle.entries.len(), 4);
    for (got, want) in oracle.entries.iter().zip(&expected) {
        assert_eq!(got.0, want.0);
        assert!((got.1 - want.1).abs() < 1e-12);
    }
    for result in run_all(&records, &spec) {
        assert_eq!(result, oracle);
    }
}

#[test]
fn full_domain_q4_equals_q1() {
    let records: Vec<_> = corpus::generate(ScaleFactor::new(0.001).unwrap(), 3).unwrap().collect();
    let (dates, geo) = full_domain();
    for scheme in Scheme::ALL {
        let q1 = QuerySpec::q1(Gender::Female).with_scheme(scheme);
        let q4 = QuerySpec::q4(Gender::Female, dates, geo).with_scheme(scheme);
        assert_eq!(run_all(&records, &q1), run_all(&records, &q4));
    }
}

#[test]
fn no_matching_documents_is_empty() {
    let records: Vec<_> = four_docs()
        .into_iter()
        .map(|mut r| {
            r.author.gender = Gender::Female;
            r
        })
        .collect();
    for result in run_all(&records, &QuerySpec::q1(Gender::Male)) {
        assert_eq!(result, TopKResult { entries: vec![], matched_docs: 0 });
    }
}

#[test]
fn oracle_single_document_examples() {
    let sample = vec![sample_record()];
    let spec = QuerySpec::q1(Gender::Male).with_k(2);
    let result = brute_force_oracle(&sample, &spec);
    assert_eq!(
        result.entries,
        vec![("amanda".to_string(), 1.0), ("car".to_string(), 1.0)]
    );
    let all = brute_force_oracle(&sample, &QuerySpec::q1(Gender::Male));
    assert!(all.entries.iter().all(|(_, w)| *w == 1.0));
    assert!(brute_force_oracle(&[], &spec).entries.is_empty());
}

#[test]
fn relational_build_examples() {
    let t = RelationalLayout::from_records(&[sample_record()]).unwrap();
    assert_eq!(t.words.id.len(), 3);
    assert_eq!(t.vocabulary.word_id.len(), 3);
    assert_eq!(t.genders.id.len(), 1);
    assert_eq!(t.documents.id.len(), 1);

    let empty = RelationalLayout::from_records(&[]).unwrap();
    assert_eq!(empty, RelationalLayout::default());

    let a = doc(1, Gender::Male, 0, 20.0, 0.0, "car road");
    let b = doc(2, Gender::Female, 0, 20.0, 0.0, "car sun");
    let t = RelationalLayout::from_records(&[a, b]).unwrap();
    assert_eq!(t.words.word.iter().filter(|w| *w == "car").count(), 1);
    let car = t.words.word.iter().position(|w| w == "car").unwrap() as u32;
    assert_eq!(t.vocabulary.word_id.iter().filter(|&&w| w == car).count(), 2);
    assert_eq!(t.genders.id.len(), 2);
    // Identical coordinates share one geo row.
    assert_eq!(t.geo_location.id.len(), 1);
}

#[test]
fn relational_referential_integrity() {
    let records: Vec<_> = corpus::generate(ScaleFactor::new(0.001).unwrap(), 11).unwrap().collect();
    let t = RelationalLayout::from_records(&records).unwrap();
    assert!(t.genders.id.len() <= 2);
    let distinct: usize = records.iter().map(|r| r.words.len()).sum();
    assert_eq!(t.vocabulary.word_id.len(), distinct);
    assert!(t.vocabulary.document_id.iter().all(|&d| (d as usize) < t.documents.id.len()));
    assert!(t.vocabulary.word_id.iter().all(|&w| (w as usize) < t.words.id.len()));
    assert!(t.documents.tweet_id.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn document_build_examples() {
    let d = DocumentLayout::from_records(vec![sample_record()]).unwrap();
    assert_eq!(d.document_count(), 1);
    assert_eq!(d.documents()[0].words.len(), 3);
    assert_eq!(DocumentLayout::from_records(vec![]).unwrap().document_count(), 0);
}

#[test]
fn duplicate_ids_rejected() {
    let r = sample_record();
    assert!(RelationalLayout::from_records(&[r.clone(), r.clone()]).is_err());
    assert!(DocumentLayout::from_records(vec![r.clone(), r]).is_err());
}

#[test]
fn native_aggregation_rejects_okapi() {
    let d = DocumentLayout::from_records(four_docs()).unwrap();
    let spec = QuerySpec::q1(Gender::Male).with_scheme(Scheme::Okapi);
    assert!(matches!(
        execute(&d, &spec, Strategy::Na),
        Err(Error::UnsupportedStrategy { strategy: "na", scheme: "okapi" })
    ));
}

#[test]
fn spec_validation() {
    let (dates, geo) = full_domain();
    assert!(QuerySpec::q1(Gender::Male).validate().is_ok());
    assert!(QuerySpec::q1(Gender::Male).with_k(0).validate().is_err());
    let mut bad = QuerySpec::q2(Gender::Male, dates);
    bad.query = QueryId::Q1;
    assert!(bad.validate().is_err());
    let mut bad = QuerySpec::q4(Gender::Male, dates, geo);
    bad.geo_box = None;
    assert!(bad.validate().is_err());
    let flipped = DateRange { start: dates.end, end: dates.start };
    assert!(QuerySpec::q2(Gender::Male, flipped).validate().is_err());
    let same = DateRange { start: dates.start, end: dates.start };
    assert!(QuerySpec::q2(Gender::Male, same).validate().is_err());
    let flat = GeoBox { start_x: 20.0, end_x: 20.0, ..geo };
    assert!(QuerySpec::q3(Gender::Male, flat).validate().is_err());
    let d = DocumentLayout::default();
    assert!(execute(&d, &QuerySpec::q1(Gender::Male).with_k(0), Strategy::Mr).is_err());
}

#[test]
fn bounds_are_inclusive() {
    let records = four_docs();
    let d1 = records.iter().find(|r| r.id == 1).unwrap();
    let dates = DateRange { start: d1.date, end: d1.date + chrono::Duration::seconds(1) };
    let geo = GeoBox { start_x: d1.geo.x, end_x: 50.0, start_y: -124.0, end_y: d1.geo.y };
    let spec = QuerySpec::q4(Gender::Male, dates, geo);
    for r in run_all(&records, &spec) {
        assert_eq!(r.matched_docs, 1);
    }
    assert_eq!(brute_force_oracle(&records, &spec).matched_docs, 1);
}

#[test]
fn query_ids_parse() {
    assert_eq!("q3".parse::<QueryId>().unwrap(), QueryId::Q3);
    assert!("Q5".parse::<QueryId>().is_err());
    assert_eq!("NA".parse::<Strategy>().unwrap(), Strategy::Na);
}

fn arb_corpus() -> impl Gen<Value = Vec<TweetRecord>> {
    let vocab = prop::sample::select(vec!["car", "road", "rain", "sun", "dog", "cat", "zoo", "ant"]);
    let one = (
        any::<bool>(),
        0i64..2000,
        15.0f64..50.0,
        -124.0f64..120.0,
        prop::collection::vec(vocab, 0..8),
    );
    prop::collection::vec(one, 0..25).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (male, minute, x, y, words))| {
                let g = if male { Gender::Male } else { Gender::Female };
                doc(i as u64 * 7 + 1, g, minute, x, y, &words.join(" "))
            })
            .collect()
    })
}

fn arb_spec() -> impl Gen<Value = QuerySpec> {
    (
        0usize..4,
        any::<bool>(),
        (0i64..2000, 1i64..2000),
        (15.0f64..49.0, 0.5f64..35.0, -124.0f64..110.0, 1.0f64..244.0),
        1usize..12,
        any::<bool>(),
        any::<bool>(),
        any::<bool>(),
        (1.2f64..=2.0, 0.0f64..=1.0),
    )
        .prop_map(|(q, male, (d0, dl), (x0, xl, y0, yl), k, okapi, global, base10, (k1, b))| {
            let g = if male { Gender::Male } else { Gender::Female };
            let start = corpus::date_min() + chrono::Duration::minutes(d0);
            let dates = DateRange { start, end: start + chrono::Duration::minutes(dl) };
            let geo = GeoBox { start_x: x0, end_x: x0 + xl, start_y: y0, end_y: y0 + yl };
            let spec = match q {
                0 => QuerySpec::q1(g),
                1 => QuerySpec::q2(g, dates),
                2 => QuerySpec::q3(g, geo),
                _ => QuerySpec::q4(g, dates, geo),
            };
            spec.with_k(k)
                .with_scheme(if okapi { Scheme::Okapi } else { Scheme::TfIdf })
                .with_scope(if global { StatsScope::Global } else { StatsScope::Filtered })
                .with_params(SchemeParams {
                    k1,
                    b,
                    log_base: if base10 { LogBase::Base10 } else { LogBase::Natural },
                    ..Default::default()
                })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn layouts_strategies_and_oracle_agree(records in arb_corpus(), spec in arb_spec()) {
        let oracle = brute_force_oracle(&records, &spec);
        for result in run_all(&records, &spec) {
            prop_assert_eq!(&result, &oracle);
        }
    }

    #[test]
    fn top_k_is_prefix_of_top_k_plus_one(records in arb_corpus(), spec in arb_spec()) {
        let d = DocumentLayout::from_records(records).unwrap();
        let small = execute(&d, &spec, Strategy::Mr).unwrap();
        let big = execute(&d, &spec.clone().with_k(spec.k + 1), Strategy::Mr).unwrap();
        prop_assert!(small.entries.len() <= spec.k);
        let n = small.entries.len();
        prop_assert_eq!(&small.entries[..], &big.entries[..n]);
    }

    #[test]
    fn ranking_invariant_under_positive_scaling(
        weights in prop::collection::vec((0usize..6, 0.01f64..100.0), 1..30),
        exp in -20i32..20,
    ) {
        let groups: Vec<(String, f64)> = weights
            .iter()
            .enumerate()
            .map(|(i, (_, w))| (format!("w{i:02}"), *w))
            .collect();
        let scale = 2f64.powi(exp);
        let base = top_k(groups.clone(), groups.len(), 0);
        let scaled = top_k(groups.into_iter().map(|(w, v)| (w, v * scale)).collect(), weights.len(), 0);
        let a: Vec<_> = base.entries.iter().map(|e| e.0.clone()).collect();
        let b: Vec<_> = scaled.entries.iter().map(|e| e.0.clone()).collect();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn matched_docs_monotone_for_nested_constraints() {
    let records: Vec<_> = corpus::generate(ScaleFactor::new(0.001).unwrap(), 5).unwrap().collect();
    let d = DocumentLayout::from_records(records).unwrap();
    let dates = DateRange {
        start: Utc.with_ymd_and_hms(2015, 9, 18, 0, 0, 0).unwrap(),
        end: Utc.with_ymd_and_hms(2015, 9, 18, 12, 0, 0).unwrap(),
    };
    let geo = GeoBox { start_x: 20.0, end_x: 40.0, start_y: -50.0, end_y: 60.0 };
    let m = |spec: QuerySpec| execute(&d, &spec, Strategy::Mr).unwrap().matched_docs;
    let q1 = m(QuerySpec::q1(Gender::Male));
    let q2 = m(QuerySpec::q2(Gender::Male, dates));
    let q3 = m(QuerySpec::q3(Gender::Male, geo));
    let q4 = m(QuerySpec::q4(Gender::Male, dates, geo));
    assert_eq!(q1, 500);
    assert!(q4 <= q2 && q2 <= q1 && q4 <= q3 && q3 <= q1);
    assert!(q4 > 0);
}

#[test]
fn scope_changes_weights_not_matches() {
    let records = four_docs();
    let corpus = Corpus::new(records.clone()).unwrap();
    let d = DocumentLayout::build(&corpus).unwrap();
    let filtered = execute(&d, &QuerySpec::q1(Gender::Male), Strategy::Mr).unwrap();
    let global = execute(
        &d,
        &QuerySpec::q1(Gender::Male).with_scope(StatsScope::Global),
        Strategy::Mr,
    )
    .unwrap();
    assert_eq!(filtered.matched_docs, global.matched_docs);
    assert_ne!(filtered.entries, global.entries);
}
