use chrono::{Duration, TimeZone, Utc};

use super::*;
use crate::corpus::{self, fixtures::sample_record, Gender, ScaleFactor};
use crate::engine::{brute_force_oracle, DateRange, GeoBox};
use crate::scoring::{LogBase, Scheme, SchemeParams, StatsScope};

fn dates() -> DateRange {
    DateRange {
        start: Utc.with_ymd_and_hms(2015, 9, 18, 0, 0, 0).unwrap(),
        end: Utc.with_ymd_and_hms(2015, 9, 18, 18, 30, 0).unwrap(),
    }
}

fn geo() -> GeoBox {
    GeoBox { start_x: 18.5, end_x: 44.25, start_y: -80.0, end_y: 90.0 }
}

fn specs() -> Vec<QuerySpec> {
    let mut out = Vec::new();
    for gender in Gender::ALL {
        let base = [
            QuerySpec::q1(gender),
            QuerySpec::q2(gender, dates()),
            QuerySpec::q3(gender, geo()),
            QuerySpec::q4(gender, dates(), geo()),
        ];
        for spec in base {
            for scheme in Scheme::ALL {
                for scope in [StatsScope::Filtered, StatsScope::Global] {
                    out.push(spec.clone().with_scheme(scheme).with_scope(scope));
                }
            }
        }
    }
    out
}

fn count(hay: &str, needle: &str) -> usize {
    hay.matches(needle).count()
}

#[test]
fn q1_tfidf_sql_shape() {
    let q = to_sql(&QuerySpec::q1(Gender::Male)).unwrap();
    assert_eq!(q.dialect, Dialect::AnsiSql);
    assert_eq!(count(&q.text, "genders.type = :pGender"), 1);
    assert_eq!(count(&q.text, " JOIN "), 5);
    assert_eq!(count(&q.text, ":p"), 1);
    assert!(q.text.contains("GROUP BY postings.word_id, postings.word"));
    assert!(q.text.contains("ORDER BY weight DESC, word ASC"));
    assert!(q.text.contains("LIMIT 10;"));
    assert!(q.text.contains("LN("));
    assert_eq!(q.placeholders, ["pGender"]);
}

#[test]
fn q4_okapi_sql_shape() {
    let spec = QuerySpec::q4(Gender::Female, dates(), geo()).with_scheme(Scheme::Okapi);
    let q = to_sql(&spec).unwrap();
    assert_eq!(count(&q.text, " JOIN "), 6);
    assert_eq!(count(&q.text, "genders.type = :pGender"), 1);
    assert_eq!(count(&q.text, "documents.date >= :pStartDate"), 1);
    assert_eq!(count(&q.text, "documents.date <= :pEndDate"), 1);
    for bound in ["x >= :pStartX", "x <= :pEndX", "y >= :pStartY", "y <= :pEndY"] {
        assert_eq!(count(&q.text, &format!("geo_location.{bound}")), 1);
    }
    assert!(q.text.contains("doc_len"));
    assert_eq!(q.placeholders.len(), 7);
}

#[test]
fn compilation_is_deterministic() {
    for spec in specs() {
        for dialect in [Dialect::AnsiSql, Dialect::MapreducePlan] {
            assert_eq!(compile(&spec, dialect).unwrap(), compile(&spec.clone(), dialect).unwrap());
        }
    }
}

#[test]
fn placeholders_follow_active_constraints() {
    for spec in specs() {
        let want: Vec<String> = active_placeholders(&spec).into_iter().map(String::from).collect();
        let sql = to_sql(&spec).unwrap();
        assert_eq!(sql.placeholders, want);
        assert_eq!(sql::PreparedSql::parse(&sql.text).unwrap().placeholders(), want);
        let mr = to_mapreduce(&spec).unwrap();
        assert_eq!(mr.placeholders, want);
        assert_eq!(mr::PreparedPlan::parse(&mr.text).unwrap().placeholders(), want.as_slice());
        let bound: Vec<String> = bindings(&spec).into_keys().collect();
        let mut sorted = want.clone();
        sorted.sort();
        assert_eq!(bound, sorted);
    }
}

#[test]
fn mapreduce_plan_shape() {
    let tfidf = mapreduce_plan(&QuerySpec::q1(Gender::Male)).unwrap();
    assert_eq!(tfidf.map.key, "w.word");
    assert!(tfidf.map.value.starts_with("(w.tf * (1.0 + ln(N / df[w.word])))"));
    assert_eq!(tfidf.reduce, "sum(values)");
    assert_eq!(tfidf.finalize.sort, ["value desc", "key asc"]);
    assert!(tfidf.prepass.derived.is_empty());

    let okapi = mapreduce_plan(&QuerySpec::q1(Gender::Male).with_scheme(Scheme::Okapi)).unwrap();
    let names: Vec<&str> = okapi.prepass.aggregates.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["N", "df", "totalLength"]);
    assert_eq!(okapi.prepass.derived[0].name, "avgdl");
    assert!(okapi.map.value.contains("avgdl"));

    let text = to_mapreduce(&QuerySpec::q1(Gender::Male)).unwrap().text;
    let parsed: MapReducePlan = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, tfidf);
}

#[test]
fn invalid_spec_is_rejected() {
    assert!(to_sql(&QuerySpec::q1(Gender::Male).with_k(0)).is_err());
    assert!(to_mapreduce(&QuerySpec::q1(Gender::Male).with_k(0)).is_err());
}

fn conformance(records: &[crate::corpus::TweetRecord], spec: &QuerySpec) {
    let oracle = brute_force_oracle(records, spec);
    let mut adapter = ReferenceAdapter::new(records).unwrap();
    for dialect in [Dialect::AnsiSql, Dialect::MapreducePlan] {
        adapter.prepare(&compile(spec, dialect).unwrap()).unwrap();
        let (got, _) = adapter.run(&bindings(spec)).unwrap();
        assert_eq!(got, oracle, "{dialect} {:?} {:?} {:?}", spec.query, spec.scheme, spec.scope);
    }
    adapter.close().unwrap();
}

#[test]
fn reference_adapter_matches_oracle() {
    let records: Vec<_> = corpus::generate(ScaleFactor::new(0.0003).unwrap(), 9).unwrap().collect();
    for spec in specs() {
        conformance(&records, &spec);
    }
    let tuned = SchemeParams { k1: 1.7, b: 0.3, log_base: LogBase::Base10, ..Default::default() };
    for spec in specs() {
        conformance(&records, &spec.with_params(tuned).with_k(25));
    }
}

#[test]
fn reference_adapter_single_document() {
    let spec = QuerySpec::q1(Gender::Male).with_k(2);
    let mut adapter = ReferenceAdapter::new(&[sample_record()]).unwrap();
    let want = vec![("amanda".to_string(), 1.0), ("car".to_string(), 1.0)];
    for dialect in [Dialect::AnsiSql, Dialect::MapreducePlan] {
        adapter.prepare(&compile(&spec, dialect).unwrap()).unwrap();
        let (got, _) = adapter.run(&bindings(&spec)).unwrap();
        assert_eq!(got.entries, want);
        assert_eq!(got.matched_docs, 1);
    }
}

#[test]
fn run_is_repeatable_with_new_bindings() {
    let records: Vec<_> = corpus::generate(ScaleFactor::new(0.0002).unwrap(), 4).unwrap().collect();
    let mut adapter = ReferenceAdapter::new(&records).unwrap();
    let base = QuerySpec::q2(Gender::Male, dates());
    adapter.prepare(&to_sql(&base).unwrap()).unwrap();
    for hours in [1, 6, 20] {
        let range = DateRange { start: dates().start, end: dates().start + Duration::hours(hours) };
        let spec = QuerySpec::q2(Gender::Female, range);
        let (got, _) = adapter.run(&bindings(&spec)).unwrap();
        assert_eq!(got, brute_force_oracle(&records, &spec));
    }
}

#[test]
fn adapter_errors() {
    let mut adapter = ReferenceAdapter::new(&[sample_record()]).unwrap();
    let spec = QuerySpec::q1(Gender::Male);
    assert!(adapter.run(&bindings(&spec)).is_err());
    adapter.prepare(&to_sql(&spec).unwrap()).unwrap();
    assert!(adapter.run(&Bindings::new()).is_err());
    let mut extra = bindings(&spec);
    extra.insert("pOther".into(), Value::Int(1));
    assert!(adapter.run(&extra).is_err());

    let mut wrong = to_sql(&spec).unwrap();
    wrong.placeholders.push("pEndDate".into());
    assert!(adapter.prepare(&wrong).is_err());
    let garbage = CompiledQuery { dialect: Dialect::AnsiSql, text: "SELEC x".into(), placeholders: vec![] };
    assert!(adapter.prepare(&garbage).is_err());
    let garbage = CompiledQuery { dialect: Dialect::MapreducePlan, text: "{}".into(), placeholders: vec![] };
    assert!(adapter.prepare(&garbage).is_err());
    adapter.close().unwrap();
    assert!(adapter.run(&bindings(&spec)).is_err());
}

#[test]
fn sql_interpreter_handles_general_selects() {
    let records = vec![sample_record()];
    let tables = sql::base_tables(&RelationalLayout::from_records(&records).unwrap());
    let run = |text: &str| sql::PreparedSql::parse(text).unwrap().run(&tables, &Bindings::new());
    let r = run("SELECT w.word AS word, CAST(COUNT(*) AS DOUBLE PRECISION) AS n \
                 FROM words AS w JOIN vocabulary v ON v.word_id = w.id \
                 GROUP BY w.word ORDER BY word DESC LIMIT 2")
    .unwrap();
    assert_eq!(r.entries, vec![("headache".to_string(), 1.0), ("car".to_string(), 1.0)]);
    let r = run("SELECT words.word, vocabulary.tf FROM words JOIN vocabulary \
                 ON vocabulary.word_id < words.id + 1 AND vocabulary.word_id >= words.id \
                 WHERE words.word <> 'car' ORDER BY word")
    .unwrap();
    assert_eq!(r.entries.len(), 2);
    assert!(run("SELECT nope FROM words").is_err());
    assert!(run("SELECT word, 1.0 FROM missing").is_err());
    assert!(run("SELECT word, (SELECT id FROM words) FROM words").is_err());
}

#[test]
fn dialect_parsing() {
    assert_eq!("sql".parse::<Dialect>().unwrap(), Dialect::AnsiSql);
    assert_eq!("MR".parse::<Dialect>().unwrap(), Dialect::MapreducePlan);
    assert_eq!("mapreduce_plan".parse::<Dialect>().unwrap(), Dialect::MapreducePlan);
    assert!("xml".parse::<Dialect>().is_err());
    assert_eq!(Dialect::MapreducePlan.extension(), "json");
}
