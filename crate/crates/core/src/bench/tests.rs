use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use super::*;

/// Wraps the in-process engine and records every call.
#[derive(Default)]
struct Recording {
    inner: InProcessEngine,
    calls: Rc<RefCell<Vec<(LayoutKind, QuerySpec, Strategy)>>>,
    layout: Option<LayoutKind>,
    fail_on: Option<(QueryId, usize)>,
}

impl QueryEngine for Recording {
    fn load(&mut self, layout: LayoutKind, corpus: &Corpus) -> Result<()> {
        self.layout = Some(layout);
        self.inner.load(layout, corpus)
    }

    fn execute(&mut self, spec: &QuerySpec, strategy: Strategy) -> Result<TopKResult> {
        let mut calls = self.calls.borrow_mut();
        calls.push((self.layout.unwrap(), spec.clone(), strategy));
        if let Some((q, n)) = self.fail_on {
            if spec.query == q && calls.iter().filter(|c| c.1.query == q).count() > n {
                return Err(Error::Setup("injected".into()));
            }
        }
        self.inner.execute(spec, strategy)
    }
}

fn small_plan(runs: usize) -> BenchPlan {
    BenchPlan {
        scale_factors: vec![ScaleFactor::new(0.0002).unwrap()],
        runs_per_query: runs,
        seed: 7,
        ..BenchPlan::default()
    }
}

#[test]
fn targets_skip_native_okapi() {
    let plan = BenchPlan::default();
    assert_eq!(
        plan.targets(Scheme::TfIdf),
        vec![Target::RELATIONAL, Target::document(Strategy::Na), Target::document(Strategy::Mr)]
    );
    assert_eq!(plan.targets(Scheme::Okapi), vec![Target::RELATIONAL, Target::document(Strategy::Mr)]);
    assert_eq!(plan.configuration_count(), 5);
}

#[test]
fn plan_validation() {
    assert!(small_plan(0).validate().is_err());
    assert!(BenchPlan { queries: vec![], ..small_plan(1) }.validate().is_err());
    assert!(BenchPlan { strategies: vec![], ..small_plan(1) }.validate().is_err());
    assert!(BenchPlan { strategies: vec![], layouts: vec![LayoutKind::Relational], ..small_plan(1) }
        .validate()
        .is_ok());
    assert!(BenchPlan { k: 0, ..small_plan(1) }.validate().is_err());
}

#[test]
fn one_cold_pass_then_measured_runs() {
    let plan = small_plan(5);
    let mut engine = Recording::default();
    let calls = engine.calls.clone();
    let mut clock = FakeClock::constant(Duration::from_micros(1500));
    let report = run_with(&plan, &mut GeneratedCorpus { seed: 1 }, &mut engine, &mut clock).unwrap();

    let configs = plan.configuration_count();
    assert_eq!(report.raw.len(), configs * 4 * 5);
    assert_eq!(calls.borrow().len(), configs * (4 + 4 * 5));
    assert_eq!(report.aggregates.len(), configs * 4);
    for a in &report.aggregates {
        assert_eq!(a.runs, 5);
        assert_eq!(a.mean_ms, 1.5);
        assert_eq!(a.stddev_ms, 0.0);
    }
    // Each configuration starts with one call per query before any repeats.
    let calls = calls.borrow();
    for chunk in calls.chunks(4 + 20) {
        let cold: Vec<QueryId> = chunk[..4].iter().map(|c| c.1.query).collect();
        assert_eq!(cold, QueryId::ALL);
        assert!(chunk[4..9].iter().all(|c| c.1.query == QueryId::Q1));
    }
    assert!(calls.iter().all(|c| !(c.2 == Strategy::Na && c.1.scheme == Scheme::Okapi)));
}

#[test]
fn parameters_fresh_or_fixed_and_shared_across_targets() {
    let run_calls = |fixed| {
        let plan = BenchPlan { fixed_binding: fixed, ..small_plan(6) };
        let mut engine = Recording::default();
        let calls = engine.calls.clone();
        run_with(&plan, &mut GeneratedCorpus { seed: 1 }, &mut engine, &mut FakeClock::constant(Duration::ZERO))
            .unwrap();
        let calls = calls.borrow().clone();
        calls
    };
    let fresh = run_calls(false);
    let mut per_target: HashMap<(LayoutKind, Strategy, Scheme), Vec<QuerySpec>> = HashMap::new();
    for (layout, spec, strategy) in &fresh {
        per_target.entry((*layout, *strategy, spec.scheme)).or_default().push(spec.clone());
    }
    let seqs: Vec<_> = per_target
        .iter()
        .filter(|(k, _)| k.2 == Scheme::TfIdf)
        .map(|(_, v)| v.clone())
        .collect();
    assert!(seqs.windows(2).all(|w| w[0] == w[1]));
    let q4: Vec<_> = seqs[0].iter().filter(|s| s.query == QueryId::Q4).collect();
    assert!(q4.windows(2).any(|w| w[0] != w[1]));

    let fixed = run_calls(true);
    let q4: Vec<_> = fixed.iter().filter(|c| c.1.query == QueryId::Q4).map(|c| &c.1).collect();
    assert!(q4.windows(2).all(|w| w[0].date_range == w[1].date_range && w[0].geo_box == w[1].geo_box));

    assert_eq!(run_calls(false), fresh);
}

#[test]
fn engine_error_aborts_configuration() {
    let plan = BenchPlan {
        schemes: vec![Scheme::TfIdf],
        layouts: vec![LayoutKind::Relational],
        ..small_plan(4)
    };
    let mut engine = Recording { fail_on: Some((QueryId::Q2, 2)), ..Default::default() };
    let report =
        run_with(&plan, &mut GeneratedCorpus { seed: 1 }, &mut engine, &mut FakeClock::constant(Duration::ZERO))
            .unwrap();
    // Q1: 4 runs; Q2: cold pass + 1 measured succeed, second measured fails.
    let failures: Vec<_> = report.raw.iter().filter(|r| r.error.is_some()).collect();
    assert_eq!(failures.len(), 1);
    assert_eq!((failures[0].query, failures[0].run_index), (QueryId::Q2, 1));
    assert_eq!(report.raw.len(), 4 + 2);
    assert!(report.raw.iter().all(|r| r.query <= QueryId::Q2));
    assert_eq!(report.aggregates.len(), 2);
}

#[test]
fn missing_corpus_fails_before_timing() {
    let plan = BenchPlan {
        scale_factors: vec![ScaleFactor::new(0.0002).unwrap(), ScaleFactor::new(0.5).unwrap()],
        ..small_plan(2)
    };
    let mut source = CorpusFiles::new(vec![(ScaleFactor::new(0.0002).unwrap(), "/nonexistent/a.jsonl".into())]);
    let mut engine = Recording::default();
    let calls = engine.calls.clone();
    let err = run_with(&plan, &mut source, &mut engine, &mut MonotonicClock::default()).unwrap_err();
    assert!(matches!(err, Error::Setup(_)));
    assert!(calls.borrow().is_empty());
}

#[test]
fn single_run_is_degenerate() {
    let plan = BenchPlan { schemes: vec![Scheme::Okapi], ..small_plan(1) };
    let report = run(&plan, &mut GeneratedCorpus { seed: 3 }).unwrap();
    assert!(report.aggregates.iter().all(|a| a.degenerate && a.stddev_ms == 0.0 && a.runs == 1));
}

#[test]
fn report_round_trips() {
    let plan = BenchPlan { queries: vec![QueryId::Q1, QueryId::Q3], ..small_plan(3) };
    let report = run(&plan, &mut GeneratedCorpus { seed: 3 }).unwrap();
    assert_eq!(report.aggregates, aggregate(&report.raw));

    let mut csv = Vec::new();
    report.write_raw_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv.clone()).unwrap();
    assert!(text.starts_with("sf,query,scheme,layout,strategy,run_index,elapsed_ms,matched_docs,error\n"));
    assert!(text.contains(",relational,-,"));
    assert_eq!(BenchReport::read_raw_csv(csv.as_slice()).unwrap(), report);

    let json = report.to_json();
    assert_eq!(BenchReport::from_json(&json).unwrap(), report);

    let dir = tempfile::tempdir().unwrap();
    let files = report.save(dir.path(), ReportFormat::Csv).unwrap();
    assert_eq!(files.len(), 2);
    assert_eq!(BenchReport::load(&files[0]).unwrap(), report);
    let files = report.save(dir.path(), ReportFormat::Json).unwrap();
    assert_eq!(BenchReport::load(&files[0]).unwrap(), report);
}

#[test]
fn matched_docs_recorded() {
    let plan = BenchPlan { queries: vec![QueryId::Q1], schemes: vec![Scheme::TfIdf], ..small_plan(2) };
    let report = run(&plan, &mut GeneratedCorpus { seed: 3 }).unwrap();
    let total = 200u64;
    for r in &report.raw {
        assert_eq!(r.matched_docs, Some(total / 2), "{r:?}");
    }
}
