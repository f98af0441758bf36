//! Timing harness: one unmeasured cold pass over the plan's queries, then a
//! fixed number of measured warm runs per query, for every scale factor,
//! scheme and storage target.
//!
//! Measured runs execute strictly one after another on the calling thread.
//! In-process engines keep no caches, so the cold pass is what primes them;
//! adapters for external systems with caches can deactivate them instead.

mod report;
mod sampler;
mod stats;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use crate::corpus::{self, Corpus, ScaleFactor};
use crate::engine::{
    execute, DocumentLayout, LayoutKind, QueryId, QuerySpec, RelationalLayout, StorageLayout, Strategy, TopKResult,
    DEFAULT_K,
};
use crate::error::{Error, Result};
use crate::preprocess::DEFAULT_TF_K;
use crate::scoring::{Scheme, SchemeParams, StatsScope};

pub use report::{
    aggregate, AggregateRow, BenchReport, RawRow, ReportFormat, Target, AGGREGATES_CSV, RAW_CSV, REPORT_JSON,
};
pub use sampler::ParameterSampler;
pub use stats::{stats, Summary};

pub const DEFAULT_RUNS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub scale_factors: Vec<ScaleFactor>,
    pub queries: Vec<QueryId>,
    pub schemes: Vec<Scheme>,
    pub layouts: Vec<LayoutKind>,
    /// Strategies for the document layout; the relational layout has one
    /// pipeline and ignores this list.
    pub strategies: Vec<Strategy>,
    pub runs_per_query: usize,
    pub seed: u64,
    /// Reuse one drawn binding for every run of a query instead of drawing
    /// fresh parameters per run.
    pub fixed_binding: bool,
    pub k: usize,
    pub params: SchemeParams,
    pub scope: StatsScope,
}

impl Default for BenchPlan {
    fn default() -> Self {
        BenchPlan {
            scale_factors: vec![ScaleFactor::new(0.01).expect("valid")],
            queries: QueryId::ALL.to_vec(),
            schemes: Scheme::ALL.to_vec(),
            layouts: vec![LayoutKind::Relational, LayoutKind::Document],
            strategies: vec![Strategy::Na, Strategy::Mr],
            runs_per_query: DEFAULT_RUNS,
            seed: 42,
            fixed_binding: false,
            k: DEFAULT_K,
            params: SchemeParams::default(),
            scope: StatsScope::default(),
        }
    }
}

impl BenchPlan {
    pub fn validate(&self) -> Result<()> {
        if self.runs_per_query == 0 {
            return Err(Error::invalid("runs per query must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        for (name, empty) in [
            ("scale factors", self.scale_factors.is_empty()),
            ("queries", self.queries.is_empty()),
            ("schemes", self.schemes.is_empty()),
            ("layouts", self.layouts.is_empty()),
        ] {
            if empty {
                return Err(Error::invalid(format!("no {name} selected")));
            }
        }
        if self.layouts.contains(&LayoutKind::Document) && self.strategies.is_empty() {
            return Err(Error::invalid("document layout selected without a strategy"));
        }
        self.params.validate()
    }

    /// Storage targets in run order. Native aggregation only computes TF-IDF,
    /// so okapi pairs it with nothing.
    pub fn targets(&self, scheme: Scheme) -> Vec<Target> {
        let mut out = Vec::new();
        for &layout in &self.layouts {
            match layout {
                LayoutKind::Relational => out.push(Target::RELATIONAL),
                LayoutKind::Document => {
                    for &s in &self.strategies {
                        if !(s == Strategy::Na && scheme == Scheme::Okapi) {
                            out.push(Target::document(s));
                        }
                    }
                }
            }
        }
        out.dedup();
        out
    }

    /// Number of (scale factor, scheme, target) configurations.
    pub fn configuration_count(&self) -> usize {
        self.scale_factors.len() * self.schemes.iter().map(|&s| self.targets(s).len()).sum::<usize>()
    }

    fn template(&self) -> QuerySpec {
        let mut t = QuerySpec::q1(crate::corpus::Gender::Male);
        t.k = self.k;
        t.params = self.params;
        t.scope = self.scope;
        t
    }
}

/// Supplies the corpus for each scale factor.
pub trait CorpusSource {
    /// Cheap availability check, run for every scale factor before timing.
    fn check(&self, sf: ScaleFactor) -> Result<()>;

    fn corpus(&mut self, sf: ScaleFactor) -> Result<Corpus>;
}

/// Generates corpora on demand.
#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub seed: u64,
}

impl CorpusSource for GeneratedCorpus {
    fn check(&self, sf: ScaleFactor) -> Result<()> {
        corpus::generate(sf, self.seed).map(|_| ())
    }

    fn corpus(&mut self, sf: ScaleFactor) -> Result<Corpus> {
        Corpus::new(corpus::generate(sf, self.seed)?.collect())
    }
}

/// Loads one JSON Lines file per scale factor.
#[derive(Debug, Clone, Default)]
pub struct CorpusFiles {
    files: Vec<(ScaleFactor, PathBuf)>,
    k: f64,
}

impl CorpusFiles {
    pub fn new(files: Vec<(ScaleFactor, PathBuf)>) -> Self {
        CorpusFiles { files, k: DEFAULT_TF_K }
    }

    /// Term-frequency offset for records that still need preprocessing.
    pub fn with_tf_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    fn path(&self, sf: ScaleFactor) -> Result<&PathBuf> {
        self.files
            .iter()
            .find(|(s, _)| *s == sf)
            .map(|(_, p)| p)
            .ok_or_else(|| Error::Setup(format!("no corpus file for scale factor {sf}")))
    }
}

impl CorpusSource for CorpusFiles {
    fn check(&self, sf: ScaleFactor) -> Result<()> {
        let path = self.path(sf)?;
        if path.is_file() {
            Ok(())
        } else {
            Err(Error::Setup(format!("corpus file {} not found", path.display())))
        }
    }

    fn corpus(&mut self, sf: ScaleFactor) -> Result<Corpus> {
        let path = self.path(sf)?.clone();
        corpus::load_with(&path, self.k)
    }
}

/// Runs queries against a loaded corpus.
pub trait QueryEngine {
    /// Loads `corpus` into `layout`, replacing the previous load.
    fn load(&mut self, layout: LayoutKind, corpus: &Corpus) -> Result<()>;

    fn execute(&mut self, spec: &QuerySpec, strategy: Strategy) -> Result<TopKResult>;
}

/// The in-process storage layouts.
#[derive(Default)]
pub struct InProcessEngine {
    layout: Option<Box<dyn StorageLayout>>,
}

impl QueryEngine for InProcessEngine {
    fn load(&mut self, layout: LayoutKind, corpus: &Corpus) -> Result<()> {
        self.layout = None;
        self.layout = Some(match layout {
            LayoutKind::Relational => Box::new(RelationalLayout::build(corpus)?),
            LayoutKind::Document => Box::new(DocumentLayout::build(corpus)?),
        });
        Ok(())
    }

    fn execute(&mut self, spec: &QuerySpec, strategy: Strategy) -> Result<TopKResult> {
        let layout = self.layout.as_deref().ok_or_else(|| Error::Setup("no corpus loaded".into()))?;
        execute(layout, spec, strategy)
    }
}

/// Source of elapsed time.
pub trait Clock {
    /// Time since an arbitrary fixed origin; never decreases.
    fn now(&mut self) -> Duration;
}

#[derive(Debug, Clone, Copy)]
pub struct MonotonicClock {
    origin: Instant,
}

impl Default for MonotonicClock {
    fn default() -> Self {
        MonotonicClock { origin: Instant::now() }
    }
}

impl Clock for MonotonicClock {
    fn now(&mut self) -> Duration {
        self.origin.elapsed()
    }
}

/// Advances by a fixed step on every reading, so each measured interval
/// equals the step.
#[derive(Debug, Clone, Copy)]
pub struct FakeClock {
    step: Duration,
    t: Duration,
}

impl FakeClock {
    pub fn constant(step: Duration) -> Self {
        FakeClock { step, t: Duration::ZERO }
    }
}

impl Clock for FakeClock {
    fn now(&mut self) -> Duration {
        self.t += self.step;
        self.t
    }
}

/// Runs `plan` with the in-process engine and a monotonic clock.
pub fn run(plan: &BenchPlan, source: &mut dyn CorpusSource) -> Result<BenchReport> {
    run_with(plan, source, &mut InProcessEngine::default(), &mut MonotonicClock::default())
}

/// Runs `plan` against `engine`, timing with `clock`.
///
/// Every scale factor's corpus is checked before any timing starts. For
/// each (scale factor, scheme, target) the engine is loaded, each query runs
/// once unmeasured, then each query runs `runs_per_query` measured times. An
/// engine error records a failure row and abandons the rest of that
/// configuration.
pub fn run_with(
    plan: &BenchPlan,
    source: &mut dyn CorpusSource,
    engine: &mut dyn QueryEngine,
    clock: &mut dyn Clock,
) -> Result<BenchReport> {
    plan.validate()?;
    for &sf in &plan.scale_factors {
        source.check(sf)?;
    }
    let template = plan.template();
    let mut raw = Vec::new();
    for &sf in &plan.scale_factors {
        let corpus = source.corpus(sf)?;
        let sf_bits = sf.value().to_bits();
        let mut loaded: Option<LayoutKind> = None;
        for &scheme in &plan.schemes {
            let template = QuerySpec { scheme, ..template.clone() };
            // Parameter sequences per query, identical for every target.
            let bindings: Vec<(QueryId, Vec<QuerySpec>)> = plan
                .queries
                .iter()
                .map(|&q| {
                    let mut sampler = ParameterSampler::for_stream(plan.seed, sf_bits, q);
                    let specs = if plan.fixed_binding {
                        vec![sampler.spec(q, &template); plan.runs_per_query]
                    } else {
                        (0..plan.runs_per_query).map(|_| sampler.spec(q, &template)).collect()
                    };
                    (q, specs)
                })
                .collect();

            for target in plan.targets(scheme) {
                if loaded != Some(target.layout) {
                    engine.load(target.layout, &corpus)?;
                    loaded = Some(target.layout);
                }
                let strategy = target.strategy.unwrap_or(Strategy::Mr);
                let row = |query, run_index, outcome: std::result::Result<(f64, u64), String>| {
                    let (elapsed_ms, matched_docs, error) = match outcome {
                        Ok((ms, m)) => (Some(ms), Some(m), None),
                        Err(e) => (None, None, Some(e)),
                    };
                    RawRow {
                        sf: sf.value(),
                        query,
                        scheme,
                        layout: target.layout,
                        strategy: target.strategy,
                        run_index,
                        elapsed_ms,
                        matched_docs,
                        error,
                    }
                };

                let mut failed = false;
                for (q, specs) in &bindings {
                    if let Err(e) = engine.execute(&specs[0], strategy) {
                        raw.push(row(*q, 0, Err(format!("cold pass: {e}"))));
                        failed = true;
                        break;
                    }
                }
                if failed {
                    continue;
                }
                'config: for (q, specs) in &bindings {
                    for (i, spec) in specs.iter().enumerate() {
                        let start = clock.now();
                        let outcome = engine.execute(spec, strategy);
                        let elapsed = clock.now().saturating_sub(start);
                        match outcome {
                            Ok(r) => raw.push(row(*q, i, Ok((elapsed.as_secs_f64() * 1e3, r.matched_docs)))),
                            Err(e) => {
                                raw.push(row(*q, i, Err(e.to_string())));
                                break 'config;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(BenchReport::from_raw(raw))
}

#[cfg(test)]
mod tests;
