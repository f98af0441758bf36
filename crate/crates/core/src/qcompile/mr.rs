//! Map-reduce plans as a JSON envelope of expression strings, and an
//! interpreter that runs them against the document layout.
//!
//! A plan reads: keep documents passing `filter`; compute the `prepass`
//! aggregates over the kept documents (or the whole collection); for every
//! word of every kept document emit `(key, value)`; reduce each key's values
//! with `reduce`; then sort and cut per `finalize`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::expr::{apply, eval, parse_expr, BinOp, Env, Expr, Value};
use super::Bindings;
use crate::corpus::{TweetRecord, VocabularyEntry};
use crate::engine::{map_reduce, DocumentLayout, QuerySpec, TopKResult};
use crate::error::{Error, Result};
use crate::scoring::{LogBase, Scheme, StatsScope};

pub(crate) const DIALECT_TAG: &str = "mapreduce_plan";
const WORDS: &str = "w in doc.words";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapReducePlan {
    pub dialect: String,
    pub collection: String,
    pub query: String,
    pub scheme: String,
    pub placeholders: Vec<String>,
    pub filter: String,
    pub prepass: Prepass,
    pub map: MapStep,
    pub reduce: String,
    pub finalize: Finalize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prepass {
    /// `"selected"` (documents passing the filter) or `"collection"`.
    pub over: String,
    pub aggregates: Vec<Aggregate>,
    pub derived: Vec<Derived>,
}

/// `count()` or `sum(expr)` over documents, or over `for_each` words grouped
/// by `key` when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub for_each: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapStep {
    pub for_each: String,
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finalize {
    /// `"<key|value> <asc|desc>"` terms, most significant first.
    pub sort: Vec<String>,
    pub limit: usize,
}

fn filter_expr(spec: &QuerySpec) -> String {
    let mut terms = vec!["doc.gender == :pGender".to_string()];
    if spec.query.uses_dates() {
        terms.push("doc.date >= :pStartDate".into());
        terms.push("doc.date <= :pEndDate".into());
    }
    if spec.query.uses_geo() {
        terms.push("doc.geoLocation[0] >= :pStartX".into());
        terms.push("doc.geoLocation[0] <= :pEndX".into());
        terms.push("doc.geoLocation[1] >= :pStartY".into());
        terms.push("doc.geoLocation[1] <= :pEndY".into());
    }
    terms.join(" && ")
}

fn weight_expr(spec: &QuerySpec) -> String {
    let log = match spec.params.log_base {
        LogBase::Natural => "ln",
        LogBase::Base10 => "log10",
    };
    let tfidf = format!("(w.tf * (1.0 + {log}(N / df[w.word])))");
    match spec.scheme {
        Scheme::TfIdf => tfidf,
        Scheme::Okapi => format!(
            "{tfidf} * (({k1:?} + 1.0) / (w.tf + {k1:?} * (1.0 + {b:?} * (doc.lemmaTextLength / avgdl - 1.0))))",
            k1 = spec.params.k1,
            b = spec.params.b,
        ),
    }
}

pub(crate) fn plan(spec: &QuerySpec, placeholders: Vec<String>) -> MapReducePlan {
    let mut aggregates = vec![
        Aggregate { name: "N".into(), for_each: None, key: None, value: "count()".into() },
        Aggregate {
            name: "df".into(),
            for_each: Some(WORDS.into()),
            key: Some("w.word".into()),
            value: "count()".into(),
        },
    ];
    let mut derived = Vec::new();
    if spec.scheme == Scheme::Okapi {
        aggregates.push(Aggregate {
            name: "totalLength".into(),
            for_each: None,
            key: None,
            value: "sum(doc.lemmaTextLength)".into(),
        });
        derived.push(Derived { name: "avgdl".into(), value: "totalLength / N".into() });
    }
    MapReducePlan {
        dialect: DIALECT_TAG.into(),
        collection: "documents".into(),
        query: spec.query.to_string(),
        scheme: spec.scheme.to_string(),
        placeholders,
        filter: filter_expr(spec),
        prepass: Prepass {
            over: match spec.scope {
                StatsScope::Filtered => "selected".into(),
                StatsScope::Global => "collection".into(),
            },
            aggregates,
            derived,
        },
        map: MapStep { for_each: WORDS.into(), key: "w.word".into(), value: weight_expr(spec) },
        reduce: "sum(values)".into(),
        finalize: Finalize { sort: vec!["value desc".into(), "key asc".into()], limit: spec.k },
    }
}

pub(crate) fn render(plan: &MapReducePlan) -> String {
    let mut s = serde_json::to_string_pretty(plan).expect("plan serializes");
    s.push('\n');
    s
}

enum AggKind {
    Count,
    Sum(Expr),
}

struct CompiledAggregate {
    name: String,
    per_word: bool,
    key: Option<Expr>,
    kind: AggKind,
}

struct SortKey {
    by_value: bool,
    descending: bool,
}

/// A parsed plan ready for repeated execution.
pub(crate) struct PreparedPlan {
    placeholders: Vec<String>,
    filter: Expr,
    over_collection: bool,
    aggregates: Vec<CompiledAggregate>,
    derived: Vec<(String, Expr)>,
    map_key: Expr,
    map_value: Expr,
    sort: Vec<SortKey>,
    limit: usize,
}

fn words_loop(src: &str) -> Result<()> {
    let norm: Vec<&str> = src.split_whitespace().collect();
    if norm == ["w", "in", "doc.words"] {
        Ok(())
    } else {
        Err(Error::plan(format!("unsupported iteration `{src}`; expected `{WORDS}`")))
    }
}

fn aggregate_kind(src: &str) -> Result<AggKind> {
    match parse_expr(src)? {
        Expr::Call { name, args, star: false } if name == "count" && args.is_empty() => Ok(AggKind::Count),
        Expr::Call { name, mut args, star: false } if name == "sum" && args.len() == 1 => {
            Ok(AggKind::Sum(args.remove(0)))
        }
        _ => Err(Error::plan(format!("aggregate must be count() or sum(expr), got `{src}`"))),
    }
}

impl PreparedPlan {
    pub(crate) fn parse(text: &str) -> Result<Self> {
        let plan: MapReducePlan =
            serde_json::from_str(text).map_err(|e| Error::plan(format!("malformed plan: {e}")))?;
        if plan.dialect != DIALECT_TAG {
            return Err(Error::plan(format!("unexpected dialect `{}`", plan.dialect)));
        }
        let over_collection = match plan.prepass.over.as_str() {
            "selected" => false,
            "collection" => true,
            other => return Err(Error::plan(format!("unknown prepass source `{other}`"))),
        };
        let mut aggregates = Vec::new();
        for a in &plan.prepass.aggregates {
            if let Some(src) = &a.for_each {
                words_loop(src)?;
            }
            if a.key.is_some() && a.for_each.is_none() {
                return Err(Error::plan(format!("keyed aggregate `{}` needs for_each", a.name)));
            }
            aggregates.push(CompiledAggregate {
                name: a.name.clone(),
                per_word: a.for_each.is_some(),
                key: a.key.as_deref().map(parse_expr).transpose()?,
                kind: aggregate_kind(&a.value)?,
            });
        }
        let derived = plan
            .prepass
            .derived
            .iter()
            .map(|d| Ok((d.name.clone(), parse_expr(&d.value)?)))
            .collect::<Result<Vec<_>>>()?;
        words_loop(&plan.map.for_each)?;
        match parse_expr(&plan.reduce)? {
            Expr::Call { name, args, star: false }
                if name == "sum"
                    && matches!(args.as_slice(), [Expr::Column { table: None, name }] if name == "values") => {}
            _ => return Err(Error::plan(format!("unsupported reduce `{}`", plan.reduce))),
        }
        let sort = plan
            .finalize
            .sort
            .iter()
            .map(|term| {
                let parts: Vec<&str> = term.split_whitespace().collect();
                let (field, order) = match parts.as_slice() {
                    [f] => (*f, "asc"),
                    [f, o] => (*f, *o),
                    _ => return Err(Error::plan(format!("bad sort term `{term}`"))),
                };
                let by_value = match field {
                    "value" => true,
                    "key" => false,
                    _ => return Err(Error::plan(format!("bad sort field `{field}`"))),
                };
                let descending = match order.to_ascii_lowercase().as_str() {
                    "desc" => true,
                    "asc" => false,
                    _ => return Err(Error::plan(format!("bad sort order `{order}`"))),
                };
                Ok(SortKey { by_value, descending })
            })
            .collect::<Result<Vec<_>>>()?;
        let filter = parse_expr(&plan.filter)?;
        let map_key = parse_expr(&plan.map.key)?;
        let map_value = parse_expr(&plan.map.value)?;
        let mut used: Vec<String> = Vec::new();
        let mut visit = |e: &Expr| {
            if let Expr::Param(p) = e {
                if !used.contains(p) {
                    used.push(p.clone());
                }
            }
        };
        filter.walk(&mut visit);
        map_key.walk(&mut visit);
        map_value.walk(&mut visit);
        for (_, e) in &derived {
            e.walk(&mut visit);
        }
        for a in &aggregates {
            if let Some(k) = &a.key {
                k.walk(&mut visit);
            }
            if let AggKind::Sum(e) = &a.kind {
                e.walk(&mut visit);
            }
        }
        Ok(PreparedPlan {
            placeholders: used,
            filter,
            over_collection,
            aggregates,
            derived,
            map_key,
            map_value,
            sort,
            limit: plan.finalize.limit,
        })
    }

    /// Placeholders referenced by the plan's expressions.
    pub(crate) fn placeholders(&self) -> &[String] {
        &self.placeholders
    }

    pub(crate) fn run(&self, layout: &DocumentLayout, params: &Bindings) -> Result<TopKResult> {
        let docs = layout.documents();
        let mut selected = Vec::new();
        for doc in docs {
            let env = DocEnv { doc, word: None, vars: &Vars::default(), params };
            if eval(&self.filter, &env)?.is_true() {
                selected.push(doc);
            }
        }

        let mut vars = Vars::default();
        let source: Vec<&TweetRecord> = if self.over_collection { docs.iter().collect() } else { selected.clone() };
        for agg in &self.aggregates {
            self.prepass(agg, &source, &mut vars, params)?;
        }
        for (name, expr) in &self.derived {
            let env = DocEnv { doc: &EMPTY, word: None, vars: &vars, params };
            let v = eval(expr, &env)?;
            vars.scalars.insert(name.clone(), v);
        }

        let mut failure = None;
        let reduced = map_reduce(
            selected.iter().copied(),
            |doc, out| {
                for w in &doc.words {
                    if failure.is_some() {
                        return;
                    }
                    let env = DocEnv { doc, word: Some(w), vars: &vars, params };
                    match (eval(&self.map_key, &env), eval(&self.map_value, &env)) {
                        (Ok(Value::Text(k)), Ok(v)) => out.emit(k, v),
                        (Ok(k), Ok(_)) => failure = Some(Error::plan(format!("map key must be text, got {k}"))),
                        (Err(e), _) | (_, Err(e)) => failure = Some(e),
                    }
                }
            },
            |_, values| values.iter().try_fold(Value::Int(0), |acc, v| apply(BinOp::Add, &acc, v)),
        );
        if let Some(e) = failure {
            return Err(e);
        }

        let mut groups = Vec::with_capacity(reduced.len());
        for (key, value) in reduced {
            let word = key.to_string();
            let value = value?
                .as_f64()
                .ok_or_else(|| Error::plan("reduced value is not numeric"))?;
            groups.push((word, value));
        }
        groups.sort_by(|a, b| {
            for k in &self.sort {
                let o = if k.by_value { a.1.total_cmp(&b.1) } else { a.0.cmp(&b.0) };
                let o = if k.descending { o.reverse() } else { o };
                if o.is_ne() {
                    return o;
                }
            }
            std::cmp::Ordering::Equal
        });
        groups.truncate(self.limit);
        Ok(TopKResult { entries: groups, matched_docs: selected.len() as u64 })
    }

    fn prepass(&self, agg: &CompiledAggregate, docs: &[&TweetRecord], vars: &mut Vars, params: &Bindings) -> Result<()> {
        let step = |acc: Value, env: &DocEnv| -> Result<Value> {
            match &agg.kind {
                AggKind::Count => apply(BinOp::Add, &acc, &Value::Int(1)),
                AggKind::Sum(e) => apply(BinOp::Add, &acc, &eval(e, env)?),
            }
        };
        if !agg.per_word {
            let mut acc = Value::Int(0);
            for doc in docs {
                let env = DocEnv { doc, word: None, vars, params };
                acc = step(acc, &env)?;
            }
            vars.scalars.insert(agg.name.clone(), acc);
            return Ok(());
        }
        let mut table: HashMap<super::expr::Key, Value> = HashMap::new();
        let mut total = Value::Int(0);
        for doc in docs {
            for w in &doc.words {
                let env = DocEnv { doc, word: Some(w), vars, params };
                match &agg.key {
                    Some(k) => {
                        let key = eval(k, &env)?.key();
                        let acc = table.remove(&key).unwrap_or(Value::Int(0));
                        table.insert(key, step(acc, &env)?);
                    }
                    None => total = step(total, &env)?,
                }
            }
        }
        if agg.key.is_some() {
            vars.keyed.insert(agg.name.clone(), table);
        } else {
            vars.scalars.insert(agg.name.clone(), total);
        }
        Ok(())
    }
}

static EMPTY: std::sync::LazyLock<TweetRecord> = std::sync::LazyLock::new(|| TweetRecord {
    id: 0,
    raw_text: String::new(),
    clean_text: String::new(),
    lemma_text: String::new(),
    author: crate::corpus::Author {
        author_id: 0,
        first_name: String::new(),
        last_name: String::new(),
        age: 0,
        gender: crate::corpus::Gender::Male,
    },
    geo: crate::corpus::GeoPoint { x: 0.0, y: 0.0 },
    date: chrono::DateTime::UNIX_EPOCH,
    lemma_text_length: 0,
    words: Vec::new(),
});

#[derive(Default)]
struct Vars {
    scalars: HashMap<String, Value>,
    keyed: HashMap<String, HashMap<super::expr::Key, Value>>,
}

struct DocEnv<'a> {
    doc: &'a TweetRecord,
    word: Option<&'a VocabularyEntry>,
    vars: &'a Vars,
    params: &'a Bindings,
}

impl Env for DocEnv<'_> {
    fn column(&self, table: Option<&str>, name: &str) -> Result<Value> {
        let unknown = || Error::plan(format!("unknown field `{}{name}`", table.map(|t| format!("{t}.")).unwrap_or_default()));
        match table {
            Some("doc") => Ok(match name {
                "_id" => Value::Int(self.doc.id as i64),
                "gender" => Value::text(self.doc.author.gender.as_str()),
                "age" => Value::Int(self.doc.author.age.into()),
                "date" => Value::Timestamp(self.doc.date.timestamp()),
                "geoLocation" => Value::List(Arc::from(vec![
                    Value::Float(self.doc.geo.x),
                    Value::Float(self.doc.geo.y),
                ])),
                "lemmaTextLength" => Value::Int(self.doc.lemma_text_length as i64),
                "lemmaText" => Value::text(&self.doc.lemma_text),
                _ => return Err(unknown()),
            }),
            Some("w") => {
                let w = self.word.ok_or_else(|| Error::plan("`w` used outside a word loop"))?;
                Ok(match name {
                    "word" => Value::text(&w.word),
                    "tf" => Value::Float(w.tf),
                    "count" => Value::Int(w.count as i64),
                    _ => return Err(unknown()),
                })
            }
            None => self.vars.scalars.get(name).cloned().ok_or_else(unknown),
            Some(_) => Err(unknown()),
        }
    }

    fn param(&self, name: &str) -> Result<Value> {
        self.params
            .get(name)
            .cloned()
            .ok_or_else(|| Error::plan(format!("unbound placeholder :{name}")))
    }

    fn lookup(&self, name: &str, key: &Value) -> Option<Result<Value>> {
        let table = self.vars.keyed.get(name)?;
        Some(Ok(table.get(&key.key()).cloned().unwrap_or(Value::Null)))
    }
}
