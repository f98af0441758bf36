//! Portable query artifacts: parameterized SQL and map-reduce plans.
//!
//! [`to_sql`] and [`to_mapreduce`] are pure functions of the spec. Constraint
//! values stay out of the text as named placeholders; [`bindings`] produces
//! the matching values. [`ReferenceAdapter`] interprets both artifact kinds
//! in-process so compiled output can be checked against the engines.

pub mod expr;
mod mr;
mod sql;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::corpus::TweetRecord;
use crate::engine::{DocumentLayout, QuerySpec, RelationalLayout, TopKResult};
use crate::error::{Error, Result};

pub use expr::Value;
pub use mr::{Aggregate, Derived, Finalize, MapReducePlan, MapStep, Prepass};

/// Placeholder values by name, without the leading colon.
pub type Bindings = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dialect {
    AnsiSql,
    MapreducePlan,
}

impl Dialect {
    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::AnsiSql => "sql",
            Dialect::MapreducePlan => "mr",
        }
    }

    /// Conventional file extension of the rendered artifact.
    pub fn extension(self) -> &'static str {
        match self {
            Dialect::AnsiSql => "sql",
            Dialect::MapreducePlan => "json",
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dialect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sql" | "ansi_sql" => Ok(Dialect::AnsiSql),
            "mr" | "mapreduce" | "mapreduce_plan" => Ok(Dialect::MapreducePlan),
            other => Err(Error::invalid(format!("unknown dialect `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledQuery {
    pub dialect: Dialect,
    pub text: String,
    pub placeholders: Vec<String>,
}

/// Placeholder names for the constraints `spec` activates, in clause order.
pub fn active_placeholders(spec: &QuerySpec) -> Vec<&'static str> {
    let mut out = vec!["pGender"];
    if spec.query.uses_dates() {
        out.extend(["pStartDate", "pEndDate"]);
    }
    if spec.query.uses_geo() {
        out.extend(["pStartX", "pEndX", "pStartY", "pEndY"]);
    }
    out
}

/// Values for every active placeholder of `spec`.
pub fn bindings(spec: &QuerySpec) -> Bindings {
    let mut b = Bindings::new();
    b.insert("pGender".into(), Value::text(spec.gender.as_str()));
    if let Some(d) = &spec.date_range {
        b.insert("pStartDate".into(), Value::Timestamp(d.start.timestamp()));
        b.insert("pEndDate".into(), Value::Timestamp(d.end.timestamp()));
    }
    if let Some(g) = &spec.geo_box {
        b.insert("pStartX".into(), Value::Float(g.start_x));
        b.insert("pEndX".into(), Value::Float(g.end_x));
        b.insert("pStartY".into(), Value::Float(g.start_y));
        b.insert("pEndY".into(), Value::Float(g.end_y));
    }
    b
}

fn placeholders(spec: &QuerySpec) -> Vec<String> {
    active_placeholders(spec).into_iter().map(String::from).collect()
}

pub fn to_sql(spec: &QuerySpec) -> Result<CompiledQuery> {
    spec.validate()?;
    Ok(CompiledQuery {
        dialect: Dialect::AnsiSql,
        text: sql::render(spec),
        placeholders: placeholders(spec),
    })
}

/// The structured plan behind [`to_mapreduce`].
pub fn mapreduce_plan(spec: &QuerySpec) -> Result<MapReducePlan> {
    spec.validate()?;
    Ok(mr::plan(spec, placeholders(spec)))
}

pub fn to_mapreduce(spec: &QuerySpec) -> Result<CompiledQuery> {
    let plan = mapreduce_plan(spec)?;
    Ok(CompiledQuery {
        dialect: Dialect::MapreducePlan,
        text: mr::render(&plan),
        placeholders: plan.placeholders,
    })
}

pub fn compile(spec: &QuerySpec, dialect: Dialect) -> Result<CompiledQuery> {
    match dialect {
        Dialect::AnsiSql => to_sql(spec),
        Dialect::MapreducePlan => to_mapreduce(spec),
    }
}

/// A system able to run compiled queries.
///
/// `run` may be called any number of times after one `prepare`. Adapters for
/// servers with caches should deactivate or prime them in `prepare`.
pub trait BackendAdapter {
    fn prepare(&mut self, query: &CompiledQuery) -> Result<()>;

    fn run(&mut self, bindings: &Bindings) -> Result<(TopKResult, Duration)>;

    fn close(&mut self) -> Result<()>;
}

enum Prepared {
    Sql(sql::PreparedSql),
    Plan(mr::PreparedPlan),
}

/// In-process adapter: SQL runs over the relational tables, plans over the
/// document collection.
///
/// SQL results carry the matched-document count in their third column, so a
/// selection whose documents contain no words at all reports zero.
pub struct ReferenceAdapter {
    tables: HashMap<String, sql::Relation>,
    documents: DocumentLayout,
    prepared: Option<(Prepared, Vec<String>)>,
}

impl ReferenceAdapter {
    pub fn new(records: &[TweetRecord]) -> Result<Self> {
        let relational = RelationalLayout::from_records(records)?;
        Ok(ReferenceAdapter {
            tables: sql::base_tables(&relational),
            documents: DocumentLayout::from_records(records.to_vec())?,
            prepared: None,
        })
    }
}

impl BackendAdapter for ReferenceAdapter {
    fn prepare(&mut self, query: &CompiledQuery) -> Result<()> {
        let (prepared, found) = match query.dialect {
            Dialect::AnsiSql => {
                let p = sql::PreparedSql::parse(&query.text)?;
                let found = p.placeholders();
                (Prepared::Sql(p), found)
            }
            Dialect::MapreducePlan => {
                let p = mr::PreparedPlan::parse(&query.text)?;
                let found = p.placeholders().to_vec();
                (Prepared::Plan(p), found)
            }
        };
        let mut sorted_found = found;
        sorted_found.sort();
        let mut declared = query.placeholders.clone();
        declared.sort();
        if sorted_found != declared {
            return Err(Error::plan(format!(
                "text uses placeholders {sorted_found:?} but declares {declared:?}"
            )));
        }
        self.prepared = Some((prepared, query.placeholders.clone()));
        Ok(())
    }

    fn run(&mut self, bindings: &Bindings) -> Result<(TopKResult, Duration)> {
        let (prepared, names) = self
            .prepared
            .as_ref()
            .ok_or_else(|| Error::plan("run before prepare"))?;
        for name in names {
            if !bindings.contains_key(name) {
                return Err(Error::plan(format!("missing binding :{name}")));
            }
        }
        if let Some(extra) = bindings.keys().find(|k| !names.contains(k)) {
            return Err(Error::plan(format!("unexpected binding :{extra}")));
        }
        let start = Instant::now();
        let result = match prepared {
            Prepared::Sql(p) => p.run(&self.tables, bindings)?,
            Prepared::Plan(p) => p.run(&self.documents, bindings)?,
        };
        Ok((result, start.elapsed()))
    }

    fn close(&mut self) -> Result<()> {
        self.prepared = None;
        Ok(())
    }
}

#[cfg(test)]
mod tests;
