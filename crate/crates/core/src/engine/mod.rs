//! Top-k keyword queries over two storage layouts.
//!
//! Q1 filters on gender; Q2 adds a closed date range; Q3 adds a closed
//! geographic box; Q4 applies all three. Every path sums per-document weights
//! in ascending tweet-id order, so all layouts and strategies return
//! bit-identical results for the same input.

mod document;
mod mapreduce;
mod oracle;
mod relational;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::Gender;
use crate::error::{Error, Result};
use crate::scoring::{Scheme, SchemeParams, StatsScope};

pub use document::DocumentLayout;
pub use mapreduce::{map_reduce, Emitter};
pub use oracle::brute_force_oracle;
pub use relational::{
    AuthorTable, DocumentAuthorTable, DocumentTable, GenderTable, GeoTable, RelationalLayout,
    VocabularyTable, WordTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QueryId {
    Q1,
    Q2,
    Q3,
    Q4,
}

impl QueryId {
    pub const ALL: [QueryId; 4] = [QueryId::Q1, QueryId::Q2, QueryId::Q3, QueryId::Q4];

    pub fn uses_dates(self) -> bool {
        matches!(self, QueryId::Q2 | QueryId::Q4)
    }

    pub fn uses_geo(self) -> bool {
        matches!(self, QueryId::Q3 | QueryId::Q4)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QueryId::Q1 => "Q1",
            QueryId::Q2 => "Q2",
            QueryId::Q3 => "Q3",
            QueryId::Q4 => "Q4",
        }
    }
}

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "Q1" => Ok(QueryId::Q1),
            "Q2" => Ok(QueryId::Q2),
            "Q3" => Ok(QueryId::Q3),
            "Q4" => Ok(QueryId::Q4),
            other => Err(Error::invalid(format!("unknown query `{other}`"))),
        }
    }
}

/// Closed interval `[start, end]` on the tweet date.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateRange {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl DateRange {
    pub fn contains_secs(&self, secs: i64) -> bool {
        self.start.timestamp() <= secs && secs <= self.end.timestamp()
    }
}

/// Closed box `[start_x, end_x] x [start_y, end_y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoBox {
    pub start_x: f64,
    pub end_x: f64,
    pub start_y: f64,
    pub end_y: f64,
}

impl GeoBox {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.start_x <= x && x <= self.end_x && self.start_y <= y && y <= self.end_y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    pub query: QueryId,
    pub gender: Gender,
    pub date_range: Option<DateRange>,
    pub geo_box: Option<GeoBox>,
    pub k: usize,
    pub scheme: Scheme,
    pub params: SchemeParams,
    pub scope: StatsScope,
}

pub const DEFAULT_K: usize = 10;

impl QuerySpec {
    fn base(query: QueryId, gender: Gender) -> Self {
        QuerySpec {
            query,
            gender,
            date_range: None,
            geo_box: None,
            k: DEFAULT_K,
            scheme: Scheme::TfIdf,
            params: SchemeParams::default(),
            scope: StatsScope::Filtered,
        }
    }

    pub fn q1(gender: Gender) -> Self {
        Self::base(QueryId::Q1, gender)
    }

    pub fn q2(gender: Gender, dates: DateRange) -> Self {
        QuerySpec { date_range: Some(dates), ..Self::base(QueryId::Q2, gender) }
    }

    pub fn q3(gender: Gender, geo: GeoBox) -> Self {
        QuerySpec { geo_box: Some(geo), ..Self::base(QueryId::Q3, gender) }
    }

    pub fn q4(gender: Gender, dates: DateRange, geo: GeoBox) -> Self {
        QuerySpec {
            date_range: Some(dates),
            geo_box: Some(geo),
            ..Self::base(QueryId::Q4, gender)
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_params(mut self, params: SchemeParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_scope(mut self, scope: StatsScope) -> Self {
        self.scope = scope;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        if self.query.uses_dates() != self.date_range.is_some() {
            return Err(Error::invalid(format!(
                "{} {} a date range",
                self.query,
                if self.query.uses_dates() { "requires" } else { "does not take" }
            )));
        }
        if self.query.uses_geo() != self.geo_box.is_some() {
            return Err(Error::invalid(format!(
                "{} {} a geo box",
                self.query,
                if self.query.uses_geo() { "requires" } else { "does not take" }
            )));
        }
        if let Some(d) = &self.date_range {
            if d.start >= d.end {
                return Err(Error::invalid("pStartDate must precede pEndDate"));
            }
        }
        if let Some(g) = &self.geo_box {
            let finite = [g.start_x, g.end_x, g.start_y, g.end_y].iter().all(|v| v.is_finite());
            if !finite || g.start_x >= g.end_x || g.start_y >= g.end_y {
                return Err(Error::invalid("geo box needs pStartX < pEndX and pStartY < pEndY"));
            }
        }
        self.params.validate()
    }

    /// The conjunction of active constraints on one document.
    pub(crate) fn selects(&self, gender: Gender, date_secs: i64, x: f64, y: f64) -> bool {
        gender == self.gender
            && self.date_range.is_none_or(|d| d.contains_secs(date_secs))
            && self.geo_box.is_none_or(|g| g.contains(x, y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Native aggregation: one fused filter / unwind / group pipeline.
    Na,
    /// Explicit map, shuffle and reduce phases.
    Mr,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Na => "na",
            Strategy::Mr => "mr",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "na" => Ok(Strategy::Na),
            "mr" => Ok(Strategy::Mr),
            other => Err(Error::invalid(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutKind {
    Relational,
    Document,
}

impl LayoutKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LayoutKind::Relational => "relational",
            LayoutKind::Document => "document",
        }
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayoutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relational" => Ok(LayoutKind::Relational),
            "document" => Ok(LayoutKind::Document),
            other => Err(Error::invalid(format!("unknown layout `{other}`"))),
        }
    }
}

/// Ranked keywords plus the number of documents that passed the filter.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TopKResult {
    pub entries: Vec<(String, f64)>,
    pub matched_docs: u64,
}

/// Weight descending, then word ascending.
pub fn rank_order(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

pub(crate) fn top_k(mut groups: Vec<(String, f64)>, k: usize, matched_docs: u64) -> TopKResult {
    if groups.len() > k {
        groups.select_nth_unstable_by(k - 1, rank_order);
        groups.truncate(k);
    }
    groups.sort_unstable_by(rank_order);
    TopKResult { entries: groups, matched_docs }
}

/// A storage layout able to answer the four queries.
pub trait StorageLayout: Send + Sync {
    fn kind(&self) -> LayoutKind;

    fn document_count(&self) -> usize;

    /// Runs a validated spec. Use [`execute`] for the checked entry point.
    fn run(&self, spec: &QuerySpec, strategy: Strategy) -> Result<TopKResult>;
}

/// Validates `spec` and runs it on `layout`.
///
/// The relational layout always uses its join / select / aggregate pipeline
/// and ignores `strategy`. The document layout honours it; native
/// aggregation supports TF-IDF only.
pub fn execute(layout: &dyn StorageLayout, spec: &QuerySpec, strategy: Strategy) -> Result<TopKResult> {
    spec.validate()?;
    layout.run(spec, strategy)
}

#[cfg(test)]
mod tests;
