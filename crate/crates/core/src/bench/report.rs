//! Benchmark reports: raw per-run rows, per-query aggregates, CSV and JSON.
//!
//! CSV output is two files. `raw.csv` has one row per measured run (or per
//! failure) with columns `sf,query,scheme,layout,strategy,run_index,
//! elapsed_ms,matched_docs,error`; `aggregates.csv` has
//! `sf,query,scheme,layout,strategy,runs,mean_ms,stddev_ms,degenerate`.
//! The relational layout has no strategy and is written `-`. JSON output
//! nests runs under their query and queries under their configuration.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::stats::stats;
use crate::engine::{LayoutKind, QueryId, Strategy};
use crate::error::{Error, Result};
use crate::scoring::Scheme;

pub const RAW_CSV: &str = "raw.csv";
pub const AGGREGATES_CSV: &str = "aggregates.csv";
pub const REPORT_JSON: &str = "report.json";

mod strategy_field {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::engine::Strategy;

    pub fn serialize<S: Serializer>(v: &Option<Strategy>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(v.map_or("-", Strategy::as_str))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Strategy>, D::Error> {
        let s = String::deserialize(d)?;
        if s == "-" {
            return Ok(None);
        }
        s.parse().map(Some).map_err(serde::de::Error::custom)
    }
}

/// One storage configuration under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Target {
    pub layout: LayoutKind,
    #[serde(with = "strategy_field")]
    pub strategy: Option<Strategy>,
}

impl Target {
    pub const RELATIONAL: Target = Target { layout: LayoutKind::Relational, strategy: None };

    pub fn document(strategy: Strategy) -> Self {
        Target { layout: LayoutKind::Document, strategy: Some(strategy) }
    }

    pub fn strategy_label(&self) -> &'static str {
        self.strategy.map_or("-", Strategy::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub sf: f64,
    pub query: QueryId,
    pub scheme: Scheme,
    pub layout: LayoutKind,
    #[serde(with = "strategy_field")]
    pub strategy: Option<Strategy>,
    pub run_index: usize,
    /// Absent on failure rows.
    pub elapsed_ms: Option<f64>,
    pub matched_docs: Option<u64>,
    pub error: Option<String>,
}

impl RawRow {
    fn group(&self) -> (u64, QueryId, Scheme, LayoutKind, Option<Strategy>) {
        (self.sf.to_bits(), self.query, self.scheme, self.layout, self.strategy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub sf: f64,
    pub query: QueryId,
    pub scheme: Scheme,
    pub layout: LayoutKind,
    #[serde(with = "strategy_field")]
    pub strategy: Option<Strategy>,
    pub runs: usize,
    pub mean_ms: f64,
    pub stddev_ms: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchReport {
    pub raw: Vec<RawRow>,
    pub aggregates: Vec<AggregateRow>,
}

/// Aggregates of the successful rows of each (configuration, query), in
/// first-appearance order.
pub fn aggregate(raw: &[RawRow]) -> Vec<AggregateRow> {
    let mut groups: Vec<(&RawRow, Vec<f64>)> = Vec::new();
    for row in raw {
        let Some(ms) = row.elapsed_ms else { continue };
        match groups.iter_mut().find(|(r, _)| r.group() == row.group()) {
            Some((_, samples)) => samples.push(ms),
            None => groups.push((row, vec![ms])),
        }
    }
    groups
        .into_iter()
        .map(|(r, samples)| {
            let s = stats(&samples).expect("non-empty group");
            AggregateRow {
                sf: r.sf,
                query: r.query,
                scheme: r.scheme,
                layout: r.layout,
                strategy: r.strategy,
                runs: samples.len(),
                mean_ms: s.mean,
                stddev_ms: s.stddev,
                degenerate: s.degenerate,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::invalid(format!("unknown report format `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRun {
    run_index: usize,
    elapsed_ms: Option<f64>,
    matched_docs: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonQuery {
    query: QueryId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    summary: Option<JsonSummary>,
    runs: Vec<JsonRun>,
}

#[derive(Serialize, Deserialize)]
struct JsonSummary {
    runs: usize,
    mean_ms: f64,
    stddev_ms: f64,
    degenerate: bool,
}

#[derive(Serialize, Deserialize)]
struct JsonConfiguration {
    sf: f64,
    scheme: Scheme,
    layout: LayoutKind,
    #[serde(with = "strategy_field")]
    strategy: Option<Strategy>,
    queries: Vec<JsonQuery>,
}

#[derive(Serialize, Deserialize)]
struct JsonReport {
    configurations: Vec<JsonConfiguration>,
}

impl BenchReport {
    pub fn from_raw(raw: Vec<RawRow>) -> Self {
        let aggregates = aggregate(&raw);
        BenchReport { raw, aggregates }
    }

    fn to_json_tree(&self) -> JsonReport {
        let mut configurations: Vec<JsonConfiguration> = Vec::new();
        for row in &self.raw {
            let idx = match configurations.iter().position(|c| {
                c.sf.to_bits() == row.sf.to_bits()
                    && c.scheme == row.scheme
                    && c.layout == row.layout
                    && c.strategy == row.strategy
            }) {
                Some(i) => i,
                None => {
                    configurations.push(JsonConfiguration {
                        sf: row.sf,
                        scheme: row.scheme,
                        layout: row.layout,
                        strategy: row.strategy,
                        queries: Vec::new(),
                    });
                    configurations.len() - 1
                }
            };
            let config = &mut configurations[idx];
            let q = match config.queries.iter().position(|q| q.query == row.query) {
                Some(i) => i,
                None => {
                    let summary = self.aggregates.iter().find(|a| {
                        a.sf.to_bits() == row.sf.to_bits()
                            && a.query == row.query
                            && a.scheme == row.scheme
                            && a.layout == row.layout
                            && a.strategy == row.strategy
                    });
                    config.queries.push(JsonQuery {
                        query: row.query,
                        summary: summary.map(|a| JsonSummary {
                            runs: a.runs,
                            mean_ms: a.mean_ms,
                            stddev_ms: a.stddev_ms,
                            degenerate: a.degenerate,
                        }),
                        runs: Vec::new(),
                    });
                    config.queries.len() - 1
                }
            };
            config.queries[q].runs.push(JsonRun {
                run_index: row.run_index,
                elapsed_ms: row.elapsed_ms,
                matched_docs: row.matched_docs,
                error: row.error.clone(),
            });
        }
        JsonReport { configurations }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_tree()).expect("report serializes");
        s.push('\n');
        s
    }

    /// Reads the raw rows back from JSON and recomputes the aggregates.
    pub fn from_json(text: &str) -> Result<Self> {
        let tree: JsonReport = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let mut raw = Vec::new();
        for c in tree.configurations {
            for q in c.queries {
                for r in q.runs {
                    raw.push(RawRow {
                        sf: c.sf,
                        query: q.query,
                        scheme: c.scheme,
                        layout: c.layout,
                        strategy: c.strategy,
                        run_index: r.run_index,
                        elapsed_ms: r.elapsed_ms,
                        matched_docs: r.matched_docs,
                        error: r.error,
                    });
                }
            }
        }
        Ok(Self::from_raw(raw))
    }

    pub fn write_raw_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(out, &self.raw)
    }

    pub fn write_aggregates_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(out, &self.aggregates)
    }

    pub fn read_raw_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let mut raw = Vec::new();
        for (i, row) in reader.deserialize().enumerate() {
            raw.push(row.map_err(|e: csv::Error| Error::Parse { line: i + 2, message: e.to_string() })?);
        }
        Ok(Self::from_raw(raw))
    }

    /// Writes `raw.csv` and `aggregates.csv`, or `report.json`, into `dir`.
    pub fn save(&self, dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let create = |name: &str| -> Result<(PathBuf, BufWriter<File>)> {
            let path = dir.join(name);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            Ok((path, BufWriter::new(file)))
        };
        match format {
            ReportFormat::Csv => {
                let (raw_path, raw) = create(RAW_CSV)?;
                self.write_raw_csv(raw).map_err(|e| with_path(e, &raw_path))?;
                let (agg_path, agg) = create(AGGREGATES_CSV)?;
                self.write_aggregates_csv(agg).map_err(|e| with_path(e, &agg_path))?;
                Ok(vec![raw_path, agg_path])
            }
            ReportFormat::Json => {
                let (path, mut out) = create(REPORT_JSON)?;
                out.write_all(self.to_json().as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| Error::io(&path, e))?;
                Ok(vec![path])
            }
        }
    }

    /// Loads a report from `report.json` or a raw CSV file, by extension.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            let mut text = String::new();
            std::io::Read::read_to_string(&mut BufReader::new(file), &mut text)
                .map_err(|e| Error::io(path, e))?;
            Self::from_json(&text)
        } else {
            Self::read_raw_csv(BufReader::new(file))
        }
    }
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::io(Path::new("<csv>"), e))
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(Path::new("<csv>"), io),
        other => Error::invalid(format!("csv: {other:?}")),
    }
}
