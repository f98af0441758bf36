//! ANSI SQL rendering of a query spec and an in-process interpreter for the
//! emitted dialect over the relational tables.
//!
//! The interpreter evaluates joins as hash joins that keep probe-side order,
//! groups in first-appearance order and sums each group in row order, so the
//! aggregation visits postings exactly as the native relational engine does.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use super::expr::{eval, parse_statement, BinOp, Env, Expr, Key, Select, Statement, Value};
use super::Bindings;
use crate::engine::{QuerySpec, RelationalLayout, TopKResult};
use crate::error::{Error, Result};
use crate::scoring::{LogBase, Scheme, StatsScope};

pub(crate) fn render(spec: &QuerySpec) -> String {
    let p = &spec.params;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "-- {} {} top-{} (scope {}, log {}, k1 {:?}, b {:?})",
        spec.query,
        spec.scheme,
        spec.k,
        spec.scope.as_str(),
        p.log_base.as_str(),
        p.k1,
        p.b
    );
    s.push_str("WITH selected_documents AS (\n");
    s.push_str("    SELECT documents.id AS document_id,\n");
    s.push_str("           documents.lemma_text_length AS doc_len\n");
    s.push_str("    FROM documents\n");
    s.push_str("    JOIN documents_authors ON documents_authors.document_id = documents.id\n");
    s.push_str("    JOIN authors ON authors.id = documents_authors.author_id\n");
    s.push_str("    JOIN genders ON genders.id = authors.gender_id\n");
    if spec.query.uses_geo() {
        s.push_str("    JOIN geo_location ON geo_location.id = documents.geo_id\n");
    }
    s.push_str("    WHERE genders.type = :pGender");
    if spec.query.uses_dates() {
        s.push_str("\n      AND documents.date >= :pStartDate");
        s.push_str("\n      AND documents.date <= :pEndDate");
    }
    if spec.query.uses_geo() {
        s.push_str("\n      AND geo_location.x >= :pStartX");
        s.push_str("\n      AND geo_location.x <= :pEndX");
        s.push_str("\n      AND geo_location.y >= :pStartY");
        s.push_str("\n      AND geo_location.y <= :pEndY");
    }
    s.push_str("\n),\npostings AS (\n");
    s.push_str("    SELECT selected_documents.document_id AS document_id,\n");
    s.push_str("           selected_documents.doc_len AS doc_len,\n");
    s.push_str("           vocabulary.word_id AS word_id,\n");
    s.push_str("           vocabulary.tf AS tf,\n");
    s.push_str("           words.word AS word\n");
    s.push_str("    FROM selected_documents\n");
    s.push_str("    JOIN vocabulary ON vocabulary.document_id = selected_documents.document_id\n");
    s.push_str("    JOIN words ON words.id = vocabulary.word_id\n");
    s.push_str(")\n");
    s.push_str("SELECT postings.word AS word,\n");
    let _ = writeln!(s, "       SUM({}) AS weight,", weight_sql(spec));
    s.push_str("       (SELECT COUNT(*) FROM selected_documents) AS matched_docs\n");
    s.push_str("FROM postings\n");
    s.push_str("GROUP BY postings.word_id, postings.word\n");
    s.push_str("ORDER BY weight DESC, word ASC\n");
    let _ = writeln!(s, "LIMIT {};", spec.k);
    s
}

fn double(sql: &str) -> String {
    format!("CAST({sql} AS DOUBLE PRECISION)")
}

fn weight_sql(spec: &QuerySpec) -> String {
    let (n_docs, doc_freq, avg_len) = match spec.scope {
        StatsScope::Filtered => (
            "(SELECT COUNT(*) FROM selected_documents)",
            "(SELECT COUNT(*) FROM postings AS df WHERE df.word_id = postings.word_id)",
            "(SELECT CAST(SUM(selected_documents.doc_len) AS DOUBLE PRECISION) \
             / CAST(COUNT(*) AS DOUBLE PRECISION) FROM selected_documents)",
        ),
        StatsScope::Global => (
            "(SELECT COUNT(*) FROM documents)",
            "(SELECT COUNT(*) FROM vocabulary AS df WHERE df.word_id = postings.word_id)",
            "(SELECT CAST(SUM(documents.lemma_text_length) AS DOUBLE PRECISION) \
             / CAST(COUNT(*) AS DOUBLE PRECISION) FROM documents)",
        ),
    };
    let log = match spec.params.log_base {
        LogBase::Natural => "LN",
        LogBase::Base10 => "LOG10",
    };
    let idf = format!("(1.0 + {log}({} / {}))", double(n_docs), double(doc_freq));
    let tfidf = format!("(postings.tf * {idf})");
    match spec.scheme {
        Scheme::TfIdf => tfidf,
        Scheme::Okapi => {
            let p = &spec.params;
            format!(
                "{tfidf} * (({k1:?} + 1.0) / (postings.tf + {k1:?} * (1.0 + {b:?} * ({} / {avg_len} - 1.0))))",
                double("postings.doc_len"),
                k1 = p.k1,
                b = p.b,
            )
        }
    }
}

/// Column metadata: `(qualifier, name)`.
type Cols = Vec<(Arc<str>, Arc<str>)>;
type Row = Arc<[Value]>;

#[derive(Debug, Clone, Default)]
pub(crate) struct Relation {
    cols: Cols,
    rows: Vec<Row>,
}

impl Relation {
    fn requalify(&self, qualifier: &str) -> Relation {
        let q: Arc<str> = Arc::from(qualifier);
        Relation {
            cols: self.cols.iter().map(|(_, n)| (q.clone(), n.clone())).collect(),
            rows: self.rows.clone(),
        }
    }
}

fn table(name: &str, columns: &[&str], n: usize, cell: impl Fn(usize, usize) -> Value) -> Relation {
    let q: Arc<str> = Arc::from(name);
    Relation {
        cols: columns.iter().map(|c| (q.clone(), Arc::from(*c))).collect(),
        rows: (0..n)
            .map(|r| (0..columns.len()).map(|c| cell(r, c)).collect::<Vec<_>>().into())
            .collect(),
    }
}

/// Base tables of the relational layout, addressable by SQL name.
pub(crate) fn base_tables(t: &RelationalLayout) -> HashMap<String, Relation> {
    let int = |v: u64| Value::Int(v as i64);
    let mut out = HashMap::new();
    out.insert(
        "genders".into(),
        table("genders", &["id", "type"], t.genders.id.len(), |r, c| match c {
            0 => int(t.genders.id[r].into()),
            _ => Value::text(t.genders.kind[r].as_str()),
        }),
    );
    let a = &t.authors;
    out.insert(
        "authors".into(),
        table(
            "authors",
            &["id", "author_id", "first_name", "last_name", "age", "gender_id"],
            a.id.len(),
            |r, c| match c {
                0 => int(a.id[r].into()),
                1 => int(a.author_id[r]),
                2 => Value::text(&a.first_name[r]),
                3 => Value::text(&a.last_name[r]),
                4 => int(a.age[r].into()),
                _ => int(a.gender_id[r].into()),
            },
        ),
    );
    let d = &t.documents;
    out.insert(
        "documents".into(),
        table(
            "documents",
            &["id", "tweet_id", "raw_text", "clean_text", "lemma_text", "date", "lemma_text_length", "geo_id"],
            d.id.len(),
            |r, c| match c {
                0 => int(d.id[r].into()),
                1 => int(d.tweet_id[r]),
                2 => Value::text(&d.raw_text[r]),
                3 => Value::text(&d.clean_text[r]),
                4 => Value::text(&d.lemma_text[r]),
                5 => Value::Timestamp(d.date[r]),
                6 => int(d.lemma_text_length[r]),
                _ => int(d.geo_id[r].into()),
            },
        ),
    );
    let da = &t.documents_authors;
    out.insert(
        "documents_authors".into(),
        table("documents_authors", &["document_id", "author_id"], da.document_id.len(), |r, c| {
            match c {
                0 => int(da.document_id[r].into()),
                _ => int(da.author_id[r].into()),
            }
        }),
    );
    let g = &t.geo_location;
    out.insert(
        "geo_location".into(),
        table("geo_location", &["id", "x", "y"], g.id.len(), |r, c| match c {
            0 => int(g.id[r].into()),
            1 => Value::Float(g.x[r]),
            _ => Value::Float(g.y[r]),
        }),
    );
    let w = &t.words;
    out.insert(
        "words".into(),
        table("words", &["id", "word"], w.id.len(), |r, c| match c {
            0 => int(w.id[r].into()),
            _ => Value::text(&w.word[r]),
        }),
    );
    let v = &t.vocabulary;
    out.insert(
        "vocabulary".into(),
        table("vocabulary", &["document_id", "word_id", "count", "tf"], v.document_id.len(), |r, c| {
            match c {
                0 => int(v.document_id[r].into()),
                1 => int(v.word_id[r].into()),
                2 => int(v.count[r]),
                _ => Value::Float(v.tf[r]),
            }
        }),
    );
    out
}

/// A parsed statement ready for repeated execution.
#[derive(Debug, Clone)]
pub(crate) struct PreparedSql {
    statement: Statement,
}

impl PreparedSql {
    pub(crate) fn parse(text: &str) -> Result<Self> {
        let statement = parse_statement(text)?;
        for (name, _) in &statement.ctes {
            if statement.ctes.iter().filter(|(n, _)| n == name).count() > 1 {
                return Err(Error::plan(format!("duplicate CTE `{name}`")));
            }
        }
        Ok(PreparedSql { statement })
    }

    pub(crate) fn placeholders(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut visit = |e: &Expr| {
            if let Expr::Param(p) = e {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        };
        for (_, cte) in &self.statement.ctes {
            cte.walk(&mut visit);
        }
        self.statement.body.walk(&mut visit);
        out
    }

    /// Runs the statement. The result must have `word` and `weight`
    /// columns; an optional third column carries the matched-document count.
    pub(crate) fn run(&self, tables: &HashMap<String, Relation>, params: &Bindings) -> Result<TopKResult> {
        let exec = Executor { tables, ctes: HashMap::new(), params, cache: RefCell::default() };
        let exec = exec.with_ctes(&self.statement)?;
        let out = exec.select(&self.statement.body, None)?;
        if out.cols.len() < 2 {
            return Err(Error::plan("result needs word and weight columns"));
        }
        let mut entries = Vec::with_capacity(out.rows.len());
        let mut matched_docs = 0;
        for row in &out.rows {
            let word = match &row[0] {
                Value::Text(s) => s.to_string(),
                v => return Err(Error::plan(format!("word column holds {v}"))),
            };
            let weight = row[1]
                .as_f64()
                .ok_or_else(|| Error::plan(format!("weight column holds {}", row[1])))?;
            if let Some(Value::Int(m)) = row.get(2) {
                matched_docs = *m as u64;
            }
            entries.push((word, weight));
        }
        Ok(TopKResult { entries, matched_docs })
    }
}

/// Cached state of one subquery node across evaluations.
#[derive(Default)]
struct SubqueryCache {
    from: Option<Arc<Relation>>,
    outer_refs: Vec<(String, String)>,
    /// Position of a `local = outer` filter term and its outer side.
    probe: Option<(usize, Expr)>,
    index: HashMap<Key, Vec<usize>>,
    memo: HashMap<Vec<Key>, Value>,
}

struct Executor<'a> {
    tables: &'a HashMap<String, Relation>,
    ctes: HashMap<String, Arc<Relation>>,
    params: &'a Bindings,
    cache: RefCell<HashMap<*const Select, SubqueryCache>>,
}

struct RowEnv<'e, 'a> {
    exec: &'e Executor<'a>,
    cols: &'e Cols,
    row: &'e [Value],
    group: Option<&'e [Row]>,
    outer: Option<&'e dyn Env>,
}

impl Env for RowEnv<'_, '_> {
    fn column(&self, table: Option<&str>, name: &str) -> Result<Value> {
        let mut found = None;
        for (i, (q, n)) in self.cols.iter().enumerate() {
            if &**n == name && table.is_none_or(|t| &**q == t) {
                if found.is_some() {
                    return Err(Error::plan(format!("ambiguous column `{name}`")));
                }
                found = Some(i);
            }
        }
        match (found, self.outer) {
            (Some(i), _) => Ok(self.row[i].clone()),
            (None, Some(outer)) => outer.column(table, name),
            (None, None) => Err(Error::plan(match table {
                Some(t) => format!("unknown column `{t}.{name}`"),
                None => format!("unknown column `{name}`"),
            })),
        }
    }

    fn param(&self, name: &str) -> Result<Value> {
        self.exec
            .params
            .get(name)
            .cloned()
            .ok_or_else(|| Error::plan(format!("unbound placeholder :{name}")))
    }

    fn aggregate(&self, name: &str, args: &[Expr], star: bool) -> Result<Value> {
        let rows = self
            .group
            .ok_or_else(|| Error::plan(format!("aggregate `{name}` outside a grouped select")))?;
        let arg = |row: &Row| -> Result<Value> {
            let env = RowEnv { group: None, row, ..*self };
            eval(&args[0], &env)
        };
        if !star && args.len() != 1 {
            return Err(Error::plan(format!("`{name}` takes one argument")));
        }
        match (name, star) {
            ("count", true) => Ok(Value::Int(rows.len() as i64)),
            ("count", false) => {
                let mut n = 0;
                for row in rows {
                    if arg(row)? != Value::Null {
                        n += 1;
                    }
                }
                Ok(Value::Int(n))
            }
            ("sum", false) => {
                let mut acc = Value::Int(0);
                let mut any = false;
                for row in rows {
                    let v = arg(row)?;
                    if v != Value::Null {
                        acc = super::expr::apply(BinOp::Add, &acc, &v)?;
                        any = true;
                    }
                }
                Ok(if any { acc } else { Value::Null })
            }
            _ => Err(Error::plan(format!("`{name}(*)` is not supported"))),
        }
    }

    fn subquery(&self, select: &Select) -> Result<Value> {
        self.exec.scalar(select, self)
    }
}

impl<'a> Executor<'a> {
    fn with_ctes(mut self, statement: &Statement) -> Result<Self> {
        for (name, select) in &statement.ctes {
            let rel = self.select(select, None)?;
            self.ctes.insert(name.clone(), Arc::new(rel));
        }
        Ok(self)
    }

    fn source(&self, name: &str) -> Result<Arc<Relation>> {
        if let Some(r) = self.ctes.get(name) {
            return Ok(r.clone());
        }
        self.tables
            .get(name)
            .map(|r| Arc::new(r.clone()))
            .ok_or_else(|| Error::plan(format!("unknown table `{name}`")))
    }

    fn scan(&self, table: &super::expr::TableRef) -> Result<Relation> {
        Ok(self.source(&table.table)?.requalify(table.name()))
    }

    /// FROM plus JOINs. Equality join conditions run as hash joins keeping
    /// left-row order and, within a left row, right-row order.
    fn from_clause(&self, select: &Select, outer: Option<&dyn Env>) -> Result<Relation> {
        let mut left = self.scan(&select.from)?;
        for join in &select.joins {
            let right = self.scan(&join.table)?;
            let mut cols = left.cols.clone();
            cols.extend(right.cols.iter().cloned());
            let mut rows = Vec::new();
            match equi_join_columns(&join.on, &left.cols, &right.cols) {
                Some((li, ri)) => {
                    let mut index: HashMap<Key, Vec<usize>> = HashMap::new();
                    for (i, row) in right.rows.iter().enumerate() {
                        if row[ri] != Value::Null {
                            index.entry(row[ri].key()).or_default().push(i);
                        }
                    }
                    for l in &left.rows {
                        if let Some(matches) = index.get(&l[li].key()) {
                            for &i in matches {
                                rows.push(concat(l, &right.rows[i]));
                            }
                        }
                    }
                }
                None => {
                    for l in &left.rows {
                        for r in &right.rows {
                            let row = concat(l, r);
                            let env = RowEnv { exec: self, cols: &cols, row: &row, group: None, outer };
                            if eval(&join.on, &env)?.is_true() {
                                rows.push(row);
                            }
                        }
                    }
                }
            }
            left = Relation { cols, rows };
        }
        Ok(left)
    }

    fn select(&self, select: &Select, outer: Option<&dyn Env>) -> Result<Relation> {
        let from = self.from_clause(select, outer)?;
        let rows = self.filter(&from.cols, from.rows.iter(), select.filter.iter().collect(), outer)?;
        self.project(select, &from.cols, rows, outer)
    }

    fn filter<'r>(
        &self,
        cols: &Cols,
        rows: impl Iterator<Item = &'r Row>,
        terms: Vec<&Expr>,
        outer: Option<&dyn Env>,
    ) -> Result<Vec<Row>> {
        let mut out = Vec::new();
        'rows: for row in rows {
            let env = RowEnv { exec: self, cols, row, group: None, outer };
            for t in &terms {
                if !eval(t, &env)?.is_true() {
                    continue 'rows;
                }
            }
            out.push(row.clone());
        }
        Ok(out)
    }

    fn project(&self, select: &Select, cols: &Cols, rows: Vec<Row>, outer: Option<&dyn Env>) -> Result<Relation> {
        let out_cols: Cols = select
            .items
            .iter()
            .map(|i| (Arc::from(""), Arc::from(i.alias.as_str())))
            .collect();
        let grouped = !select.group_by.is_empty() || select.items.iter().any(|i| i.expr.has_aggregate());
        let mut out_rows: Vec<Row> = Vec::new();
        let emit = |row: &[Value], group: Option<&[Row]>| -> Result<Row> {
            let env = RowEnv { exec: self, cols, row, group, outer };
            select
                .items
                .iter()
                .map(|i| eval(&i.expr, &env))
                .collect::<Result<Vec<_>>>()
                .map(Into::into)
        };
        if grouped {
            let mut slots: HashMap<Vec<Key>, usize> = HashMap::new();
            let mut groups: Vec<Vec<Row>> = Vec::new();
            for row in rows {
                let env = RowEnv { exec: self, cols, row: &row, group: None, outer };
                let key = select
                    .group_by
                    .iter()
                    .map(|e| eval(e, &env).map(|v| v.key()))
                    .collect::<Result<Vec<_>>>()?;
                let slot = *slots.entry(key).or_insert_with(|| {
                    groups.push(Vec::new());
                    groups.len() - 1
                });
                groups[slot].push(row);
            }
            if groups.is_empty() && select.group_by.is_empty() {
                groups.push(Vec::new());
            }
            for group in &groups {
                let nulls: Row = vec![Value::Null; cols.len()].into();
                let first = group.first().unwrap_or(&nulls);
                out_rows.push(emit(first, Some(group))?);
            }
        } else {
            for row in &rows {
                out_rows.push(emit(row, None)?);
            }
        }

        if !select.order_by.is_empty() {
            let mut keyed = Vec::with_capacity(out_rows.len());
            for row in out_rows {
                let env = RowEnv { exec: self, cols: &out_cols, row: &row, group: None, outer };
                let keys = select
                    .order_by
                    .iter()
                    .map(|k| eval(&k.expr, &env))
                    .collect::<Result<Vec<_>>>()?;
                keyed.push((keys, row));
            }
            keyed.sort_by(|(a, _), (b, _)| {
                for (i, k) in select.order_by.iter().enumerate() {
                    let o = match (&a[i], &b[i]) {
                        (Value::Null, Value::Null) => std::cmp::Ordering::Equal,
                        (Value::Null, _) => std::cmp::Ordering::Greater,
                        (_, Value::Null) => std::cmp::Ordering::Less,
                        (x, y) => x.compare(y).unwrap_or(std::cmp::Ordering::Equal),
                    };
                    let o = if k.descending { o.reverse() } else { o };
                    if o.is_ne() {
                        return o;
                    }
                }
                std::cmp::Ordering::Equal
            });
            out_rows = keyed.into_iter().map(|(_, r)| r).collect();
        }
        if let Some(limit) = select.limit {
            out_rows.truncate(limit);
        }
        Ok(Relation { cols: out_cols, rows: out_rows })
    }

    /// Scalar subquery. The FROM relation is built once per subquery node;
    /// results are memoized on the values of outer columns it references, and
    /// a `local = outer` filter term is answered through a hash index.
    fn scalar(&self, select: &Select, outer: &dyn Env) -> Result<Value> {
        let ptr = select as *const Select;
        if !self.cache.borrow().contains_key(&ptr) {
            let entry = self.analyze(select)?;
            self.cache.borrow_mut().insert(ptr, entry);
        }
        let (from, memo_key, probe) = {
            let cache = self.cache.borrow();
            let entry = &cache[&ptr];
            let mut key = Vec::with_capacity(entry.outer_refs.len());
            for (t, n) in &entry.outer_refs {
                key.push(outer.column(Some(t), n)?.key());
            }
            if let Some(v) = entry.memo.get(&key) {
                return Ok(v.clone());
            }
            let probe = match &entry.probe {
                Some((_, e)) => Some(eval(e, outer)?.key()),
                None => None,
            };
            (entry.from.clone().expect("analyzed"), key, probe)
        };

        let rows: Vec<Row> = {
            let cache = self.cache.borrow();
            let entry = &cache[&ptr];
            let skip = entry.probe.as_ref().map(|(pos, _)| *pos);
            let terms: Vec<&Expr> = match &select.filter {
                Some(f) => f
                    .conjuncts()
                    .into_iter()
                    .enumerate()
                    .filter(|(i, _)| Some(*i) != skip)
                    .map(|(_, t)| t)
                    .collect(),
                None => Vec::new(),
            };
            match probe {
                Some(k) => {
                    let hits = entry.index.get(&k).map(Vec::as_slice).unwrap_or(&[]);
                    self.filter(&from.cols, hits.iter().map(|&i| &from.rows[i]), terms, Some(outer))?
                }
                None => self.filter(&from.cols, from.rows.iter(), terms, Some(outer))?,
            }
        };
        let out = self.project(select, &from.cols, rows, Some(outer))?;
        if out.cols.len() != 1 || out.rows.len() > 1 {
            return Err(Error::plan("scalar subquery must return one column and at most one row"));
        }
        let v = out.rows.first().map(|r| r[0].clone()).unwrap_or(Value::Null);
        self.cache
            .borrow_mut()
            .get_mut(&ptr)
            .expect("analyzed")
            .memo
            .insert(memo_key, v.clone());
        Ok(v)
    }

    fn analyze(&self, select: &Select) -> Result<SubqueryCache> {
        let local = select.qualifiers();
        let mut outer_refs: Vec<(String, String)> = Vec::new();
        select.walk(&mut |e| {
            if let Expr::Column { table: Some(t), name } = e {
                if !local.contains(&t.as_str()) && !outer_refs.iter().any(|(a, b)| a == t && b == name) {
                    outer_refs.push((t.clone(), name.clone()));
                }
            }
        });
        for join in &select.joins {
            let mut correlated = false;
            join.on.walk(&mut |e| {
                if let Expr::Column { table: Some(t), .. } = e {
                    correlated |= !local.contains(&t.as_str());
                }
            });
            if correlated {
                return Err(Error::plan("correlated join conditions are not supported"));
            }
        }
        let from = Arc::new(self.from_clause(select, None)?);
        let mut probe = None;
        let mut index = HashMap::new();
        if let Some(f) = &select.filter {
            if let Some((pos, term)) = f
                .conjuncts()
                .into_iter()
                .enumerate()
                .find(|(_, t)| is_probe_term(t, &from.cols, &outer_refs))
            {
                let Expr::Binary { lhs, rhs, .. } = term else { unreachable!() };
                let (li, other) = match column_index(lhs, &from.cols) {
                    Some(i) => (i, rhs.as_ref().clone()),
                    None => (column_index(rhs, &from.cols).expect("probe term"), lhs.as_ref().clone()),
                };
                for (i, row) in from.rows.iter().enumerate() {
                    index.entry(row[li].key()).or_insert_with(Vec::new).push(i);
                }
                probe = Some((pos, other));
            }
        }
        Ok(SubqueryCache { from: Some(from), outer_refs, probe, index, memo: HashMap::new() })
    }
}

fn concat(l: &[Value], r: &[Value]) -> Row {
    l.iter().chain(r).cloned().collect::<Vec<_>>().into()
}

fn column_index(e: &Expr, cols: &Cols) -> Option<usize> {
    let Expr::Column { table, name } = e else { return None };
    let mut hits = cols
        .iter()
        .enumerate()
        .filter(|(_, (q, n))| &**n == name && table.as_deref().is_none_or(|t| &**q == t));
    let first = hits.next()?.0;
    hits.next().is_none().then_some(first)
}

/// `lhs = rhs` with one side a column of `left` and the other of `right`.
fn equi_join_columns(on: &Expr, left: &Cols, right: &Cols) -> Option<(usize, usize)> {
    let Expr::Binary { op: BinOp::Eq, lhs, rhs } = on else { return None };
    match (column_index(lhs, left), column_index(rhs, right)) {
        (Some(l), Some(r)) if column_index(lhs, right).is_none() && column_index(rhs, left).is_none() => {
            Some((l, r))
        }
        _ => match (column_index(rhs, left), column_index(lhs, right)) {
            (Some(l), Some(r)) if column_index(rhs, right).is_none() && column_index(lhs, left).is_none() => {
                Some((l, r))
            }
            _ => None,
        },
    }
}

/// `local_column = expression over outer columns only`.
fn is_probe_term(term: &Expr, cols: &Cols, outer_refs: &[(String, String)]) -> bool {
    let Expr::Binary { op: BinOp::Eq, lhs, rhs } = term else { return false };
    let outer_only = |e: &Expr| {
        let mut ok = true;
        e.walk(&mut |n| match n {
            Expr::Column { table: Some(t), name } => {
                ok &= outer_refs.iter().any(|(a, b)| a == t && b == name);
            }
            Expr::Column { table: None, .. } | Expr::Subquery(_) | Expr::Call { .. } => ok = false,
            _ => {}
        });
        ok
    };
    (column_index(lhs, cols).is_some() && outer_only(rhs)) || (column_index(rhs, cols).is_some() && outer_only(lhs))
}
