//! Expression and statement syntax shared by the SQL and map-reduce artifacts.
//!
//! One lexer and one recursive-descent parser cover both: SQL spellings
//! (`AND`, `=`, `NOT`) and the plan spellings (`&&`, `==`, `!`) map onto the
//! same tree. Placeholders are written `:name` in both.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Int(i64),
    Float(f64),
    Text(Arc<str>),
    /// Seconds since the Unix epoch, UTC.
    Timestamp(i64),
    List(Arc<[Value]>),
}

impl Value {
    pub fn text(s: &str) -> Self {
        Value::Text(Arc::from(s))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(i) => Some(i as f64),
            Value::Float(f) => Some(f),
            _ => None,
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Value::Int(i) if *i != 0)
    }

    fn type_name(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Int(_) => "integer",
            Value::Float(_) => "double",
            Value::Text(_) => "text",
            Value::Timestamp(_) => "timestamp",
            Value::List(_) => "list",
        }
    }

    /// Ordering used by comparisons and sorting; `None` for null or
    /// incomparable operands.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (Value::Timestamp(a), Value::Timestamp(b)) => Some(a.cmp(b)),
            (a, b) => Some(a.as_f64()?.total_cmp(&b.as_f64()?)),
        }
    }

    /// Hashable form for grouping, joins and memoization.
    pub fn key(&self) -> Key {
        match self {
            Value::Null => Key::Null,
            Value::Int(i) => Key::Int(*i),
            Value::Float(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => Key::Int(*f as i64),
            Value::Float(f) => Key::Float(f.to_bits()),
            Value::Text(s) => Key::Text(s.clone()),
            Value::Timestamp(t) => Key::Timestamp(*t),
            Value::List(items) => Key::List(items.iter().map(Value::key).collect()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("NULL"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Text(s) => write!(f, "'{s}'"),
            Value::Timestamp(t) => write!(f, "@{t}"),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Key {
    Null,
    Int(i64),
    Float(u64),
    Text(Arc<str>),
    Timestamp(i64),
    List(Vec<Key>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CastType {
    Double,
    BigInt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Column { table: Option<String>, name: String },
    Literal(Value),
    Param(String),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    /// Function call; `name` is lowercase. `star` marks `COUNT(*)`.
    Call { name: String, args: Vec<Expr>, star: bool },
    Cast { expr: Box<Expr>, ty: CastType },
    Subquery(Box<Select>),
    Index { base: Box<Expr>, key: Box<Expr> },
}

pub const AGGREGATES: [&str; 2] = ["sum", "count"];

impl Expr {
    pub fn column(table: Option<&str>, name: &str) -> Self {
        Expr::Column { table: table.map(str::to_string), name: name.to_string() }
    }

    /// Whether an aggregate call occurs outside nested subqueries.
    pub fn has_aggregate(&self) -> bool {
        match self {
            Expr::Call { name, args, .. } => {
                AGGREGATES.contains(&name.as_str()) || args.iter().any(Expr::has_aggregate)
            }
            Expr::Neg(e) | Expr::Not(e) | Expr::Cast { expr: e, .. } => e.has_aggregate(),
            Expr::Binary { lhs, rhs, .. } => lhs.has_aggregate() || rhs.has_aggregate(),
            Expr::Index { base, key } => base.has_aggregate() || key.has_aggregate(),
            Expr::Column { .. } | Expr::Literal(_) | Expr::Param(_) | Expr::Subquery(_) => false,
        }
    }

    /// Visits every node, descending into subqueries.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Neg(e) | Expr::Not(e) | Expr::Cast { expr: e, .. } => e.walk(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.walk(f)),
            Expr::Index { base, key } => {
                base.walk(f);
                key.walk(f);
            }
            Expr::Subquery(s) => s.walk(f),
            Expr::Column { .. } | Expr::Literal(_) | Expr::Param(_) => {}
        }
    }

    /// Splits a conjunction into its terms.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        match self {
            Expr::Binary { op: BinOp::And, lhs, rhs } => {
                let mut out = lhs.conjuncts();
                out.extend(rhs.conjuncts());
                out
            }
            other => vec![other],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRef {
    pub table: String,
    pub alias: Option<String>,
}

impl TableRef {
    /// Qualifier that columns of this table are addressed by.
    pub fn name(&self) -> &str {
        self.alias.as_deref().unwrap_or(&self.table)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Join {
    pub table: TableRef,
    pub on: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectItem {
    pub expr: Expr,
    pub alias: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderKey {
    pub expr: Expr,
    pub descending: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Select {
    pub items: Vec<SelectItem>,
    pub from: TableRef,
    pub joins: Vec<Join>,
    pub filter: Option<Expr>,
    pub group_by: Vec<Expr>,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<usize>,
}

impl Select {
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        for item in &self.items {
            item.expr.walk(f);
        }
        for join in &self.joins {
            join.on.walk(f);
        }
        if let Some(e) = &self.filter {
            e.walk(f);
        }
        for e in &self.group_by {
            e.walk(f);
        }
        for k in &self.order_by {
            k.expr.walk(f);
        }
    }

    pub fn qualifiers(&self) -> Vec<&str> {
        std::iter::once(self.from.name())
            .chain(self.joins.iter().map(|j| j.table.name()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub ctes: Vec<(String, Select)>,
    pub body: Select,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Param(String),
    Sym(&'static str),
}

const SYMBOLS: [&str; 21] = [
    "==", "!=", "<>", "<=", ">=", "&&", "||", "(", ")", ",", ".", "*", "+", "-", "/", "=", "<", ">",
    "!", "[", "]",
];

fn lex(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() || c == ';' {
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push(Tok::Number(chars[start..i].iter().collect()));
        } else if c == '\'' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(Error::plan("unterminated string literal")),
                    Some('\'') if chars.get(i + 1) == Some(&'\'') => {
                        s.push('\'');
                        i += 2;
                    }
                    Some('\'') => {
                        i += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push(Tok::Str(s));
        } else if c == ':' {
            let start = i + 1;
            i = start;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            if i == start {
                return Err(Error::plan("empty placeholder name"));
            }
            out.push(Tok::Param(chars[start..i].iter().collect()));
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let sym = SYMBOLS
                .iter()
                .find(|s| rest.starts_with(**s))
                .ok_or_else(|| Error::plan(format!("unexpected character `{c}`")))?;
            out.push(Tok::Sym(sym));
            i += sym.len();
        }
    }
    Ok(out)
}

const KEYWORDS: [&str; 17] = [
    "select", "from", "where", "join", "inner", "on", "group", "by", "order", "limit", "as", "and",
    "or", "not", "with", "asc", "desc",
];

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

/// Parses a single expression.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses `[WITH name AS (select), ...] select`.
pub fn parse_statement(src: &str) -> Result<Statement> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let mut ctes = Vec::new();
    if p.eat_kw("with") {
        loop {
            let name = p.ident()?;
            p.expect_kw("as")?;
            p.expect_sym("(")?;
            let sel = p.select()?;
            p.expect_sym(")")?;
            ctes.push((name, sel));
            if !p.eat_sym(",") {
                break;
            }
        }
    }
    let body = p.select()?;
    p.finish()?;
    Ok(Statement { ctes, body })
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn finish(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(Error::plan(format!("unexpected trailing token {t:?}"))),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.is_kw(kw);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&kw.to_ascii_uppercase()))
        }
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        let hit = matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn expect_sym(&mut self, sym: &str) -> Result<()> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.unexpected(sym))
        }
    }

    fn unexpected(&self, wanted: &str) -> Error {
        match self.peek() {
            Some(t) => Error::plan(format!("expected {wanted}, found {t:?}")),
            None => Error::plan(format!("expected {wanted}, found end of input")),
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.to_ascii_lowercase().as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn select(&mut self) -> Result<Select> {
        self.expect_kw("select")?;
        let mut items = Vec::new();
        loop {
            let expr = self.expr()?;
            let alias = if self.eat_kw("as") {
                self.ident()?
            } else if let Expr::Column { name, .. } = &expr {
                name.clone()
            } else {
                format!("column{}", items.len() + 1)
            };
            items.push(SelectItem { expr, alias });
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_kw("from")?;
        let from = self.table_ref()?;
        let mut joins = Vec::new();
        loop {
            let inner = self.eat_kw("inner");
            if !self.eat_kw("join") {
                if inner {
                    return Err(self.unexpected("JOIN"));
                }
                break;
            }
            let table = self.table_ref()?;
            self.expect_kw("on")?;
            joins.push(Join { table, on: self.expr()? });
        }
        let filter = if self.eat_kw("where") { Some(self.expr()?) } else { None };
        let mut group_by = Vec::new();
        if self.eat_kw("group") {
            self.expect_kw("by")?;
            loop {
                group_by.push(self.expr()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        let mut order_by = Vec::new();
        if self.eat_kw("order") {
            self.expect_kw("by")?;
            loop {
                let expr = self.expr()?;
                let descending = if self.eat_kw("desc") {
                    true
                } else {
                    self.eat_kw("asc");
                    false
                };
                order_by.push(OrderKey { expr, descending });
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        let limit = if self.eat_kw("limit") {
            match self.peek() {
                Some(Tok::Number(n)) => {
                    let n = n.parse().map_err(|_| Error::plan(format!("bad LIMIT `{n}`")))?;
                    self.pos += 1;
                    Some(n)
                }
                _ => return Err(self.unexpected("LIMIT count")),
            }
        } else {
            None
        };
        Ok(Select { items, from, joins, filter, group_by, order_by, limit })
    }

    fn table_ref(&mut self) -> Result<TableRef> {
        let table = self.ident()?;
        let alias = if self.eat_kw("as") {
            Some(self.ident()?)
        } else {
            match self.peek() {
                Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.to_ascii_lowercase().as_str()) => {
                    Some(self.ident()?)
                }
                _ => None,
            }
        };
        Ok(TableRef { table, alias })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.and_expr()?;
        while self.eat_kw("or") || self.eat_sym("||") {
            let rhs = self.and_expr()?;
            lhs = binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.not_expr()?;
        while self.eat_kw("and") || self.eat_sym("&&") {
            let rhs = self.not_expr()?;
            lhs = binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr> {
        if self.eat_kw("not") || self.eat_sym("!") {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Some(Tok::Sym("=" | "==")) => BinOp::Eq,
            Some(Tok::Sym("!=" | "<>")) => BinOp::Ne,
            Some(Tok::Sym("<")) => BinOp::Lt,
            Some(Tok::Sym("<=")) => BinOp::Le,
            Some(Tok::Sym(">")) => BinOp::Gt,
            Some(Tok::Sym(">=")) => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.additive()?;
        Ok(binary(op, lhs, rhs))
    }

    fn additive(&mut self) -> Result<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = if self.eat_sym("+") {
                BinOp::Add
            } else if self.eat_sym("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.multiplicative()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                BinOp::Mul
            } else if self.eat_sym("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr> {
        let mut e = self.primary()?;
        while self.eat_sym("[") {
            let key = self.expr()?;
            self.expect_sym("]")?;
            e = Expr::Index { base: Box::new(e), key: Box::new(key) };
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Number(n)) => {
                self.pos += 1;
                let v = if n.contains(['.', 'e', 'E']) {
                    Value::Float(n.parse().map_err(|_| Error::plan(format!("bad number `{n}`")))?)
                } else {
                    Value::Int(n.parse().map_err(|_| Error::plan(format!("bad number `{n}`")))?)
                };
                Ok(Expr::Literal(v))
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Expr::Literal(Value::text(&s)))
            }
            Some(Tok::Param(p)) => {
                self.pos += 1;
                Ok(Expr::Param(p))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = if self.is_kw("select") {
                    Expr::Subquery(Box::new(self.select()?))
                } else {
                    self.expr()?
                };
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("cast") => {
                self.pos += 1;
                self.expect_sym("(")?;
                let expr = self.expr()?;
                self.expect_kw("as")?;
                let ty = self.cast_type()?;
                self.expect_sym(")")?;
                Ok(Expr::Cast { expr: Box::new(expr), ty })
            }
            Some(Tok::Ident(s)) if s.eq_ignore_ascii_case("null") => {
                self.pos += 1;
                Ok(Expr::Literal(Value::Null))
            }
            Some(Tok::Ident(_)) => {
                let first = self.ident()?;
                if self.eat_sym("(") {
                    let name = first.to_ascii_lowercase();
                    let mut args = Vec::new();
                    let mut star = false;
                    if self.eat_sym("*") {
                        star = true;
                    } else if !matches!(self.peek(), Some(Tok::Sym(")"))) {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    self.expect_sym(")")?;
                    return Ok(Expr::Call { name, args, star });
                }
                if self.eat_sym(".") {
                    let name = self.ident()?;
                    return Ok(Expr::Column { table: Some(first), name });
                }
                Ok(Expr::Column { table: None, name: first })
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn cast_type(&mut self) -> Result<CastType> {
        let name = self.ident()?.to_ascii_lowercase();
        match name.as_str() {
            "double" => {
                self.eat_kw("precision");
                Ok(CastType::Double)
            }
            "float" | "real" => Ok(CastType::Double),
            "bigint" | "integer" | "int" => Ok(CastType::BigInt),
            other => Err(Error::plan(format!("unsupported cast type `{other}`"))),
        }
    }
}

fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
}

/// Name resolution and the non-scalar parts of evaluation.
pub trait Env {
    fn column(&self, table: Option<&str>, name: &str) -> Result<Value>;

    fn param(&self, name: &str) -> Result<Value>;

    /// `name[key]` where `name` is a keyed table rather than a list value.
    fn lookup(&self, _name: &str, _key: &Value) -> Option<Result<Value>> {
        None
    }

    fn aggregate(&self, name: &str, _args: &[Expr], _star: bool) -> Result<Value> {
        Err(Error::plan(format!("aggregate `{name}` not allowed here")))
    }

    fn subquery(&self, _select: &Select) -> Result<Value> {
        Err(Error::plan("subqueries not allowed here"))
    }
}

pub fn eval(expr: &Expr, env: &dyn Env) -> Result<Value> {
    match expr {
        Expr::Column { table, name } => env.column(table.as_deref(), name),
        Expr::Literal(v) => Ok(v.clone()),
        Expr::Param(p) => env.param(p),
        Expr::Neg(e) => match eval(e, env)? {
            Value::Int(i) => Ok(Value::Int(-i)),
            Value::Float(f) => Ok(Value::Float(-f)),
            Value::Null => Ok(Value::Null),
            v => Err(type_error("-", &v)),
        },
        Expr::Not(e) => match eval(e, env)? {
            Value::Null => Ok(Value::Null),
            v => Ok(bool_value(!v.is_true())),
        },
        Expr::Binary { op, lhs, rhs } => binary_op(*op, lhs, rhs, env),
        Expr::Call { name, args, star } => {
            if AGGREGATES.contains(&name.as_str()) {
                return env.aggregate(name, args, *star);
            }
            let f: fn(f64) -> f64 = match name.as_str() {
                "ln" => f64::ln,
                "log10" => f64::log10,
                other => return Err(Error::plan(format!("unknown function `{other}`"))),
            };
            if args.len() != 1 {
                return Err(Error::plan(format!("`{name}` takes one argument")));
            }
            match eval(&args[0], env)? {
                Value::Null => Ok(Value::Null),
                v => v.as_f64().map(|x| Value::Float(f(x))).ok_or_else(|| type_error(name, &v)),
            }
        }
        Expr::Cast { expr, ty } => {
            let v = eval(expr, env)?;
            match (ty, &v) {
                (_, Value::Null) => Ok(Value::Null),
                (CastType::Double, _) => {
                    v.as_f64().map(Value::Float).ok_or_else(|| type_error("CAST", &v))
                }
                (CastType::BigInt, Value::Int(_)) => Ok(v),
                (CastType::BigInt, Value::Float(f)) => Ok(Value::Int(f.trunc() as i64)),
                (CastType::BigInt, _) => Err(type_error("CAST", &v)),
            }
        }
        Expr::Subquery(s) => env.subquery(s),
        Expr::Index { base, key } => {
            let key = eval(key, env)?;
            if let Expr::Column { table: None, name } = base.as_ref() {
                if let Some(v) = env.lookup(name, &key) {
                    return v;
                }
            }
            match (eval(base, env)?, &key) {
                (Value::List(items), Value::Int(i)) => Ok(usize::try_from(*i)
                    .ok()
                    .and_then(|i| items.get(i).cloned())
                    .unwrap_or(Value::Null)),
                (v, _) => Err(type_error("[]", &v)),
            }
        }
    }
}

fn bool_value(b: bool) -> Value {
    Value::Int(b as i64)
}

fn type_error(op: &str, v: &Value) -> Error {
    Error::plan(format!("`{op}` cannot take a {} operand", v.type_name()))
}

fn binary_op(op: BinOp, lhs: &Expr, rhs: &Expr, env: &dyn Env) -> Result<Value> {
    match op {
        BinOp::And => {
            let l = eval(lhs, env)?;
            if l != Value::Null && !l.is_true() {
                return Ok(bool_value(false));
            }
            let r = eval(rhs, env)?;
            if r != Value::Null && !r.is_true() {
                return Ok(bool_value(false));
            }
            Ok(if l == Value::Null || r == Value::Null { Value::Null } else { bool_value(true) })
        }
        BinOp::Or => {
            let l = eval(lhs, env)?;
            if l.is_true() {
                return Ok(bool_value(true));
            }
            let r = eval(rhs, env)?;
            if r.is_true() {
                return Ok(bool_value(true));
            }
            Ok(if l == Value::Null || r == Value::Null { Value::Null } else { bool_value(false) })
        }
        _ => {
            let l = eval(lhs, env)?;
            let r = eval(rhs, env)?;
            apply(op, &l, &r)
        }
    }
}

/// Arithmetic and comparison on evaluated operands. Division always yields a
/// double; the other arithmetic operators stay integral for integer inputs.
pub fn apply(op: BinOp, l: &Value, r: &Value) -> Result<Value> {
    if *l == Value::Null || *r == Value::Null {
        return Ok(Value::Null);
    }
    let cmp = |want: fn(Ordering) -> bool| -> Result<Value> {
        match l.compare(r) {
            Some(o) => Ok(bool_value(want(o))),
            None => Err(Error::plan(format!(
                "cannot compare {} with {}",
                l.type_name(),
                r.type_name()
            ))),
        }
    };
    match op {
        BinOp::Eq => cmp(|o| o == Ordering::Equal),
        BinOp::Ne => cmp(|o| o != Ordering::Equal),
        BinOp::Lt => cmp(|o| o == Ordering::Less),
        BinOp::Le => cmp(|o| o != Ordering::Greater),
        BinOp::Gt => cmp(|o| o == Ordering::Greater),
        BinOp::Ge => cmp(|o| o != Ordering::Less),
        BinOp::Add | BinOp::Sub | BinOp::Mul => {
            if let (Value::Int(a), Value::Int(b)) = (l, r) {
                let v = match op {
                    BinOp::Add => a.checked_add(*b),
                    BinOp::Sub => a.checked_sub(*b),
                    _ => a.checked_mul(*b),
                };
                return v.map(Value::Int).ok_or_else(|| Error::plan("integer overflow"));
            }
            let (a, b) = floats(l, r)?;
            Ok(Value::Float(match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                _ => a * b,
            }))
        }
        BinOp::Div => {
            let (a, b) = floats(l, r)?;
            Ok(Value::Float(a / b))
        }
        BinOp::And | BinOp::Or => unreachable!("handled lazily"),
    }
}

fn floats(l: &Value, r: &Value) -> Result<(f64, f64)> {
    let a = l.as_f64().ok_or_else(|| type_error("arithmetic", l))?;
    let b = r.as_f64().ok_or_else(|| type_error("arithmetic", r))?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    struct Vars(HashMap<&'static str, Value>);

    impl Env for Vars {
        fn column(&self, table: Option<&str>, name: &str) -> Result<Value> {
            let key = match table {
                Some(t) => format!("{t}.{name}"),
                None => name.to_string(),
            };
            self.0
                .iter()
                .find(|(k, _)| **k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::plan(format!("no column {key}")))
        }

        fn param(&self, name: &str) -> Result<Value> {
            self.column(None, &format!(":{name}"))
        }
    }

    fn vars() -> Vars {
        Vars(HashMap::from([
            ("a", Value::Int(7)),
            ("t.x", Value::Float(1.5)),
            ("doc.pos", Value::List(Arc::from(vec![Value::Float(20.0), Value::Float(-3.0)]))),
            (":g", Value::text("male")),
        ]))
    }

    fn run(src: &str) -> Value {
        eval(&parse_expr(src).unwrap(), &vars()).unwrap()
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(run("1 + 2 * 3"), Value::Int(7));
        assert_eq!(run("(1 + 2) * 3"), Value::Int(9));
        assert_eq!(run("a / 2"), Value::Float(3.5));
        assert_eq!(run("t.x * 2"), Value::Float(3.0));
        assert_eq!(run("-a + 1"), Value::Int(-6));
        assert_eq!(run("1.5e1"), Value::Float(15.0));
        assert_eq!(run("ln(1)"), Value::Float(0.0));
        assert_eq!(run("LOG10(100)"), Value::Float(2.0));
        assert_eq!(run("CAST(a AS DOUBLE PRECISION)"), Value::Float(7.0));
    }

    #[test]
    fn both_spellings_of_logic() {
        assert_eq!(run("a = 7 AND NOT t.x > 2"), Value::Int(1));
        assert_eq!(run("a == 7 && !(t.x > 2)"), Value::Int(1));
        assert_eq!(run("a <> 7 OR :g = 'male'"), Value::Int(1));
        assert_eq!(run("a != 7 || :g == 'female'"), Value::Int(0));
    }

    #[test]
    fn indexing_and_nulls() {
        assert_eq!(run("doc.pos[1]"), Value::Float(-3.0));
        assert_eq!(run("doc.pos[5]"), Value::Null);
        assert_eq!(run("NULL + 1"), Value::Null);
        assert_eq!(run("NULL AND 0"), Value::Int(0));
    }

    #[test]
    fn statements() {
        let s = parse_statement(
            "-- header\nWITH s AS (SELECT d.id AS id FROM documents d WHERE d.id >= 2)\n\
             SELECT s.id, COUNT(*) AS n FROM s JOIN t AS u ON u.id = s.id \
             GROUP BY s.id ORDER BY n DESC, id LIMIT 3;",
        )
        .unwrap();
        assert_eq!(s.ctes.len(), 1);
        assert_eq!(s.ctes[0].1.from.name(), "d");
        assert_eq!(s.body.items[0].alias, "id");
        assert_eq!(s.body.joins[0].table.name(), "u");
        assert!(s.body.items[1].expr.has_aggregate());
        assert!(s.body.order_by[0].descending && !s.body.order_by[1].descending);
        assert_eq!(s.body.limit, Some(3));
    }

    #[test]
    fn errors() {
        assert!(parse_expr("1 +").is_err());
        assert!(parse_expr("'open").is_err());
        assert!(parse_expr("a ? b").is_err());
        assert!(parse_statement("SELECT a").is_err());
        assert!(parse_statement("SELECT a FROM t LIMIT x").is_err());
        assert!(eval(&parse_expr("'a' + 1").unwrap(), &vars()).is_err());
        assert!(eval(&parse_expr("nope(1)").unwrap(), &vars()).is_err());
    }
}
