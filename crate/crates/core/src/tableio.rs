//! Reading and writing pair-indexed tables.
//!
//! CSV layout, one row per outcome of `Y`:
//!
//! ```text
//! # kind: conditional
//! pair,"(1,2)","(2,3)","(3,4)","(1,3)","(2,4)","(1,4)"
//! Y=1,0.5,0.75,0.25,0.7,0.65,0.625
//! Y=2,0.5,0.25,0.75,0.3,0.35,0.375
//! ```
//!
//! Header cells may also be left unquoted (`pair,(1,2),(2,3),...`). Lines
//! starting with `#` are comments; `# kind: <kind>` and `# d: <n>` are read as
//! directives. A conditional table declaring `d: 2` may give only the first
//! row; the second is its complement. Cells are integers, terminating
//! decimals, fractions `p/q`, or `?` for an unknown entry.
//!
//! JSON layout: `{"kind": ..., "s": 4, "d": 2, "labels": [...],
//! "columns": {"1,2": ["0.5", "0.5"], ...}}`, with string-encoded entries.
//!
//! Joint-count tables list either the consecutive pairs `(x-1,x)` only, which
//! give the counts of `X = x` directly, or every pair, in which case the
//! cumulative columns must add up.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_traits::One;
use serde::Serialize;
use serde_json::Value;

use crate::completion::{PartialFamily, RefinementMap};
use crate::error::{Error, Result};
use crate::pairs::{canonical_pairs, PairFamily, PairIndex};
use crate::probmodel::JointDistribution;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::reconstruct::PopulationTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    Conditional,
    JointCounts,
    PartialConditional,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Conditional => "conditional",
            TableKind::JointCounts => "joint-counts",
            TableKind::PartialConditional => "partial-conditional",
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "conditional" => Ok(TableKind::Conditional),
            "joint-counts" => Ok(TableKind::JointCounts),
            "partial-conditional" => Ok(TableKind::PartialConditional),
            other => Err(Error::BadHeader(format!("unknown table kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cell {
    Value(Rational),
    Unknown,
}

impl Cell {
    fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "?" => Ok(Cell::Unknown),
            t => parse_rational(t).map(Cell::Value),
        }
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            Cell::Value(v) => Some(v),
            Cell::Unknown => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Value(v) => f.write_str(&format_rational(v)),
            Cell::Unknown => f.write_str("?"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` means JSON; anything else is read as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableDocument {
    pub kind: TableKind,
    pub s: usize,
    pub d: usize,
    /// Row names for the outcomes of `Y`; `None` means `Y=1, Y=2, ...`.
    pub labels: Option<Vec<String>>,
    /// Columns in canonical pair order.
    pub columns: Vec<(PairIndex, Vec<Cell>)>,
}

fn default_label(a: usize) -> String {
    format!("Y={a}")
}

fn normalize_labels(labels: Vec<String>) -> Option<Vec<String>> {
    let is_default = labels.iter().enumerate().all(|(k, l)| *l == default_label(k + 1));
    (!is_default).then_some(labels)
}

fn values(col: &[Rational]) -> Vec<Cell> {
    col.iter().cloned().map(Cell::Value).collect()
}

/// Checks the pair list against the canonical order and returns `s`.
fn check_pairs(kind: TableKind, pairs: &[PairIndex]) -> Result<usize> {
    let s = pairs.iter().map(|p| p.j).max().unwrap_or(0);
    if s < 2 {
        return Err(Error::BadHeader("no pair columns".into()));
    }
    let canonical = canonical_pairs(s);
    let consecutive_only = kind == TableKind::JointCounts && pairs == &canonical[..s - 1];
    if pairs != canonical && !consecutive_only {
        let expected: Vec<String> = canonical.iter().map(ToString::to_string).collect();
        let got: Vec<String> = pairs.iter().map(ToString::to_string).collect();
        return Err(Error::BadHeader(format!(
            "pair columns must be {}, got {}",
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(s)
}

impl TableDocument {
    pub fn label(&self, a: usize) -> String {
        match &self.labels {
            Some(l) => l[a - 1].clone(),
            None => default_label(a),
        }
    }

    pub fn from_family(fam: &PairFamily) -> Self {
        Self {
            kind: TableKind::Conditional,
            s: fam.s(),
            d: fam.d(),
            labels: None,
            columns: fam
                .pairs()
                .into_iter()
                .zip(fam.columns())
                .map(|(p, c)| (p, values(c)))
                .collect(),
        }
    }

    pub fn from_partial(pf: &PartialFamily) -> Self {
        let columns = canonical_pairs(pf.s())
            .into_iter()
            .zip(pf.cells())
            .map(|(p, col)| {
                let cells = col
                    .iter()
                    .map(|c| c.clone().map_or(Cell::Unknown, Cell::Value))
                    .collect();
                (p, cells)
            })
            .collect();
        let kind = if pf.is_complete() {
            TableKind::Conditional
        } else {
            TableKind::PartialConditional
        };
        Self {
            kind,
            s: pf.s(),
            d: pf.d(),
            labels: None,
            columns,
        }
    }

    /// Consecutive pair columns holding `P(X = x, Y = a)`.
    pub fn from_joint(joint: &JointDistribution) -> Self {
        let (s, d) = (joint.s(), joint.d());
        let columns = (2..=s)
            .map(|x| {
                (
                    PairIndex::new(x - 1, x),
                    (1..=d).map(|a| Cell::Value(joint.mass(x, a).clone())).collect(),
                )
            })
            .collect();
        Self {
            kind: TableKind::JointCounts,
            s,
            d,
            labels: None,
            columns,
        }
    }

    /// Every pair column, holding the counts of `i < X <= j`.
    pub fn from_population(pop: &PopulationTable) -> Self {
        let columns = canonical_pairs(pop.s())
            .into_iter()
            .map(|p| {
                let cells = pop
                    .pair_counts(p.i, p.j)
                    .into_iter()
                    .map(|c| Cell::Value(Rational::from_integer(c)))
                    .collect();
                (p, cells)
            })
            .collect();
        Self {
            kind: TableKind::JointCounts,
            s: pop.s(),
            d: pop.d(),
            labels: None,
            columns,
        }
    }

    pub fn with_labels(mut self, labels: Option<Vec<String>>) -> Self {
        self.labels = labels.and_then(normalize_labels);
        self
    }

    fn expect_kind(&self, allowed: &[TableKind]) -> Result<()> {
        if allowed.contains(&self.kind) {
            Ok(())
        } else {
            let names: Vec<&str> = allowed.iter().map(|k| k.name()).collect();
            Err(Error::DimensionMismatch(format!(
                "expected a {} table, got {}",
                names.join(" or "),
                self.kind
            )))
        }
    }

    pub fn to_partial(&self) -> Result<PartialFamily> {
        self.expect_kind(&[TableKind::Conditional, TableKind::PartialConditional])?;
        let cells = self
            .columns
            .iter()
            .map(|(_, col)| col.iter().map(|c| c.value().cloned()).collect())
            .collect();
        PartialFamily::new(self.s, self.d, cells)
    }

    pub fn to_family(&self) -> Result<PairFamily> {
        self.expect_kind(&[TableKind::Conditional, TableKind::PartialConditional])?;
        let mut columns = Vec::with_capacity(self.columns.len());
        for (p, col) in &self.columns {
            let known: Option<Vec<Rational>> = col.iter().map(|c| c.value().cloned()).collect();
            columns.push(known.ok_or(Error::UnknownEntries(*p))?);
        }
        PairFamily::new(self.s, self.d, columns)
    }

    pub fn to_joint(&self) -> Result<JointDistribution> {
        self.expect_kind(&[TableKind::JointCounts])?;
        let mut by_pair: BTreeMap<PairIndex, Vec<Rational>> = BTreeMap::new();
        for (p, col) in &self.columns {
            let known: Option<Vec<Rational>> = col.iter().map(|c| c.value().cloned()).collect();
            by_pair.insert(*p, known.ok_or(Error::UnknownEntries(*p))?);
        }
        let rows: Vec<Vec<Rational>> = (2..=self.s)
            .map(|x| by_pair[&PairIndex::new(x - 1, x)].clone())
            .collect();
        for (p, col) in &by_pair {
            let sum: Vec<Rational> = (0..self.d)
                .map(|a| (p.i + 1..=p.j).map(|x| &rows[x - 2][a]).sum())
                .collect();
            if *col != sum {
                return Err(Error::InvalidJoint(format!(
                    "column {p} does not equal the sum of its consecutive columns"
                )));
            }
        }
        JointDistribution::from_weights(self.s, self.d, rows)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec!["pair".to_string()];
        header.extend(self.columns.iter().map(|(p, _)| p.to_string()));
        w.write_record(&header).expect("write to memory");
        for a in 1..=self.d {
            let mut row = vec![self.label(a)];
            row.extend(self.columns.iter().map(|(_, col)| col[a - 1].to_string()));
            w.write_record(&row).expect("write to memory");
        }
        let body = String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8");
        format!("# kind: {}\n{body}", self.kind)
    }

    pub fn to_json(&self) -> String {
        let mut columns = serde_json::Map::new();
        for (p, col) in &self.columns {
            let cells = col.iter().map(|c| Value::String(c.to_string())).collect();
            columns.insert(format!("{},{}", p.i, p.j), Value::Array(cells));
        }
        let mut doc = serde_json::Map::new();
        doc.insert("kind".into(), Value::String(self.kind.to_string()));
        doc.insert("s".into(), self.s.into());
        doc.insert("d".into(), self.d.into());
        if let Some(labels) = &self.labels {
            doc.insert("labels".into(), labels.clone().into());
        }
        doc.insert("columns".into(), Value::Object(columns));
        serde_json::to_string_pretty(&Value::Object(doc)).expect("plain JSON values")
    }

    pub fn serialize(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

pub fn parse_table(text: &str, format: Format) -> Result<TableDocument> {
    match format {
        Format::Csv => parse_csv(text),
        Format::Json => parse_json(text),
    }
}

pub fn read_table(path: &Path) -> Result<TableDocument> {
    let text =
        std::fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    parse_table(&text, Format::from_path(path))
}

#[derive(Default)]
struct Directives {
    kind: Option<TableKind>,
    d: Option<usize>,
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits `# key: value` lines off, keeping line numbers of the rest intact.
fn split_directives(text: &str) -> Result<(Directives, String)> {
    let mut dir = Directives::default();
    let mut body = String::with_capacity(text.len());
    for (n, line) in text.lines().enumerate() {
        let Some(comment) = line.trim_start().strip_prefix('#') else {
            body.push_str(line);
            body.push('\n');
            continue;
        };
        body.push('\n');
        if let Some((key, value)) = comment.split_once(':') {
            match key.trim() {
                "kind" => dir.kind = Some(value.parse().map_err(|e: Error| parse_error(n + 1, 1, e.to_string()))?),
                "d" => {
                    let d = value.trim().parse().map_err(|_| {
                        parse_error(
                            n + 1,
                            1,
                            format!("d must be a positive integer, got {:?}", value.trim()),
                        )
                    })?;
                    dir.d = Some(d);
                }
                _ => {}
            }
        }
    }
    Ok((dir, body))
}

/// Rejoins `(1` and `2)` when an unquoted pair header was split on its comma.
fn header_pairs(fields: &[String]) -> Result<Vec<PairIndex>> {
    let mut out = Vec::new();
    let mut pending: Option<String> = None;
    for f in fields {
        let f = f.trim();
        let joined = match pending.take() {
            Some(open) => format!("{open},{f}"),
            None if f.starts_with('(') && !f.ends_with(')') => {
                pending = Some(f.to_string());
                continue;
            }
            None => f.to_string(),
        };
        out.push(joined.parse()?);
    }
    if let Some(open) = pending {
        return Err(Error::BadHeader(format!("unterminated pair {open:?}")));
    }
    Ok(out)
}

fn parse_csv(text: &str) -> Result<TableDocument> {
    let (dir, body) = split_directives(text)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(line, 1, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        records.push((line, rec.iter().map(str::to_string).collect::<Vec<String>>()));
    }
    let Some((_, header)) = records.first() else {
        return Err(Error::BadHeader("empty table".into()));
    };
    if !header[0].eq_ignore_ascii_case("pair") {
        return Err(Error::BadHeader(format!(
            "first header cell must be \"pair\", got {:?}",
            header[0]
        )));
    }
    let pairs = header_pairs(&header[1..])?;
    let kind_hint = dir.kind.unwrap_or(TableKind::Conditional);
    let s = check_pairs(kind_hint, &pairs)?;

    let mut labels = Vec::new();
    let mut rows: Vec<Vec<Cell>> = Vec::new();
    for (line, rec) in &records[1..] {
        if rec.len() != pairs.len() + 1 {
            return Err(parse_error(
                *line,
                rec.len().min(pairs.len() + 1) + 1,
                format!("expected {} cells, found {}", pairs.len() + 1, rec.len()),
            ));
        }
        labels.push(rec[0].clone());
        let cells = rec[1..]
            .iter()
            .enumerate()
            .map(|(k, t)| Cell::parse(t).map_err(|e| parse_error(*line, k + 2, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        rows.push(cells);
    }
    if rows.is_empty() {
        return Err(Error::DimensionMismatch("the table has no outcome rows".into()));
    }
    let has_unknown = rows.iter().flatten().any(|c| *c == Cell::Unknown);
    let kind = dir.kind.unwrap_or(if has_unknown {
        TableKind::PartialConditional
    } else {
        TableKind::Conditional
    });
    let d = dir.d.unwrap_or(rows.len());

    if rows.len() == 1 && d == 2 && kind != TableKind::JointCounts {
        let complement = rows[0]
            .iter()
            .map(|c| match c {
                Cell::Value(v) => Cell::Value(Rational::one() - v),
                Cell::Unknown => Cell::Unknown,
            })
            .collect();
        rows.push(complement);
        labels.push(default_label(2));
    }
    if rows.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "d = {d} declared but {} outcome rows given",
            rows.len()
        )));
    }
    let (line0, _) = &records[1];
    finish(kind, s, d, labels, pairs, rows, *line0)
}

fn finish(
    kind: TableKind,
    s: usize,
    d: usize,
    labels: Vec<String>,
    pairs: Vec<PairIndex>,
    rows: Vec<Vec<Cell>>,
    line: usize,
) -> Result<TableDocument> {
    check_pairs(kind, &pairs)?;
    if kind != TableKind::PartialConditional && rows.iter().flatten().any(|c| *c == Cell::Unknown) {
        return Err(parse_error(
            line,
            1,
            format!(
                "unknown cells are only allowed in a {} table",
                TableKind::PartialConditional
            ),
        ));
    }
    let columns = pairs
        .into_iter()
        .enumerate()
        .map(|(k, p)| (p, rows.iter().map(|r| r[k].clone()).collect()))
        .collect();
    Ok(TableDocument {
        kind,
        s,
        d,
        labels: normalize_labels(labels),
        columns,
    })
}

fn parse_json(text: &str) -> Result<TableDocument> {
    let doc: Value = serde_json::from_str(text).map_err(|e| parse_error(e.line(), e.column(), e.to_string()))?;
    let field_error = |msg: String| parse_error(0, 0, msg);
    let obj = doc
        .as_object()
        .ok_or_else(|| field_error("expected a JSON object".into()))?;

    let kind: TableKind = match obj.get("kind") {
        Some(Value::String(k)) => k.parse()?,
        None => TableKind::Conditional,
        Some(other) => return Err(field_error(format!("\"kind\" must be a string, got {other}"))),
    };
    let columns = obj
        .get("columns")
        .and_then(Value::as_object)
        .ok_or_else(|| field_error("missing object \"columns\"".into()))?;

    let mut entries: Vec<(PairIndex, Vec<Cell>)> = Vec::with_capacity(columns.len());
    for (key, col) in columns {
        let pair: PairIndex = key.parse()?;
        let cells = col
            .as_array()
            .ok_or_else(|| field_error(format!("column {pair} must be an array")))?
            .iter()
            .map(|v| match v {
                Value::String(t) => Cell::parse(t),
                Value::Number(n) if n.is_i64() || n.is_u64() => Cell::parse(&n.to_string()),
                other => Err(Error::InvalidNumber(format!(
                    "{other} (quote non-integer entries as strings)"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        entries.push((pair, cells));
    }
    entries.sort_by_key(|(p, _)| (p.gap(), p.i));
    let pairs: Vec<PairIndex> = entries.iter().map(|(p, _)| *p).collect();
    let s = check_pairs(kind, &pairs)?;
    if let Some(declared) = obj.get("s").and_then(Value::as_u64) {
        if declared as usize != s {
            return Err(Error::DimensionMismatch(format!(
                "s = {declared} declared but the columns span s = {s}"
            )));
        }
    }
    let d = match obj.get("d").and_then(Value::as_u64) {
        Some(d) => d as usize,
        None => entries[0].1.len(),
    };
    if let Some((p, col)) = entries.iter().find(|(_, c)| c.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "column {p} has {} entries, expected {d}",
            col.len()
        )));
    }
    let labels = match obj.get("labels") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| field_error("labels must be strings".into()))
            })
            .collect::<Result<Vec<_>>>()?,
        Some(_) => return Err(field_error("labels must be an array".into())),
    };
    let labels = if labels.is_empty() {
        (1..=d).map(default_label).collect()
    } else if labels.len() == d {
        labels
    } else {
        return Err(Error::DimensionMismatch(format!("{} labels for d = {d}", labels.len())));
    };
    let rows: Vec<Vec<Cell>> = (0..d)
        .map(|a| entries.iter().map(|(_, c)| c[a].clone()).collect())
        .collect();
    finish(kind, s, d, labels, pairs, rows, 0)
}

/// A JSON array of injections, e.g. `[[1,2,4,5],[1,2,3,4]]`.
pub fn parse_refinement_map(text: &str) -> Result<RefinementMap> {
    let injections: Vec<Vec<usize>> =
        serde_json::from_str(text).map_err(|e| parse_error(e.line(), e.column(), e.to_string()))?;
    RefinementMap::new(injections)
}
