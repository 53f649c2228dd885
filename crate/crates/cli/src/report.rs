//! CSV tables, the plain-text summary, and the check that every number in
//! the summary re-derives from a table.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub const SUMMARY_FILE: &str = "summary.txt";
pub const SCALARS_TABLE: &str = "scalars.csv";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    /// Floats carry 17 significant digits, so they parse back exactly.
    pub fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn render_human(&self) -> String {
        match self {
            Cell::Float(v) => v.to_string(),
            other => other.render(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    /// Aligned text for `--format table`.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::render_human).collect()).collect();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |items: &[String], out: &mut String| {
            let parts: Vec<String> = items.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&self.header, &mut out);
        for row in &cells {
            line(row, &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    Min,
    Max,
    First,
    Last,
    Mean,
    Count,
}

impl Aggregate {
    fn name(self) -> &'static str {
        match self {
            Aggregate::Min => "min",
            Aggregate::Max => "max",
            Aggregate::First => "first",
            Aggregate::Last => "last",
            Aggregate::Mean => "mean",
            Aggregate::Count => "count",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "min" => Aggregate::Min,
            "max" => Aggregate::Max,
            "first" => Aggregate::First,
            "last" => Aggregate::Last,
            "mean" => Aggregate::Mean,
            "count" => Aggregate::Count,
            _ => return None,
        })
    }

    /// Applies the aggregate in row order.
    pub fn apply(self, column: &[f64]) -> Option<f64> {
        match self {
            Aggregate::Min => column.iter().copied().reduce(f64::min),
            Aggregate::Max => column.iter().copied().reduce(f64::max),
            Aggregate::First => column.first().copied(),
            Aggregate::Last => column.last().copied(),
            Aggregate::Mean => {
                if column.is_empty() {
                    None
                } else {
                    Some(column.iter().sum::<f64>() / column.len() as f64)
                }
            }
            Aggregate::Count => Some(column.len() as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Column { aggregate: Aggregate, table: String, column: String },
    /// row `name` of the two-column scalars table
    Scalar(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryLine {
    pub key: String,
    pub value: Cell,
    pub source: Option<Source>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub lines: Vec<SummaryLine>,
    pub tables: Vec<Table>,
    scalars: Vec<(String, f64)>,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Self { title: title.to_string(), ..Default::default() }
    }

    pub fn text(&mut self, key: &str, value: impl Into<Cell>) {
        self.lines.push(SummaryLine { key: key.to_string(), value: value.into(), source: None });
    }

    /// A number backed by the scalars table.
    pub fn scalar(&mut self, key: &str, value: f64) {
        self.scalars.push((key.to_string(), value));
        self.lines.push(SummaryLine {
            key: key.to_string(),
            value: Cell::Float(value),
            source: Some(Source::Scalar(key.to_string())),
        });
    }

    /// A number computed from a column of one of the tables.
    pub fn derived(&mut self, key: &str, aggregate: Aggregate, table: &str, column: &str) -> CliResult<f64> {
        let t = self
            .tables
            .iter()
            .find(|t| t.name == table)
            .ok_or_else(|| CliError::Revalidation(format!("no table {table}")))?;
        let values = numeric_column(t, column)?;
        let v = aggregate.apply(&values).ok_or_else(|| CliError::Revalidation(format!("{table}:{column} is empty")))?;
        let value = if aggregate == Aggregate::Count { Cell::Int(v as i64) } else { Cell::Float(v) };
        self.lines.push(SummaryLine {
            key: key.to_string(),
            value,
            source: Some(Source::Column { aggregate, table: table.to_string(), column: column.to_string() }),
        });
        Ok(v)
    }

    pub fn add_table(&mut self, table: Table) {
        self.tables.push(table);
    }

    fn scalars_table(&self) -> Option<Table> {
        if self.scalars.is_empty() {
            return None;
        }
        let mut t = Table::new(SCALARS_TABLE, &["name", "value"]);
        for (k, v) in &self.scalars {
            t.push(vec![k.as_str().into(), (*v).into()]);
        }
        Some(t)
    }

    pub fn all_tables(&self) -> Vec<Table> {
        let mut out = self.tables.clone();
        out.extend(self.scalars_table());
        out
    }

    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.title);
        for line in &self.lines {
            let _ = write!(out, "{} = {}", line.key, line.value.render());
            match &line.source {
                Some(Source::Column { aggregate, table, column }) => {
                    let _ = write!(out, " [{} {}:{}]", aggregate.name(), table, column);
                }
                Some(Source::Scalar(name)) => {
                    let _ = write!(out, " [scalar {SCALARS_TABLE}:{name}]");
                }
                None => {}
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir)?;
        for t in self.all_tables() {
            fs::write(dir.join(&t.name), t.to_csv()?)?;
        }
        fs::write(dir.join(SUMMARY_FILE), self.summary_text())?;
        Ok(())
    }
}

fn numeric_column(t: &Table, column: &str) -> CliResult<Vec<f64>> {
    let idx = t
        .header
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| CliError::Revalidation(format!("no column {column} in {}", t.name)))?;
    t.rows
        .iter()
        .map(|r| match &r[idx] {
            Cell::Float(v) => Ok(*v),
            Cell::Int(v) => Ok(*v as f64),
            Cell::Text(s) => s.parse().map_err(|_| CliError::Revalidation(format!("{}:{column} holds {s}", t.name))),
        })
        .collect()
}

fn read_table(path: &Path) -> CliResult<Table> {
    let mut reader = csv::Reader::from_path(path)?;
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut table = Table { name: name.to_string(), header, rows: Vec::new() };
    for record in reader.records() {
        table.rows.push(record?.iter().map(|s| Cell::Text(s.to_string())).collect());
    }
    Ok(table)
}

/// Recomputes every sourced line of `summary.txt` from the CSV files next
/// to it. Returns the number of lines checked.
pub fn revalidate(dir: &Path) -> CliResult<usize> {
    let summary = fs::read_to_string(dir.join(SUMMARY_FILE))?;
    let mut checked = 0;
    for line in summary.lines() {
        let Some(open) = line.rfind(" [") else { continue };
        if !line.ends_with(']') || line.starts_with('#') {
            continue;
        }
        let (head, tail) = line.split_at(open);
        let Some((key, value)) = head.split_once(" = ") else {
            return Err(CliError::Revalidation(format!("malformed line: {line}")));
        };
        let inner = &tail[2..tail.len() - 1];
        let (agg, location) = inner
            .split_once(' ')
            .ok_or_else(|| CliError::Revalidation(format!("malformed source: {line}")))?;
        let (table, column) = location
            .split_once(':')
            .ok_or_else(|| CliError::Revalidation(format!("malformed source: {line}")))?;
        let t = read_table(&dir.join(table))?;
        let expected = if agg == "scalar" {
            let name_idx = t.header.iter().position(|h| h == "name");
            let value_idx = t.header.iter().position(|h| h == "value");
            let (Some(ni), Some(vi)) = (name_idx, value_idx) else {
                return Err(CliError::Revalidation(format!("{table} is not a scalars table")));
            };
            let row = t
                .rows
                .iter()
                .find(|r| matches!(&r[ni], Cell::Text(s) if s == column))
                .ok_or_else(|| CliError::Revalidation(format!("no scalar {column}")))?;
            let Cell::Text(s) = &row[vi] else { unreachable!() };
            s.parse::<f64>().map(format_float).map_err(|_| CliError::Revalidation(format!("bad scalar {s}")))?
        } else {
            let aggregate =
                Aggregate::parse(agg).ok_or_else(|| CliError::Revalidation(format!("unknown aggregate {agg}")))?;
            let values = numeric_column(&t, column)?;
            let v = aggregate
                .apply(&values)
                .ok_or_else(|| CliError::Revalidation(format!("{table}:{column} is empty")))?;
            if aggregate == Aggregate::Count {
                (v as i64).to_string()
            } else {
                format_float(v)
            }
        };
        if expected != value {
            return Err(CliError::Revalidation(format!("{key}: summary has {value}, tables give {expected}")));
        }
        checked += 1;
    }
    Ok(checked)
}
