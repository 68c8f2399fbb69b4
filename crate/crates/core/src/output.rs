//! Table emission as CSV or JSON with a fixed number of significant digits,
//! so identical inputs give byte-identical files.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const DEFAULT_PRECISION: usize = 12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

/// Header plus rows; every row has one cell per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }
}

pub fn validate_precision(precision: usize) -> Result<()> {
    if (6..=17).contains(&precision) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "precision must lie in [6, 17], got {precision}"
        )))
    }
}

/// Scientific notation with `precision` significant digits, e.g.
/// `1.25000000000e-1`. Non-finite values print as `nan`, `inf`, `-inf`.
pub fn format_number(v: f64, precision: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // normalize negative zero so equal values print equally
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{:.*e}", precision.saturating_sub(1), v)
}

fn csv_field(c: &Cell, precision: usize) -> String {
    match c {
        Cell::Num(v) => format_number(*v, precision),
        Cell::Int(i) => i.to_string(),
        Cell::Bool(b) => (if *b { "1" } else { "0" }).into(),
        Cell::Empty => String::new(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

pub fn write_csv<W: Write>(table: &Table, precision: usize, mut w: W) -> Result<()> {
    writeln!(w, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let fields: Vec<String> = row.iter().map(|c| csv_field(c, precision)).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

fn json_cell(c: &Cell, precision: usize) -> serde_json::Value {
    use serde_json::Value;
    match c {
        Cell::Num(v) if v.is_finite() => {
            let rounded: f64 = format_number(*v, precision)
                .parse()
                .expect("formatted number parses");
            serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
        }
        Cell::Num(_) | Cell::Empty => Value::Null,
        Cell::Int(i) => Value::from(*i),
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Text(s) => Value::String(s.clone()),
    }
}

/// Rounds every float in a JSON document to `precision` significant digits.
pub fn round_json(v: &mut serde_json::Value, precision: usize) {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            *v = json_cell(&Cell::Num(x), precision);
        }
        Value::Array(a) => a.iter_mut().for_each(|x| round_json(x, precision)),
        Value::Object(o) => o.values_mut().for_each(|x| round_json(x, precision)),
        _ => {}
    }
}

/// `{"columns": [...], "rows": [{column: value}, ...], "report": ...}`.
pub fn write_json<W: Write>(
    table: &Table,
    report: Option<&serde_json::Value>,
    precision: usize,
    mut w: W,
) -> Result<()> {
    let rows: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|row| {
            let map = table
                .columns
                .iter()
                .cloned()
                .zip(row.iter().map(|c| json_cell(c, precision)))
                .collect();
            serde_json::Value::Object(map)
        })
        .collect();
    let mut doc = serde_json::json!({ "columns": table.columns, "rows": rows });
    if let Some(r) = report {
        let mut r = r.clone();
        round_json(&mut r, precision);
        doc["report"] = r;
    }
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    Ok(())
}
