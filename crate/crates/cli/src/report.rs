//! Tables, embedded checks and their CSV / JSON serialization.

use std::io::Write;

use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Result<Box<RawValue>> {
        let text = match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) if v.is_finite() => format_float(*v),
            Cell::Num(_) => "null".into(),
            Cell::Text(s) => serde_json::to_string(s)?,
        };
        Ok(RawValue::from_string(text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// An assertion embedded in a command; the exit status is 0 iff all pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub table: Table,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.table.columns)?;
        for row in &self.table.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()
            .map_err(|e| crate::error::CliError::io("csv", e))?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Mirror<'a> {
            command: &'a str,
            columns: &'a [&'static str],
            rows: Vec<Vec<Box<RawValue>>>,
            checks: &'a [Check],
            pass: bool,
        }
        let rows = self
            .table
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::json).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mirror = Mirror {
            command: self.command,
            columns: &self.table.columns,
            rows,
            checks: &self.checks,
            pass: self.passed(),
        };
        serde_json::to_writer_pretty(&mut out, &mirror)?;
        writeln!(out).map_err(|e| crate::error::CliError::io("json", e))?;
        Ok(())
    }
}
