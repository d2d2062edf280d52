//! Run reports: `{command, config, rows, pass}` with JSON as the canonical
//! form and CSV or aligned text as projections of it.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

pub type Row = Map<String, Value>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub rows: Vec<Row>,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Builds a row from `(key, value)` pairs.
#[macro_export]
macro_rules! row {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut r = $crate::report::Row::new();
        $(r.insert(String::from($k), serde_json::json!($v));)*
        r
    }};
}

impl Report {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            command: command.to_string(),
            config,
            rows: Vec::new(),
            pass: true,
        }
    }

    pub fn push(&mut self, row: Row) {
        if row.get("pass") == Some(&Value::Bool(false)) {
            self.pass = false;
        }
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: Report) {
        for mut row in other.rows {
            row.insert("command".into(), Value::String(other.command.clone()));
            self.rows.push(row);
        }
        self.pass &= other.pass;
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("serializable") + "\n",
            Format::Csv => self.csv(),
            Format::Table => self.table(),
        }
    }

    fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = Vec::new();
        for row in &self.rows {
            for k in row.keys() {
                if !cols.contains(k) {
                    cols.push(k.clone());
                }
            }
        }
        cols.sort();
        cols
    }

    fn csv(&self) -> String {
        let cols = self.columns();
        let mut out = cols.join(",") + "\n";
        for row in &self.rows {
            let cells: Vec<String> = cols.iter().map(|c| csv_cell(row.get(c))).collect();
            out += &cells.join(",");
            out.push('\n');
        }
        out
    }

    /// One aligned block per run of rows sharing the same columns.
    fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.command);
        let mut i = 0;
        while i < self.rows.len() {
            let keys: Vec<&String> = self.rows[i].keys().collect();
            let mut j = i + 1;
            while j < self.rows.len() && self.rows[j].keys().collect::<Vec<_>>() == keys {
                j += 1;
            }
            let block = &self.rows[i..j];
            let cells: Vec<Vec<String>> = block
                .iter()
                .map(|r| keys.iter().map(|k| plain(r.get(*k))).collect())
                .collect();
            let widths: Vec<usize> = keys
                .iter()
                .enumerate()
                .map(|(c, k)| cells.iter().map(|r| width(&r[c])).max().unwrap_or(0).max(width(k)))
                .collect();
            let line = |vals: Vec<&str>| -> String {
                vals.iter()
                    .zip(&widths)
                    .map(|(v, w)| format!("{v}{}", " ".repeat(w - width(v))))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            out += &line(keys.iter().map(|k| k.as_str()).collect());
            out.push('\n');
            for r in &cells {
                out += &line(r.iter().map(|s| s.as_str()).collect());
                out.push('\n');
            }
            out.push('\n');
            i = j;
        }
        let _ = writeln!(out, "pass={}", self.pass);
        out
    }
}

fn width(s: &str) -> usize {
    s.chars().count()
}

fn plain(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

fn csv_cell(v: Option<&Value>) -> String {
    let s = plain(v);
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}
