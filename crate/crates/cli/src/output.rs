//! Tables, sidecar metadata and plot stubs written by the commands.
//!
//! Output is a pure function of the inputs: no timestamps, fixed column
//! order, and numbers in their shortest round-trip form.

use std::path::{Path, PathBuf};

use anyhow::Context;
use breit_rabi::hamiltonian::AtomRecord;
use serde::Serialize;
use serde_json::Value;

use crate::config::Format;

/// Shortest decimal string that parses back to exactly `x`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        // Collapse -0 so sign noise never changes bytes.
        return "0".into();
    }
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => serde_json::json!(if *x == 0.0 { 0.0 } else { *x }),
            Cell::Num(x) => Value::String(format_number(*x)),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// A rectangular table with free-form comment lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            ..Default::default()
        }
    }

    pub fn comment(mut self, line: impl Into<String>) -> Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }

    /// `#`-prefixed comments, then the header row, then comma-separated rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = serde_json::json!({
            "comments": self.comments,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("plain JSON values");
        s.push('\n');
        s
    }

    /// Parses the CSV form written by [`Table::to_csv`].
    pub fn from_csv(text: &str) -> anyhow::Result<Self> {
        let mut table = Table::default();
        let mut lines = text.lines();
        for line in lines.by_ref() {
            if let Some(c) = line.strip_prefix('#') {
                table.comments.push(c.trim_start().to_string());
            } else {
                table.columns = line.split(',').map(str::to_string).collect();
                break;
            }
        }
        for line in lines {
            let row = line
                .split(',')
                .map(|s| s.parse::<f64>().map(Cell::Num).unwrap_or_else(|_| Cell::Text(s.to_string())))
                .collect::<Vec<_>>();
            anyhow::ensure!(row.len() == table.columns.len(), "ragged row {line:?}");
            table.rows.push(row);
        }
        Ok(table)
    }
}

/// Sidecar record of what produced a set of files.
#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub atom: AtomRecord,
    pub parameters: Value,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Meta {
    pub fn new(command: impl Into<String>, atom: AtomRecord, parameters: Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            atom,
            parameters,
            files: Vec::new(),
            notes: Vec::new(),
        }
    }
}

/// Collects the files of one command run.
#[derive(Debug)]
pub struct Writer {
    pub dir: PathBuf,
    pub format: Format,
    pub gnuplot: bool,
    pub written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(dir: &Path, format: Format, gnuplot: bool) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            gnuplot,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes `table` as `<stem>.csv` or `<stem>.json` and records it in `meta`.
    pub fn table(&mut self, stem: &str, table: &Table, meta: &mut Meta, plot: Option<PlotStub>) -> anyhow::Result<PathBuf> {
        let name = format!("{stem}.{}", self.format.extension());
        let body = match self.format {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json(),
        };
        let path = self.write(&name, &body)?;
        meta.files.push(name.clone());
        if let (true, Some(plot), Format::Csv) = (self.gnuplot, plot, self.format) {
            let script = plot.render(&name, table);
            let gp = format!("{stem}.gp");
            self.write(&gp, &script)?;
            meta.files.push(gp);
        }
        Ok(path)
    }

    pub fn meta(&mut self, stem: &str, meta: &Meta) -> anyhow::Result<PathBuf> {
        let mut body = serde_json::to_string_pretty(meta)?;
        body.push('\n');
        self.write(&format!("{stem}.meta.json"), &body)
    }
}

/// Minimal gnuplot script for a table.
#[derive(Clone, Copy, Debug)]
pub enum PlotStub {
    /// Column 1 against every other column.
    Lines,
    /// `x y z` surface from long-format columns 1, 2 and `z`.
    Surface { z: usize },
}

impl PlotStub {
    fn render(&self, data: &str, table: &Table) -> String {
        let mut s = String::from("set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n");
        match *self {
            PlotStub::Lines => {
                s.push_str(&format!("set xlabel '{}'\n", table.columns[0]));
                let series: Vec<String> = (2..=table.columns.len())
                    .map(|k| format!("'{data}' using 1:{k} with lines"))
                    .collect();
                s.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
            }
            PlotStub::Surface { z } => {
                s.push_str(&format!(
                    "set xlabel '{}'\nset ylabel '{}'\nset pm3d map\nsplot '{data}' using 2:1:{} with pm3d\n",
                    table.columns[1],
                    table.columns[0],
                    z + 1
                ));
            }
        }
        s
    }
}
