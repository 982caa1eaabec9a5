//! Tables written as CSV (with `#` provenance lines and a JSON sidecar) or
//! as a single JSON document.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const TOOL: &str = "spinnet";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()
    }
}

/// Where a command's result came from: every parameter plus the seed.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub params: Value,
}

impl Provenance {
    pub fn new<P: Serialize>(command: &str, seed: Option<u64>, params: &P) -> Self {
        Provenance {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            seed,
            params: serde_json::to_value(params).expect("parameters serialize"),
        }
    }

    fn comment_lines(&self) -> String {
        let seed = self.seed.map_or("none".to_string(), |s| s.to_string());
        format!(
            "# {} {}\n# command: {}\n# seed: {}\n# params: {}\n",
            self.tool, self.version, self.command, seed, self.params
        )
    }
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    provenance: &'a Provenance,
    columns: &'a [String],
    rows: &'a [Vec<Cell>],
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<&'a Value>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    provenance: &'a Provenance,
    data_file: String,
    columns: &'a [String],
    row_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<&'a Value>,
}

/// `foo.csv` -> `foo.json`; a CSV already named `.json` gets `.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let candidate = out.with_extension("json");
    if candidate == out {
        let mut s = out.as_os_str().to_owned();
        s.push(".meta.json");
        PathBuf::from(s)
    } else {
        candidate
    }
}

pub fn render_csv(table: &Table, prov: &Provenance) -> String {
    let mut buf = prov.comment_lines().into_bytes();
    table.write_csv(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Writes `table` to `out` (stdout when `None`) in the requested format.
pub fn emit(
    table: &Table,
    prov: &Provenance,
    summary: Option<&Value>,
    out: Option<&Path>,
    format: Format,
) -> CliResult<()> {
    let text = match format {
        Format::Csv => render_csv(table, prov),
        Format::Json => {
            let doc = JsonDocument {
                provenance: prov,
                columns: &table.columns,
                rows: &table.rows,
                summary,
            };
            serde_json::to_string_pretty(&doc).expect("document serializes") + "\n"
        }
    };
    match out {
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
        }
        Some(path) => {
            write_file(path, &text)?;
            if format == Format::Csv {
                let side = Sidecar {
                    provenance: prov,
                    data_file: path
                        .file_name()
                        .map(|f| f.to_string_lossy().into_owned())
                        .unwrap_or_default(),
                    columns: &table.columns,
                    row_count: table.rows.len(),
                    summary,
                };
                let json = serde_json::to_string_pretty(&side).expect("sidecar serializes") + "\n";
                write_file(&sidecar_path(path), &json)?;
            }
        }
    }
    Ok(())
}

/// Drops `#` lines, leaving the header and data rows.
pub fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}
