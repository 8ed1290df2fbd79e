//! Tabular reports with deterministic bytes.
//!
//! A [`Report`] is a reproducibility header (`meta`) plus one or more named
//! tables. CSV writes floats as `{:.16e}` (17 significant digits, enough to
//! round-trip any f64); JSON writes each table as parallel column arrays.
//! Meta keys are emitted sorted, so equal runs give equal files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Number, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    U64(u64),
    I64(i64),
    F64(f64),
    Str(String),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U64(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I64(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F64(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

/// Full-precision float formatting: round-trips exactly.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::U64(v) => v.to_string(),
            Cell::I64(v) => v.to_string(),
            Cell::F64(v) => format_f64(*v),
            Cell::Str(s) => {
                debug_assert!(
                    !s.contains([',', '\n', '"']),
                    "cell strings are identifiers"
                );
                s.clone()
            }
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::U64(v) => Json::Number((*v).into()),
            Cell::I64(v) => Json::Number((*v).into()),
            // Non-finite floats have no JSON number; null marks them.
            Cell::F64(v) => Number::from_f64(*v).map_or(Json::Null, Json::Number),
            Cell::Str(s) => Json::String(s.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// `{column: [values...]}` with columns in declaration order.
    pub fn json_columns(&self) -> Json {
        // serde_json's default map sorts keys; an explicit column list
        // preserves the declared order for readers that want it.
        let mut obj = Map::new();
        obj.insert(
            "columns".to_string(),
            Json::Array(self.columns.iter().map(|c| json!(c)).collect()),
        );
        for (j, col) in self.columns.iter().enumerate() {
            let values: Vec<Json> = self.rows.iter().map(|r| r[j].json()).collect();
            obj.insert(col.clone(), Json::Array(values));
        }
        Json::Object(obj)
    }
}

/// Meta header plus named tables; knows how to serialize itself.
#[derive(Debug, Clone)]
pub struct Report {
    meta: Map<String, Json>,
    tables: Vec<Table>,
}

impl Report {
    pub fn new(subcommand: &str) -> Self {
        let mut meta = Map::new();
        meta.insert("subcommand".to_string(), json!(subcommand));
        meta.insert(
            "tool".to_string(),
            json!(format!("bandlab {}", env!("CARGO_PKG_VERSION"))),
        );
        Report {
            meta,
            tables: Vec::new(),
        }
    }

    pub fn set_meta(&mut self, key: &str, value: Json) {
        self.meta.insert(key.to_string(), value);
    }

    pub fn push_table(&mut self, table: Table) {
        self.tables.push(table);
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn json_string(&self) -> String {
        let mut root = Map::new();
        root.insert("meta".to_string(), Json::Object(self.meta.clone()));
        for t in &self.tables {
            root.insert(t.name.clone(), t.json_columns());
        }
        let mut s = serde_json::to_string_pretty(&Json::Object(root))
            .expect("report serialization cannot fail");
        s.push('\n');
        s
    }

    /// CSV text: a bare table when there is one, `# table:` sections when
    /// there are several (stdout only; files get one table each).
    pub fn csv_string(&self) -> String {
        if self.tables.len() == 1 {
            return self.tables[0].csv();
        }
        let mut out = String::new();
        for t in &self.tables {
            out.push_str(&format!("# table: {}\n", t.name));
            out.push_str(&t.csv());
        }
        out
    }

    /// Writes to `out` (or stdout when `None`). Multi-table CSV reports
    /// put the first table at `out` and each further table at a sibling
    /// path `stem.<table>.csv`.
    pub fn write(&self, out: Option<&Path>, format: OutputFormat) -> std::io::Result<()> {
        match (out, format) {
            (None, OutputFormat::Json) => {
                std::io::stdout().write_all(self.json_string().as_bytes())
            }
            (None, OutputFormat::Csv) => std::io::stdout().write_all(self.csv_string().as_bytes()),
            (Some(path), OutputFormat::Json) => fs::write(path, self.json_string()),
            (Some(path), OutputFormat::Csv) => {
                assert!(!self.tables.is_empty(), "report has no tables");
                fs::write(path, self.tables[0].csv())?;
                for t in &self.tables[1..] {
                    fs::write(sibling_path(path, &t.name), t.csv())?;
                }
                Ok(())
            }
        }
    }
}

/// `dir/file.csv` -> `dir/file.<name>.csv`.
pub fn sibling_path(path: &Path, name: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    path.with_file_name(format!("{stem}.{name}.{ext}"))
}
