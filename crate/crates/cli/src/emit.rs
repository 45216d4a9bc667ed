//! Rendering of command results as CSV or JSON, and atomic file output.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(v) => v.clone(),
            Cell::Bool(v) => v.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => serde_json::Number::from_f64(*v)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Text(v) => Value::from(v.as_str()),
            Cell::Bool(v) => Value::from(*v),
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
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Shortest round-trip decimal representation, always with a `.` separator.
fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

/// What a command produced: scalar results that only appear in JSON, and a
/// table that appears in both formats.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub summary: Map<String, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn table(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    /// Inserts every field of a serializable object into the summary.
    pub fn merge(&mut self, value: &impl serde::Serialize) -> serde_json::Result<()> {
        if let Value::Object(map) = serde_json::to_value(value)? {
            self.summary.extend(map);
        }
        Ok(())
    }
}

/// Command name and parameters, in the order they should be printed.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: &'static str,
    pub parameters: Vec<(&'static str, String)>,
}

impl Provenance {
    fn header_line(&self) -> String {
        let mut line = format!("# wavemera {VERSION} command={}", self.command);
        for (key, value) in &self.parameters {
            line.push_str(&format!(" {key}={value}"));
        }
        line
    }

    fn to_json(&self) -> Value {
        let parameters: Map<String, Value> = self
            .parameters
            .iter()
            .map(|(k, v)| (k.to_string(), Value::from(v.as_str())))
            .collect();
        serde_json::json!({
            "tool": "wavemera",
            "version": VERSION,
            "command": self.command,
            "parameters": parameters,
        })
    }
}

pub fn render(report: &Report, provenance: &Provenance, format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut out = provenance.header_line().into_bytes();
            out.push(b'\n');
            let mut writer = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            writer.write_record(&report.columns)?;
            for row in &report.rows {
                writer.write_record(row.iter().map(Cell::to_csv))?;
            }
            writer.into_inner().map_err(|e| e.into_error())
        }
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("provenance".into(), provenance.to_json());
            doc.extend(report.summary.clone());
            doc.insert("columns".into(), Value::from(report.columns.clone()));
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|row| {
                    Value::Object(
                        report
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, v)| (c.to_string(), v.to_json()))
                            .collect(),
                    )
                })
                .collect();
            doc.insert("rows".into(), Value::Array(rows));
            let mut out = serde_json::to_vec_pretty(&Value::Object(doc))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename,
/// or to standard output when no path is given.
pub fn write_output(bytes: &[u8], path: Option<&Path>) -> io::Result<()> {
    let Some(path) = path else {
        let mut stdout = io::stdout().lock();
        stdout.write_all(bytes)?;
        return stdout.flush();
    };
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name")
    })?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (Report, Provenance) {
        let mut report = Report::table(&["K", "value"]);
        report.push(vec![Cell::from(3usize), Cell::from(-0.5)]);
        report.push(vec![Cell::from(4usize), Cell::from(1e-20)]);
        report.set("rel_error", 0.25);
        let provenance = Provenance {
            command: "energy1d",
            parameters: vec![("K", "3".into()), ("L", "3".into())],
        };
        (report, provenance)
    }

    #[test]
    fn csv_layout() {
        let (report, provenance) = sample();
        let text = String::from_utf8(render(&report, &provenance, Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            format!("# wavemera {VERSION} command=energy1d K=3 L=3")
        );
        assert_eq!(lines[1], "K,value");
        assert_eq!(lines[2], "3,-0.5");
        assert_eq!(lines[3], "4,1e-20");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn json_layout() {
        let (report, provenance) = sample();
        let doc: Value =
            serde_json::from_slice(&render(&report, &provenance, Format::Json).unwrap()).unwrap();
        assert_eq!(doc["provenance"]["command"], "energy1d");
        assert_eq!(doc["provenance"]["parameters"]["K"], "3");
        assert_eq!(doc["rel_error"], 0.25);
        assert_eq!(doc["rows"][0]["value"], -0.5);
    }

    #[test]
    fn floats_keep_a_decimal_point() {
        assert_eq!(format_float(2.0), "2.0");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn atomic_write_replaces_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_output(b"old", Some(&path)).unwrap();
        write_output(b"new", Some(&path)).unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"new");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
