//! Tables and reports: CSV for flat tables, JSON (sorted keys) for
//! everything nested. Log-space values are written as sign and log-magnitude
//! plus a convenience float when it is representable.

use crate::config::{ExperimentConfig, Format};
use crate::error::HResult;
use bergman_core::LogReal;
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
    Log(LogReal),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}
impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(i64::from(x))
    }
}
impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}
impl From<LogReal> for Cell {
    fn from(x: LogReal) -> Self {
        Cell::Log(x)
    }
}

/// Shortest round-trip decimal; stable across runs.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

fn num_value(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(fmt_f64(x))
    }
}

pub fn log_value(x: &LogReal) -> Value {
    json!({
        "sign": x.sign(),
        "log_mag": num_value(x.log_mag()),
        "value": x.to_f64_checked().map_or(Value::Null, num_value),
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    /// CSV header; a log column `x` becomes `x_sign,x_log,x`.
    fn csv_header(&self) -> Vec<String> {
        let first = self.rows.first();
        let mut out = Vec::new();
        for (i, c) in self.columns.iter().enumerate() {
            if matches!(first.map(|r| &r[i]), Some(Cell::Log(_))) {
                out.push(format!("{c}_sign"));
                out.push(format!("{c}_log"));
            }
            out.push(c.clone());
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> HResult<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(self.csv_header())?;
        for row in &self.rows {
            let mut rec = Vec::new();
            for cell in row {
                match cell {
                    Cell::Int(i) => rec.push(i.to_string()),
                    Cell::Num(x) => rec.push(fmt_f64(*x)),
                    Cell::Text(s) => rec.push(s.clone()),
                    Cell::Bool(b) => rec.push(b.to_string()),
                    Cell::Log(l) => {
                        rec.push(l.sign().to_string());
                        rec.push(fmt_f64(l.log_mag()));
                        rec.push(l.to_f64_checked().map_or(String::new(), fmt_f64));
                    }
                }
            }
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    let v = match cell {
                        Cell::Int(i) => json!(i),
                        Cell::Num(x) => num_value(*x),
                        Cell::Text(s) => json!(s),
                        Cell::Bool(b) => json!(b),
                        Cell::Log(l) => log_value(l),
                    };
                    obj.insert(name.clone(), v);
                }
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// Run metadata: the validated config, the seed and an optional timestamp.
pub fn metadata(cfg: &ExperimentConfig, extra: Value) -> HResult<Value> {
    let mut meta = Map::new();
    meta.insert("command".into(), json!(cfg.command.name()));
    meta.insert("config".into(), serde_json::to_value(cfg)?);
    meta.insert("seed".into(), json!(cfg.seed));
    meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    if cfg.timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        meta.insert("timestamp".into(), json!(secs));
    }
    if let Value::Object(more) = extra {
        meta.extend(more);
    }
    Ok(Value::Object(meta))
}

/// Serializes through `serde_json::Value`, whose maps keep keys sorted.
pub fn to_sorted_json<T: Serialize>(x: &T) -> HResult<String> {
    let v = serde_json::to_value(x)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes a table according to the configured format and destination.
///
/// CSV goes to `--out` with metadata in `<out>.meta.json`, or to stdout
/// without metadata. JSON bundles `{meta, rows}` into a single document.
pub fn emit(cfg: &ExperimentConfig, table: &Table, extra_meta: Value) -> HResult<Option<PathBuf>> {
    let meta = metadata(cfg, extra_meta)?;
    match (cfg.format, &cfg.out) {
        (Format::Csv, Some(path)) => {
            table.write_csv(std::fs::File::create(path)?)?;
            std::fs::write(sidecar(path), to_sorted_json(&meta)?)?;
            Ok(Some(path.clone()))
        }
        (Format::Csv, None) => {
            table.write_csv(std::io::stdout().lock())?;
            Ok(None)
        }
        (Format::Json, dest) => {
            let doc = to_sorted_json(&json!({ "meta": meta, "rows": table.to_json() }))?;
            match dest {
                Some(path) => {
                    std::fs::write(path, doc)?;
                    Ok(Some(path.clone()))
                }
                None => {
                    std::io::stdout().lock().write_all(doc.as_bytes())?;
                    Ok(None)
                }
            }
        }
    }
}
