//! Manifests and the three output formats.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    JsonLines,
}

#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// What a command produced: a structured result, and optionally rows.
pub struct CommandOutput {
    pub result: Value,
    pub table: Option<Table>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, minus `--out`.
    pub argv: Vec<String>,
    pub params: Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    /// Unix seconds; `SOURCE_DATE_EPOCH` when set.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new<P: Serialize>(command: &str, argv: &[String], params: &P, seed: Option<u64>) -> Self {
        let mut kept = Vec::new();
        let mut args = argv.iter().skip(1);
        while let Some(a) = args.next() {
            if a == "--out" {
                args.next();
            } else if !a.starts_with("--out=") {
                kept.push(a.clone());
            }
        }
        RunManifest {
            command: command.to_string(),
            argv: kept,
            params: serde_json::to_value(params).unwrap_or(Value::Null),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            timestamp: timestamp(),
        }
    }
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
    {
        return t;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Result fields as `key,value` rows when a command has no natural table.
fn flatten(result: &Value) -> Table {
    let mut t = Table::new(&["key", "value"]);
    match result {
        Value::Object(m) => {
            for (k, v) in m {
                t.push(vec![k.clone(), scalar_text(v)]);
            }
        }
        other => t.push(vec!["value".into(), scalar_text(other)]),
    }
    t
}

fn render<W: Write>(w: &mut W, m: &RunManifest, out: &CommandOutput, format: Format) -> io::Result<()> {
    match format {
        Format::Json => {
            let doc = json!({ "manifest": m, "result": out.result });
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)
        }
        Format::Csv => {
            writeln!(w, "# command: {}", m.command)?;
            writeln!(w, "# argv: {}", serde_json::to_string(&m.argv)?)?;
            writeln!(w, "# params: {}", m.params)?;
            match m.seed {
                Some(s) => writeln!(w, "# seed: {s}")?,
                None => writeln!(w, "# seed: none")?,
            }
            writeln!(w, "# version: {}", m.version)?;
            writeln!(w, "# timestamp: {}", m.timestamp)?;
            let flat;
            let table = match &out.table {
                Some(t) => t,
                None => {
                    flat = flatten(&out.result);
                    &flat
                }
            };
            let line = |cells: &[String]| cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
            writeln!(w, "{}", line(&table.header))?;
            for row in &table.rows {
                writeln!(w, "{}", line(row))?;
            }
            Ok(())
        }
        Format::JsonLines => {
            writeln!(w, "{}", json!({ "manifest": m }))?;
            match &out.table {
                Some(t) => {
                    for row in &t.rows {
                        let obj: Map<String, Value> = t
                            .header
                            .iter()
                            .cloned()
                            .zip(row.iter().map(|c| Value::String(c.clone())))
                            .collect();
                        writeln!(w, "{}", Value::Object(obj))?;
                    }
                }
                None => writeln!(w, "{}", json!({ "result": out.result }))?,
            }
            Ok(())
        }
    }
}

pub fn emit(m: &RunManifest, out: &CommandOutput, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    render(&mut buf, m, out, format)?;
    match path {
        Some(p) => fs::write(p, buf)?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(&buf)?;
            lock.flush()?;
        }
    }
    Ok(())
}

/// Recovers `argv` (with program name) from any of the three formats.
pub fn read_manifest_argv(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path)?;
    let bad = || CliError::Usage(format!("no manifest found in {}", path.display()));
    let argv: Vec<String> = if let Some(line) = text.lines().find_map(|l| l.strip_prefix("# argv: ")) {
        serde_json::from_str(line).map_err(|_| bad())?
    } else {
        let first = text.lines().next().ok_or_else(bad)?;
        let doc: Value = serde_json::from_str(&text)
            .or_else(|_| serde_json::from_str(first))
            .map_err(|_| bad())?;
        serde_json::from_value(doc["manifest"]["argv"].clone()).map_err(|_| bad())?
    };
    Ok(std::iter::once("invset".to_string()).chain(argv).collect())
}
