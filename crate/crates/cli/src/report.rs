//! The report envelope and its three renderings.
//!
//! Every command produces one `RunReport`: a versioned envelope carrying the
//! command name, the effective configuration, and a command-specific
//! payload. The JSON rendering is the structured artifact (rationals as
//! exact `p/q` strings, stable field order); the CSV rendering emits one
//! named table per result section, header row always present even when a
//! section is empty; the summary rendering is a human digest with decimals.
//! All three are deterministic functions of the report, so identical runs
//! produce byte-identical bytes. Timing is deliberately not part of the
//! report; the binary prints it to stderr.

use std::io::Write as _;
use std::path::Path;

use fairopt_core::{Error, Result, Scalar};
use serde::Serialize;

use crate::config::{ConfigEcho, Format};

pub const SCHEMA_VERSION: u32 = 1;

/// One named result section for the CSV rendering.
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// A payload that knows its CSV sections and its summary digest.
pub trait Render: Serialize {
    fn tables(&self) -> Vec<Table>;
    fn summary_lines(&self) -> Vec<String>;
}

#[derive(Serialize)]
pub struct RunReport<P: Serialize> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: String,
    pub config: ConfigEcho,
    pub payload: P,
}

impl<P: Render> RunReport<P> {
    pub fn new(config: ConfigEcho, payload: P) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool: "fairopt",
            tool_version: env!("CARGO_PKG_VERSION"),
            command: config.command.clone(),
            config,
            payload,
        }
    }

    pub fn emit(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut bytes = serde_json::to_vec_pretty(self)
                    .map_err(|e| Error::Consistency(format!("report serialization: {e}")))?;
                bytes.push(b'\n');
                Ok(bytes)
            }
            Format::Csv => self.emit_csv(),
            Format::Summary => Ok(self.emit_summary().into_bytes()),
        }
    }

    fn emit_csv(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        let config = serde_json::to_string(&self.config)
            .map_err(|e| Error::Consistency(format!("config serialization: {e}")))?;
        writeln!(out, "# fairopt report v{}", self.schema_version).expect("vec write");
        writeln!(out, "# command: {}", self.command).expect("vec write");
        writeln!(out, "# config: {config}").expect("vec write");
        for table in self.payload.tables() {
            writeln!(out).expect("vec write");
            writeln!(out, "# {}", table.name).expect("vec write");
            let mut writer = csv::Writer::from_writer(&mut out);
            writer
                .write_record(&table.header)
                .and_then(|_| {
                    for row in &table.rows {
                        writer.write_record(row)?;
                    }
                    writer.flush().map_err(csv::Error::from)
                })
                .map_err(|e| Error::Consistency(format!("csv rendering: {e}")))?;
            drop(writer);
        }
        Ok(out)
    }

    fn emit_summary(&self) -> String {
        let mut lines = vec![format!(
            "fairopt {} report (schema v{})",
            self.command, self.schema_version
        )];
        lines.extend(self.payload.summary_lines());
        lines.push(String::new());
        lines.join("\n")
    }
}

/// Exact rendering for structured cells: `p/q` or an integer.
pub fn frac(value: &Scalar) -> String {
    value.to_string()
}

/// Decimal rendering for summaries: up to six decimals, trailing zeros
/// trimmed.
pub fn dec(value: &Scalar) -> String {
    let v = value.to_f64();
    let formatted = format!("{v:.6}");
    let trimmed = formatted.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() || trimmed == "-" {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

/// Joins selection ids into one CSV-friendly cell ("A+Z").
pub fn id_cell(ids: &[String]) -> String {
    ids.join("+")
}

/// Writes bytes through a sibling temp file and an atomic rename, so the
/// destination either keeps its old content or holds the complete new
/// report, never a truncated one.
pub fn write_atomically(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .map(str::to_string)
        .unwrap_or_else(|| "report".to_string());
    let tmp = path.with_file_name(format!("{file_name}.tmp"));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}
