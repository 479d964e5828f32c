//! Output tables with an embedded run manifest.
//!
//! CSV: `# manifest <json>` first, then `# ` comment lines, the header and rows.
//! JSON: `{"manifest": …, "records": […]}`. JSON-lines: a manifest object, then one object per line.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::args::{Command, Format};

pub const MANIFEST_PREFIX: &str = "# manifest ";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub params: Command,
    /// Trapezoid nodes per dimension (or grid sizes) actually used.
    pub nodes: Vec<usize>,
}

impl Manifest {
    pub fn new(params: Command, nodes: Vec<usize>) -> Self {
        Self {
            tool: "asep-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            params,
            nodes,
        }
    }
}

/// Rows keyed by column name; JSON carries every field, CSV only `columns`.
#[derive(Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub records: Vec<Map<String, Value>>,
    pub comments: Vec<String>,
    pub nodes: Vec<usize>,
}

impl Table {
    pub fn push(&mut self, record: Map<String, Value>) {
        self.records.push(record);
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

pub fn render(table: &Table, manifest: &Manifest, format: Format) -> serde_json::Result<String> {
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "manifest": manifest, "records": table.records });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
        Format::Csv => {
            let mut out = format!("{MANIFEST_PREFIX}{}\n", serde_json::to_string(manifest)?);
            for c in &table.comments {
                out += &format!("# {c}\n");
            }
            out += &table.columns.join(",");
            out.push('\n');
            for r in &table.records {
                let row: Vec<String> = table.columns.iter().map(|c| r.get(c).map(cell).unwrap_or_default()).collect();
                out += &row.join(",");
                out.push('\n');
            }
            Ok(out)
        }
    }
}

pub fn render_lines(records: &[Map<String, Value>], manifest: &Manifest) -> serde_json::Result<String> {
    let mut out = serde_json::to_string(&serde_json::json!({ "manifest": manifest }))? + "\n";
    for r in records {
        out += &serde_json::to_string(r)?;
        out.push('\n');
    }
    Ok(out)
}

/// Recovers the manifest from any output format.
pub fn extract_manifest(text: &str) -> Option<Manifest> {
    if let Some(rest) = text.strip_prefix(MANIFEST_PREFIX) {
        return serde_json::from_str(rest.lines().next()?).ok();
    }
    let first_line: Value = serde_json::from_str(text.lines().next()?).ok().or_else(|| serde_json::from_str(text).ok())?;
    serde_json::from_value(first_line.get("manifest")?.clone()).ok()
}
