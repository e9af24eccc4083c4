use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub input: Value,
    pub parameters: Value,
    pub seed: u64,
    pub results: Value,
    pub tolerances: Value,
    pub diagnostics: Value,
    pub status: String,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            schema: SCHEMA,
            tool: "herzkit",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            input: Value::Null,
            parameters: json!({}),
            seed,
            results: json!({}),
            tolerances: json!({}),
            diagnostics: json!({}),
            status: "ok".into(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
