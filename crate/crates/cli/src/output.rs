//! CSV and JSON artifact writers. Every file starts with a comment line
//! carrying the tool version and a hash of the generating configuration,
//! so outputs are traceable and byte-identical runs are detectable.

use std::fs;
use std::io::Write;
use std::path::Path;

use rmtlab::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// FNV-1a over the canonical config JSON.
pub fn config_hash(config_json: &str) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in config_json.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

pub fn header_line(hash: &str) -> String {
    format!("# rmtlab v{TOOL_VERSION} config={hash}")
}

fn io_err(e: std::io::Error) -> Error {
    Error::Config(format!("I/O error: {e}"))
}

pub fn write_csv(path: &Path, hash: &str, header: &str, rows: &[String]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut out = String::with_capacity(rows.len() * 32 + 64);
    out.push_str(&header_line(hash));
    out.push('\n');
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(out.as_bytes()).map_err(io_err)
}

pub fn write_json(path: &Path, hash: &str, value: &serde_json::Value) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut root = serde_json::Map::new();
    root.insert("tool".into(), format!("rmtlab v{TOOL_VERSION}").into());
    root.insert("config_hash".into(), hash.into());
    root.insert("report".into(), value.clone());
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(root))
        .map_err(|e| Error::Config(format!("JSON encoding failed: {e}")))?;
    fs::write(path, text + "\n").map_err(io_err)
}

/// Shortest round-trip decimal formatting: deterministic for equal bits.
pub fn fmt(v: f64) -> String {
    format!("{v}")
}
