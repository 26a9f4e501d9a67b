//! Input loading, digests and report output.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use moebiuslab::qspace::{FiniteQSpace, SpaceData};

/// Why a command did not succeed. Usage errors exit with 2, semantic
/// failures (a check came out false) with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Semantic(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type CmdResult = Result<Output, Failure>;

/// What a command produced.
pub enum Output {
    /// A report; `ok = false` means exit code 1.
    Report { ok: bool, body: Value },
    /// A raw document written verbatim (space files).
    Document(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// A loaded input file with its SHA-256.
pub struct Input {
    pub path: String,
    pub text: String,
    pub sha256: String,
}

pub fn read_input(path: &str) -> Result<Input, Failure> {
    let mut bytes = Vec::new();
    if path == "-" {
        io::stdin().read_to_end(&mut bytes).map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
    } else {
        bytes = fs::read(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
    }
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
    Ok(Input { path: path.to_string(), text, sha256 })
}

pub fn load_space(input: &Input) -> Result<FiniteQSpace, Failure> {
    FiniteQSpace::from_json(&input.text).map_err(|e| Failure::Usage(format!("{}: {e}", input.path)))
}

pub fn load_data(input: &Input) -> Result<SpaceData, Failure> {
    SpaceData::from_json(&input.text).map_err(|e| Failure::Usage(format!("{}: {e}", input.path)))
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serialization")
}

pub fn report<T: Serialize>(ok: bool, body: &T) -> CmdResult {
    Ok(Output::Report { ok, body: to_value(body) })
}

/// Wraps a report with the tool version and input digests.
pub fn envelope(command: &str, inputs: &[Input], ok: bool, body: Value) -> Value {
    json!({
        "tool": "moebiuslab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "inputs": inputs.iter().map(|i| json!({"path": i.path, "sha256": i.sha256})).collect::<Vec<_>>(),
        "ok": ok,
        "report": body,
    })
}

/// Flattened `key: value` lines for the text format.
pub fn render_text(value: &Value) -> String {
    let mut out = String::new();
    flatten("", value, &mut out);
    out
}

fn flatten(prefix: &str, value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object() || v.is_array()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        other => {
            out.push_str(prefix);
            out.push_str(": ");
            out.push_str(&match other {
                Value::String(s) => s.clone(),
                v => v.to_string(),
            });
            out.push('\n');
        }
    }
}

pub fn write_document(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Usage(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_rendering_flattens() {
        let v = json!({"ok": true, "a": {"b": "1/2", "c": [1, 2]}, "d": [{"e": null}]});
        assert_eq!(render_text(&v), "a.b: 1/2\na.c: [1,2]\nd[0].e: null\nok: true\n");
    }
}
