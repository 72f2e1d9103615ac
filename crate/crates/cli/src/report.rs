//! JSON report envelope.

use std::fs;
use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub command: &'static str,
    pub input_digest: String,
    pub version: &'static str,
    pub schema_version: &'static str,
    pub result: Value,
    pub warnings: Vec<String>,
}

impl Envelope {
    pub fn new(command: &'static str, input_digest: String, result: Value) -> Self {
        Envelope {
            command,
            input_digest,
            version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            result: round_value(result),
            warnings: Vec::new(),
        }
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("envelope serializes");
        text.push('\n');
        text
    }

    pub fn emit(&self, target: &str) -> Result<(), CliError> {
        let text = self.render();
        if target == "stdout" || target == "-" {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Internal(format!("writing stdout: {e}")))
        } else {
            fs::write(target, text)
                .map_err(|e| CliError::Usage(format!("cannot write {target}: {e}")))
        }
    }
}

/// Serializes `value` and rounds every float it contains.
pub fn to_rounded<T: Serialize>(value: &T) -> Value {
    round_value(serde_json::to_value(value).expect("report types serialize"))
}

/// Rounds to 12 significant digits; non-finite values become `null`.
pub fn round12(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    Number::from_f64(rounded).map_or(Value::Null, Value::Number)
}

fn round_value(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => round12(n.as_f64().expect("f64 number")),
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, round_value(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}
