//! Wire records of the external generator protocol.
//!
//! UTF-8, one JSON object per line. The adapter first announces
//! `{"type":"ready","version":1}`, then answers each
//! `{"id":<int>,"context":<string>}` with `{"id":<int>,"commentary":<string>}`.
//! Lines starting with `#` are diagnostics and ignored.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const PROTOCOL_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorRequest {
    pub id: u64,
    pub context: String,
}

impl GeneratorRequest {
    /// The request as one LF-terminated line.
    pub fn to_line(&self) -> String {
        let mut line = serde_json::to_string(self).expect("request serialization is infallible");
        line.push('\n');
        line
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorResponse {
    pub id: u64,
    pub commentary: String,
}

/// One classified line from an adapter.
#[derive(Debug, Clone, PartialEq)]
pub enum AdapterLine {
    /// Blank or `#` diagnostic line.
    Ignored,
    /// Readiness announcement; the whole object is kept as adapter metadata.
    Ready {
        version: u64,
        info: Value,
    },
    Response(GeneratorResponse),
    /// `{"id":..,"error":..}` reported by the adapter itself.
    AdapterReportedError {
        id: i64,
        message: String,
    },
}

impl AdapterLine {
    /// Classifies a line with the trailing newline already removed.
    pub fn parse(line: &str) -> Result<AdapterLine, String> {
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            return Ok(AdapterLine::Ignored);
        }
        let value: Value =
            serde_json::from_str(trimmed).map_err(|e| format!("invalid JSON: {e}"))?;
        let object = value.as_object().ok_or("expected a JSON object")?;

        if let Some(kind) = object.get("type") {
            if kind != "ready" {
                return Err(format!("unknown message type {kind}"));
            }
            let version = object
                .get("version")
                .and_then(Value::as_u64)
                .ok_or("ready message without integer version")?;
            return Ok(AdapterLine::Ready {
                version,
                info: value,
            });
        }
        if let Some(error) = object.get("error") {
            let id = object.get("id").and_then(Value::as_i64).unwrap_or(-1);
            let message = error
                .as_str()
                .map(str::to_string)
                .unwrap_or_else(|| error.to_string());
            return Ok(AdapterLine::AdapterReportedError { id, message });
        }
        let response: GeneratorResponse =
            serde_json::from_value(value).map_err(|e| format!("not a response: {e}"))?;
        Ok(AdapterLine::Response(response))
    }
}
