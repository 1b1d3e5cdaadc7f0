//! Structured event-log records, written as JSON lines.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One line of the run's `events.jsonl`. Records are strictly ordered by
/// (t, sequence number); the sequence number is the position in the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLogRecord {
    pub t: f64,
    pub source: String,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub data: BTreeMap<String, serde_json::Value>,
}

impl EventLogRecord {
    pub fn new(t: f64, source: impl Into<String>, kind: impl Into<String>) -> Self {
        Self {
            t,
            source: source.into(),
            kind: kind.into(),
            data: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.data.insert(key.to_string(), value.into());
        self
    }
}

pub fn to_jsonl(records: &[EventLogRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("event record serializes"));
        out.push('\n');
    }
    out
}
