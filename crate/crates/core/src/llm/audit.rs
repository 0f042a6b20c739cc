//! Per-match trail of external calls. Cheap to clone and share; the harness
//! snapshots it into the MatchRecord.

use serde::{Deserialize, Serialize};
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallOutcome {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub correlation_id: u64,
    /// What the call was for: "judge", "judge-reask", "player", "chat".
    pub kind: String,
    pub attempts: u32,
    pub outcome: CallOutcome,
    /// Anomalies worth surfacing: "ambiguous_label", "parse_failure",
    /// "truncated".
    pub flags: Vec<String>,
}

#[derive(Clone, Default)]
pub struct AuditLog {
    records: Arc<Mutex<Vec<CallRecord>>>,
}

impl AuditLog {
    pub fn new() -> AuditLog {
        AuditLog::default()
    }

    pub fn record(&self, record: CallRecord) {
        self.records.lock().unwrap().push(record);
    }

    /// Attach a flag to an already-recorded call.
    pub fn flag(&self, correlation_id: u64, flag: &str) {
        let mut records = self.records.lock().unwrap();
        if let Some(r) = records
            .iter_mut()
            .find(|r| r.correlation_id == correlation_id)
        {
            r.flags.push(flag.to_string());
        }
    }

    pub fn snapshot(&self) -> Vec<CallRecord> {
        self.records.lock().unwrap().clone()
    }

    pub fn is_empty(&self) -> bool {
        self.records.lock().unwrap().is_empty()
    }
}
