//! Versioned JSON envelope for machine-readable output.

use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "takagi-lab/1";

/// `{"schema": "takagi-lab/1", "command": ..., "report": ...}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema: String,
    pub command: String,
    pub report: T,
}

impl<T> Envelope<T> {
    pub fn new(command: impl Into<String>, report: T) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            command: command.into(),
            report,
        }
    }
}
