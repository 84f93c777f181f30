// SPDX-License-Identifier: Apache-2.0
use std::fmt;

/// A usage, input or budget error. `reason` is a stable machine-readable code.
#[derive(Debug)]
pub struct Failure {
    pub reason: String,
    pub message: String,
}

impl Failure {
    pub fn new(reason: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            reason: reason.into(),
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "reason": self.reason, "message": self.message } }).to_string()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.reason, self.message)
    }
}

impl From<cellprobe::Error> for Failure {
    fn from(e: cellprobe::Error) -> Self {
        Failure::new(e.reason(), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new("io", e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::new("io", e.to_string())
    }
}

impl From<tempfile::PersistError> for Failure {
    fn from(e: tempfile::PersistError) -> Self {
        Failure::new("io", e.to_string())
    }
}
