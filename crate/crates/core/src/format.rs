//! Canonical JSON instance and trace files.
//!
//! Instance: `{"squares": [{"id", "start": [x,y], "dir", "goal": [x,y]}],
//! "arrows": [{"pos": [x,y], "dir"}]}` with unknown keys rejected.
//! Trace: a JSON array of square ids.

use thiserror::Error;

use crate::engine::{GameInstance, PushTrace};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed instance file: {0}")]
    Instance(#[source] serde_json::Error),
    #[error("malformed trace file: {0}")]
    Trace(#[source] serde_json::Error),
}

pub fn parse_instance(text: &str) -> Result<GameInstance, FormatError> {
    serde_json::from_str(text).map_err(FormatError::Instance)
}

/// Pretty-printed, field order fixed by the type, trailing newline.
pub fn instance_to_string(instance: &GameInstance) -> String {
    let mut s = serde_json::to_string_pretty(instance).expect("instance serializes");
    s.push('\n');
    s
}

pub fn parse_trace(text: &str) -> Result<PushTrace, FormatError> {
    serde_json::from_str(text).map_err(FormatError::Trace)
}

pub fn trace_to_string(trace: &PushTrace) -> String {
    let mut s = serde_json::to_string(trace).expect("trace serializes");
    s.push('\n');
    s
}
