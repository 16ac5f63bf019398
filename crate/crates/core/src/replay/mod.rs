//! Stream ingestion, sliding windows and per-window diagnosis.

mod ingest;
mod output;
mod session;
mod window;

pub use ingest::{
    actions_to_csv, ingest_actions, ingest_sensors, known_components, sensors_to_csv,
    AttemptedAction, SensorSample,
};
pub use output::{read_outputs, window_file_stem, write_manifest, write_outputs, write_window, SessionManifest};
pub use session::{replay, replay_concurrent, schedule, Session};
pub use window::{
    evaluate_window, evaluate_window_full, window_slice, window_slice_range, Action,
    DiagnosisOutput, SensorStore, WindowEvaluation, WindowSlice,
};

use thiserror::Error;

use crate::engine::EngineError;

pub const DEFAULT_STEP: i64 = 60;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariable { line: usize, name: String },
    #[error("line {line}: unknown component `{name}`")]
    UnknownComponent { line: usize, name: String },
    #[error("step must be at least 1, got {0}")]
    BadStep(i64),
    #[error("window {window_end}: the program has no answer set")]
    NoAnswerSet { window_end: i64 },
    #[error("no evaluated window ends at {0}")]
    UnknownWindow(i64),
    #[error("the session is finished; actions can no longer be injected")]
    SessionFinished,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid session document: {0}")]
    Document(String),
}

#[cfg(test)]
mod tests;
