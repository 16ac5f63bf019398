//! Diagnosis and explanation as two cooperating processes linked by a
//! newline-delimited JSON protocol, plus the HTTP API over a replay
//! session.

pub mod backend;
pub mod diagnosis;
pub mod explanation;
pub mod http;
pub mod protocol;

pub use backend::{explain_atoms, ExplainBackend, SessionBackend};
pub use diagnosis::{run_diagnosis_process, DiagnosisOptions, DiagnosisReport, Endpoint};
pub use explanation::{
    run_explanation_process, serve_peer, spawn_local, ExplanationOptions, ExplanationStats, LocalExplainer,
    QueueDepth,
};
pub use http::{router, serve, spawn_driver, AppState, DEFAULT_PORT, PORT_ENV};
pub use protocol::{decode_request, encode_line, AtomResult, ExplainRequest, ExplainResponse};

use std::path::Path;

use justify_core::replay::ReplayError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Net(#[from] std::io::Error),
}

impl ServiceError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        ServiceError::Io { path: path.display().to_string(), source }
    }
}
