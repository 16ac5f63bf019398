//! Newline-delimited JSON messages exchanged by the diagnosis and
//! explanation processes. One request or response per line.

use justify_core::explain::GraphDocument;
use serde::{Deserialize, Serialize};

/// Asks for the explanation graphs of atoms in one evaluated window. An
/// empty `atoms` list selects the window's recommendations, inferred
/// variables and inferred actions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplainRequest {
    pub id: u64,
    pub window_end: i64,
    #[serde(default)]
    pub atoms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_graphs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomResult {
    pub atom: String,
    #[serde(default)]
    pub graphs: Vec<GraphDocument>,
    /// Set when more graphs exist than were returned.
    #[serde(default)]
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Exactly one per request. `error` is set when the request as a whole
/// could not be served (malformed line, unknown window); `results` then is
/// empty. A request whose id cannot be recovered is answered with id 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplainResponse {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_end: Option<i64>,
    #[serde(default)]
    pub results: Vec<AtomResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ExplainResponse {
    pub fn failure(id: u64, window_end: Option<i64>, error: impl Into<String>) -> Self {
        ExplainResponse { id, window_end, results: Vec::new(), error: Some(error.into()) }
    }

    pub fn graph_count(&self) -> usize {
        self.results.iter().map(|r| r.graphs.len()).sum()
    }
}

/// Serializes `msg` as one line, newline included.
pub fn encode_line<T: Serialize>(msg: &T) -> String {
    let mut s = serde_json::to_string(msg).expect("protocol messages serialize");
    s.push('\n');
    s
}

/// Parses one request line. On failure returns the id if one can be read
/// from the line, and the reason.
pub fn decode_request(line: &str) -> Result<ExplainRequest, (u64, String)> {
    serde_json::from_str(line).map_err(|e| {
        let id = serde_json::from_str::<serde_json::Value>(line)
            .ok()
            .and_then(|v| v.get("id")?.as_u64())
            .unwrap_or(0);
        (id, format!("malformed request: {e}"))
    })
}
