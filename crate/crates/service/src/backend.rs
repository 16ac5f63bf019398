use std::panic::{catch_unwind, AssertUnwindSafe};

use justify_core::engine::{AssumptionSet, GroundAtom};
use justify_core::explain::{Explainer, DEFAULT_MAX_GRAPHS};
use justify_core::replay::{ReplayError, Session, WindowEvaluation};

use crate::protocol::{AtomResult, ExplainRequest, ExplainResponse};

/// Computes the response to one request. Implementations never panic out
/// of `respond`; every request gets a response.
pub trait ExplainBackend: Send {
    fn respond(&mut self, req: &ExplainRequest) -> ExplainResponse;
}

/// Explains `atoms` (or the window's significant atoms when empty) against
/// an evaluated window. Failures are reported per atom.
pub fn explain_atoms(ev: &WindowEvaluation, atoms: &[String], max_graphs: usize) -> Vec<AtomResult> {
    let explainer = Explainer::unchecked(&ev.program, &ev.answer_set, &AssumptionSet::default());
    let names: Vec<String> = if atoms.is_empty() {
        ev.output.significant_atoms().iter().map(ToString::to_string).collect()
    } else {
        atoms.to_vec()
    };
    names
        .into_iter()
        .map(|name| {
            let outcome = name
                .parse::<GroundAtom>()
                .map_err(|e| format!("cannot parse atom: {e}"))
                .and_then(|a| {
                    catch_unwind(AssertUnwindSafe(|| explainer.explain(&a, max_graphs)))
                        .map_err(|_| "explanation failed".to_string())?
                        .map_err(|e| e.to_string())
                });
            match outcome {
                Ok(ex) => AtomResult {
                    atom: name,
                    graphs: ex.graphs.iter().map(|g| g.to_document()).collect(),
                    truncated: ex.truncated,
                    error: None,
                },
                Err(e) => AtomResult { atom: name, graphs: Vec::new(), truncated: false, error: Some(e) },
            }
        })
        .collect()
}

/// Answers requests from its own replay session, advancing it on demand.
pub struct SessionBackend {
    session: Session,
    max_graphs: usize,
}

impl SessionBackend {
    pub fn new(session: Session) -> Self {
        SessionBackend { session, max_graphs: DEFAULT_MAX_GRAPHS }
    }

    pub fn with_max_graphs(mut self, n: usize) -> Self {
        self.max_graphs = n;
        self
    }

    fn evaluation(&mut self, window_end: i64) -> Result<WindowEvaluation, ReplayError> {
        while !self.session.is_finished()
            && self.session.outputs().last().is_none_or(|o| o.window_end < window_end)
        {
            self.session.advance()?;
        }
        self.session.evaluation(window_end)
    }
}

impl ExplainBackend for SessionBackend {
    fn respond(&mut self, req: &ExplainRequest) -> ExplainResponse {
        match self.evaluation(req.window_end) {
            Ok(ev) => ExplainResponse {
                id: req.id,
                window_end: Some(req.window_end),
                results: explain_atoms(&ev, &req.atoms, req.max_graphs.unwrap_or(self.max_graphs)),
                error: None,
            },
            Err(e) => ExplainResponse::failure(req.id, Some(req.window_end), e.to_string()),
        }
    }
}

impl<F: FnMut(&ExplainRequest) -> ExplainResponse + Send> ExplainBackend for F {
    fn respond(&mut self, req: &ExplainRequest) -> ExplainResponse {
        self(req)
    }
}
