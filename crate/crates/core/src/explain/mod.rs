//! Explanation graphs (off-line justifications): generation, validation and
//! rendering.
//!
//! Comparison literals of the supporting rule appear as synthetic true leaves
//! (`Node::Comparison`) linked to ⊤ with `+`. They extend the formal node set,
//! which only covers atoms, so that a graph shows the evaluated test (`20<30`)
//! that made a rule applicable.

mod dot;
mod generate;
mod graph;
mod validate;

pub use dot::{to_dot, to_dot_with, DotOptions};
pub use graph::{
    Edge, EdgeDoc, ExplanationGraph, GraphDocument, Label, Node, NodeDoc, FORMAT_VERSION,
};
pub use validate::Violation;

use thiserror::Error;

use crate::engine::{
    is_answer_set, validate_assumption_set, AssumptionSet, AtomId, EngineError, GroundAtom,
    GroundProgram, Interpretation, SolveOptions,
};

pub const DEFAULT_MAX_GRAPHS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplainError {
    #[error("atom {0} does not occur in the program")]
    UnknownAtom(String),
    #[error("the interpretation is not an answer set of the program")]
    NotAnAnswerSet,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("invalid graph document: {0}")]
    Document(String),
}

/// Graphs for one atom, smallest first. `truncated` is set whenever more
/// graphs exist than were returned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explanation {
    pub root: Node,
    pub graphs: Vec<ExplanationGraph>,
    pub truncated: bool,
}

/// A program, one of its answer sets and an assumption set, prepared for
/// explaining many atoms.
pub struct Explainer<'a> {
    gp: &'a GroundProgram,
    truth: Vec<bool>,
    assumed: Vec<bool>,
}

impl<'a> Explainer<'a> {
    /// Checks that `a` is an answer set and `u` a valid assumption set for it.
    pub fn new(
        gp: &'a GroundProgram,
        a: &Interpretation,
        u: &AssumptionSet,
    ) -> Result<Self, ExplainError> {
        if !is_answer_set(gp, a) {
            return Err(ExplainError::NotAnAnswerSet);
        }
        validate_assumption_set(gp, a, u, &SolveOptions::default())?;
        Ok(Self::unchecked(gp, a, u))
    }

    /// Skips the answer-set and assumption-set checks; the caller vouches for
    /// them.
    pub fn unchecked(gp: &'a GroundProgram, a: &Interpretation, u: &AssumptionSet) -> Self {
        let mut assumed = vec![false; gp.universe_size()];
        for x in u.iter() {
            if let Some(id) = gp.id_of(x) {
                assumed[id as usize] = true;
            }
        }
        Explainer {
            gp,
            truth: gp.mask_of(a),
            assumed,
        }
    }

    fn id(&self, a: &GroundAtom) -> Option<AtomId> {
        self.gp.id_of(a)
    }

    pub fn is_true(&self, a: &GroundAtom) -> Option<bool> {
        self.id(a).map(|i| self.truth[i as usize])
    }

    /// All explanation graphs of `atom` (or of its negation when false), up
    /// to `max_graphs`.
    pub fn explain(&self, atom: &GroundAtom, max_graphs: usize) -> Result<Explanation, ExplainError> {
        let root = match self.is_true(atom) {
            Some(true) => Node::Atom(atom.clone()),
            Some(false) => Node::NotAtom(atom.clone()),
            None => return Err(ExplainError::UnknownAtom(atom.to_string())),
        };
        Ok(generate::Search::run(self, root, max_graphs))
    }
}

pub fn explanation_graphs(
    gp: &GroundProgram,
    a: &Interpretation,
    u: &AssumptionSet,
    atom: &GroundAtom,
    max_graphs: usize,
) -> Result<Explanation, ExplainError> {
    Explainer::new(gp, a, u)?.explain(atom, max_graphs)
}

/// Checks `g` against every condition of the definition. Never fails on bad
/// inputs; problems are reported as violations.
pub fn validate_graph(
    g: &ExplanationGraph,
    gp: &GroundProgram,
    a: &Interpretation,
    u: &AssumptionSet,
) -> Result<(), Vec<Violation>> {
    Explainer::unchecked(gp, a, u).validate(g)
}
