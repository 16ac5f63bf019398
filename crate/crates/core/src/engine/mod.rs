//! Grounding and answer-set computation.

mod ground;
mod program;
mod semantics;
mod solve;

pub use ground::{ground, ground_with, GroundOptions};
pub use program::{
    AtomId, GroundAtom, GroundProgram, GroundProgramBuilder, GroundRule, Interpretation,
};
pub use semantics::{
    assumption_candidates, assumption_sets, cautious_consequences, validate_assumption_set,
    AssumptionSet, CautiousConsequences,
};
pub use solve::{
    answer_sets, guess_and_check, is_answer_set, is_stratified, least_model, nant, reduct,
    stratified_model, SolveOptions,
};

use thiserror::Error;

use crate::rulelang::ParseError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("grounding exceeded {limit} ground rules while instantiating `{rule}`")]
    TooManyGroundRules { rule: String, limit: usize },
    #[error("rule `{rule}` has more than 64 variables")]
    TooManyVariables { rule: String },
    #[error("least model requested for a program with default negation")]
    NotNegationFree,
    #[error("{count} atoms under negation exceed the guess-and-check bound of {bound}")]
    TooManyNegatedAtoms { count: usize, bound: usize },
    #[error("the given interpretation is not an answer set")]
    NotAnAnswerSet,
    #[error("invalid assumption set: {0}")]
    InvalidAssumptionSet(String),
}

#[cfg(test)]
mod tests;
