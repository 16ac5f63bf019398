//! The rule language: lexer, parser, AST, safety checking and formatting.

mod ast;
mod format;
mod lexer;
mod parser;

pub use ast::*;
pub use format::{format_atom, format_literal, format_program, format_rule, format_term};
pub use parser::{check_arities, check_safety, parse_ground_atom, parse_program};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unsafe variable `{variable}` in rule `{rule}`")]
    Unsafe { rule: String, variable: String },
    #[error("predicate `{predicate}` used with arity {found}, previously {expected}")]
    Arity {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("empty interval {lo}..{hi} at {line}:{col}")]
    EmptyInterval {
        line: usize,
        col: usize,
        lo: i64,
        hi: i64,
    },
}

impl ParseError {
    pub(crate) fn syntax(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }
}
