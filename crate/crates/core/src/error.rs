use thiserror::Error;

use crate::sexp::Pos;
use crate::value::{Symbol, Value};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError { pos, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("undefined function {0}")]
    UndefinedFunction(Symbol),
    #[error("unbound variable {0}")]
    UnboundVariable(Symbol),
    #[error("{function} expects {expected} argument(s), got {got}")]
    Arity { function: Symbol, expected: usize, got: usize },
    #[error("recursion depth {depth} exceeded in {function} (likely nonterminating definition)")]
    DepthExceeded { function: Symbol, depth: usize },
    #[error("unknown type {0}")]
    UnknownType(Symbol),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdmitError {
    #[error("{0} is already defined")]
    Redefinition(Symbol),
    #[error("undefined function {function} in {context}")]
    UnknownFunction { function: Symbol, context: Symbol },
    #[error("unbound variable {variable} in {context}")]
    UnboundVariable { variable: Symbol, context: Symbol },
    #[error("{function} expects {expected} argument(s), got {got} in {context}")]
    Arity { function: Symbol, expected: usize, got: usize, context: Symbol },
    #[error("unknown type {0}")]
    UnknownType(Symbol),
    #[error("recursive type {0} has no base case")]
    NoBaseCase(Symbol),
    #[error("type {name}: {message}")]
    IllFormedType { name: Symbol, message: String },
    #[error("{sub} is not a subtype of {sup}: enumerator index {index} yields {value}")]
    SubtypeEvidence { sub: Symbol, sup: Symbol, index: u64, value: Value },
    #[error("rule {rule}: {message}")]
    BadRule { rule: Symbol, message: String },
    #[error("{0}")]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HintError {
    #[error("unknown proof process {0}")]
    UnknownProcess(Symbol),
    #[error("unknown backtrack handler {0}")]
    UnknownHandler(Symbol),
    #[error("malformed hint: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiftError {
    #[error("cannot lift through non-liftable edge into {0}")]
    NonLiftable(String),
    #[error("unknown goal {0}")]
    UnknownGoal(String),
    #[error("evaluation failed while lifting: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HistoryError {
    #[error("goal {0} is already recorded")]
    DuplicateGoal(String),
    #[error("unknown goal {0}")]
    UnknownGoal(String),
}

/// Failure while processing one top-level form of a session.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("{source_name}:{}: form {index}: {}", error.pos, error.message)]
    Syntax { source_name: String, index: usize, error: SyntaxError },
    #[error("{source_name}:{pos}: form {index}: {error}")]
    Admit { source_name: String, index: usize, pos: Pos, error: AdmitError },
    #[error("{source_name}:{pos}: form {index}: cannot include {path}: {message}")]
    Io { source_name: String, index: usize, pos: Pos, path: String, message: String },
}
