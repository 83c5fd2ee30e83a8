//! Conjecture checking: type-aware random testing combined with a small
//! waterfall prover that lifts counterexamples back to the original goal.

pub mod datadef;
pub mod error;
pub mod eval;
pub mod forms;
pub mod hints;
pub mod history;
pub mod session;
pub mod sexp;
pub mod term;
pub mod testgen;
pub mod value;
pub mod waterfall;
pub mod world;
