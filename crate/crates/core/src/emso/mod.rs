//! Existential monadic second-order logic over cMSCs.

pub mod ast;
pub mod eval;
pub mod text;

pub use ast::{EmsoFormula, Fo, Formula, SetVar, Var};
pub use eval::{bounded_models, evaluate, evaluate_limited, evaluate_with, Assignment, EvalError, EvalLimits, Evaluator};
pub use text::{parse_formula, print_formula, SyntaxError};
