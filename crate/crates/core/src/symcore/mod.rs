//! Symbolic expression kernel.

mod diff;
mod equal;
mod error;
mod eval;
mod expr;
mod parse;
mod symbol;

pub use equal::{equal, with_surrogates, Comparison, Sampling, Verdict, NUMERIC_TOLERANCE, SAMPLE_RADIUS};
pub use error::{EvalError, ParseError, SymError};
pub use eval::{ClosureFn, Compiled, ExprFn, Functions, OpaqueFn, Point};
pub use expr::{int, ratio, Base, Expr, Function, Monomial, Rational};
pub use parse::parse;
pub use symbol::Symbol;
