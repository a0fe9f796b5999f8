use thiserror::Error;

/// Algebraic failures while building or differentiating expressions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("exponent must normalize to a rational constant, got `{0}`")]
    NonConstantExponent(String),
    #[error("derivative of `{0}'` is not representable (only first derivatives of opaque functions exist)")]
    UnsupportedOrder(String),
    #[error("expression is not affine in {what}: `{expr}`")]
    NotAffine { what: String, expr: String },
}

/// Failures of the expression parser. Positions are byte offsets into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown symbol `{name}` at {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("index out of range for `{name}` at {pos}: {detail}")]
    IndexOutOfRange { name: String, pos: usize, detail: String },
    #[error("at {pos}: {source}")]
    Algebra { pos: usize, source: SymError },
}

/// Failures of numeric evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("unbound function `{0}`")]
    UnboundFunction(String),
    #[error("{message} in `{subexpr}`")]
    Domain { message: String, subexpr: String },
}
