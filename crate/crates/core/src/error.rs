use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator vanishes at the evaluation point")]
    Pole,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unbound parameter `{0}`")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix unit index ({0},{1}) out of range 1..={2}")]
    IndexOutOfRange(usize, usize, usize),
    #[error("matrix unit in scalar context")]
    UnitInScalar,
    #[error("expression is not linear in matrix units")]
    NonLinear,
    #[error("generator symbol `{0}` in scalar context")]
    GeneratorInScalar(String),
    #[error("scalar term without a generator word")]
    MissingWord,
    #[error("pattern row has {1} entries, expected {0}")]
    Ragged(usize, usize),
}

impl From<ScalarError> for ExprError {
    fn from(_: ScalarError) -> Self {
        ExprError::DivisionByZero
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("index ({0},{1}) out of range 1..={2}")]
    IndexOutOfRange(usize, usize, usize),
    #[error("vector length {0} is not a square")]
    NotSquare(usize),
}

#[derive(Debug, Error)]
pub enum PresentationError {
    #[error("relation file line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("relation `{name}`: {source}")]
    Term { name: String, source: ExprError },
    #[error("relation `{name}` coefficient uses parameter `{param}`")]
    ParameterInCoefficient { name: String, param: String },
    #[error("assignment is missing generator {0}")]
    MissingGenerator(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliffordError {
    #[error("gamma products span only {0} of 16 dimensions")]
    Degenerate(usize),
    #[error("gamma matrices violate the anticommutation relations")]
    NotClifford,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Json { path: PathBuf, line: usize, column: usize, message: String },
    #[error("case {case}: field `{field}`: {source}")]
    Expr { case: String, field: String, source: ExprError },
    #[error("case {case}: {message}")]
    Invalid { case: String, message: String },
    #[error("corpus: {0}")]
    Corpus(String),
    #[error("case {case} branch {branch}: no admissible parameter draw after {attempts} attempts")]
    Unsatisfiable { case: String, branch: usize, attempts: usize },
    #[error("case {case}: branch index {branch} out of range")]
    BadBranch { case: String, branch: usize },
}
