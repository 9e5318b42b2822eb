use thiserror::Error;

use crate::parser::ParseDiagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed expression: {0}")]
    Malformed(String),

    #[error("expression exceeds the size limit of {limit} monomials")]
    SizeLimit { limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("cyclic substitution involving `{0}`")]
    CyclicBinding(String),

    #[error("binding for `{0}` refers to itself")]
    SelfReferentialBinding(String),

    #[error("not splittable: coefficient depends on `{0}`")]
    NotSplittable(String),

    #[error("internal soundness failure: {0}")]
    Soundness(String),

    #[error("{}", format_diagnostics(.0))]
    Parse(Vec<ParseDiagnostic>),

    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("unknown constraint system `{0}`")]
    UnknownSystem(String),

    #[error("unsupported equation class: {0}")]
    UnsupportedClass(String),

    #[error("transform `{0}` is not applicable here")]
    InapplicableTransform(String),

    #[error("catalog data: line {line}: {message}")]
    CatalogData { line: usize, message: String },

    #[error("numerics: {0}")]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("pole or overflow at abscissa {at}")]
    Pole { at: f64 },

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("blow-up before t_end (at t = {at})")]
    BlowUp { at: f64 },

    #[error("method-of-lines step failure at t = {at}")]
    StepFailure { at: f64 },

    #[error("unbound symbol `{0}` in compiled expression")]
    UnboundSymbol(String),

    #[error("{0}")]
    Precondition(String),
}

fn format_diagnostics(diags: &[ParseDiagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}
