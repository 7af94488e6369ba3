use thiserror::Error;

use crate::mdp::Diagnostic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {}", join_diagnostics(.0))]
    InvalidInstance(Vec<Diagnostic>),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("expected a {expected}-uncertainty instance")]
    WrongKind { expected: &'static str },

    #[error("unknown action `{action}` at state `{state}`")]
    UnknownAction { state: String, action: String },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("normalization would create {needed} terminals (cap {cap})")]
    SizeExplosion { needed: usize, cap: usize },

    #[error("{what} count {count} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        count: u128,
        cap: u128,
    },

    #[error("instance must be normalized first: {0}")]
    MustNormalize(String),

    #[error("unsupported instance shape: {0}")]
    UnsupportedShape(String),

    #[error("assignment is not integral: {0}")]
    NonIntegral(String),

    #[error("fractional solution is not an extreme point: {0}")]
    NotExtremePoint(String),

    #[error("numerical failure in simplex: pivot {value:e} at row {row}, column {column}")]
    Numerical { row: usize, column: usize, value: f64 },

    #[error("invalid generator input: {0}")]
    Generator(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by a well-formed input that the requested method cannot
    /// handle (wrong shape, or an enumeration cap), as opposed to bad input.
    pub fn is_shape_or_cap(&self) -> bool {
        matches!(
            self,
            Error::WrongKind { .. }
                | Error::SizeExplosion { .. }
                | Error::CapExceeded { .. }
                | Error::MustNormalize(_)
                | Error::UnsupportedShape(_)
        )
    }
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
