use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element is central (±1) within tolerance; axis undefined")]
    CentralElement,

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("braid index {index} out of range for {strands} strands")]
    IndexOutOfRange { index: i32, strands: usize },

    #[error("representation is not on the variety (residual {0:.3e})")]
    NotOnVariety(f64),

    #[error("cochain is not closed (residual {0:.3e})")]
    NotClosed(f64),

    #[error("representation is not irreducible")]
    NotIrreducible,

    #[error("curve datum `{0}` is not complete")]
    IncompleteCurveDatum(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("normal form not reached (residual {0:.3e})")]
    NormalFormFailure(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
