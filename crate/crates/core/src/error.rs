use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("sample count must be odd for Simpson quadrature, got {0}")]
    EvenSampleCount(usize),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("initial state is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("order {requested} exceeds stack depth {available}")]
    OrderOutOfRange { requested: usize, available: usize },

    #[error("level crossing: |Omega| vanishes at t = {0}")]
    LevelCrossing(f64),

    #[error("invariant ansatz outside its validity range: {0}")]
    AnsatzInvalid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular linear system")]
    Singular,
}

pub type Result<T> = std::result::Result<T, Error>;
