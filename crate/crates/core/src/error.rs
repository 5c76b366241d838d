use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model has {size} points, exceeding the limit of {limit}")]
    SizeLimit { size: usize, limit: usize },

    #[error("group axiom violated: {0}")]
    GroupAxiom(String),

    #[error("eigensolver failed (info = {info}); {condition}")]
    Eigensolver { info: i32, condition: String },

    #[error("multiplier is not finite at sqrt(lambda) = {at}: {value}")]
    NonFinite { at: f64, value: String },

    #[error("sobolev window: {0}")]
    Window(String),

    #[error("empty spectral support: {0}")]
    EmptySpectralSupport(String),

    #[error("diagnostic: {0}")]
    Diagnostic(String),

    #[error("dyadic grid: {0}")]
    Grid(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
