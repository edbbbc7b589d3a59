use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("derivative order {0} outside 1..=4")]
    DerivativeOrder(usize),
    #[error("Sobolev index {0} outside 0..=2")]
    SobolevIndex(usize),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("parameter domain violation: {0}")]
    ParameterDomain(String),
    #[error("arctan branch tracking failed near x = {x}")]
    BranchTracking { x: f64 },
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),
    #[error("spectral structure: {0}")]
    Structure(String),
    #[error("solver blow-up at t = {t}: sup|w| = {sup}")]
    BlowUp { t: f64, sup: f64 },
    #[error("invalid solver configuration: {0}")]
    SolverConfig(String),
    #[error("unknown closed-form quantity `{0}`")]
    UnknownQuantity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
