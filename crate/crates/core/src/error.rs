use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("derivative depth {requested} unavailable (jet depth {available})")]
    Depth { requested: usize, available: usize },
    #[error("derivative order {order} unavailable in {region}")]
    OrderUnavailable { order: usize, region: &'static str },
    #[error("term count {count} exceeds cap {cap}")]
    TermCap { count: usize, cap: usize },
    #[error("root solve failed: {0}")]
    RootSolve(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("point ({x}, {y}) outside the region where this field is defined")]
    OutsideRegion { x: f64, y: f64 },
    #[error("solver instability at t = {t}: {reason}")]
    Instability { t: f64, reason: String },
    #[error("unreliable interface: {0}")]
    UnreliableTrace(String),
    #[error("diagnostic input: {0}")]
    Diagnostic(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
