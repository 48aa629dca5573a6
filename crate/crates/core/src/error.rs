use thiserror::Error;

/// A parameter fell outside its admissible range.
///
/// `field` uses the same names as the command-line flags (`rho`, `gamma`,
/// `users`, ...), so messages can be shown to users unchanged.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("`{field}` = {value} is outside {range}")]
pub struct ConfigError {
    pub field: &'static str,
    pub value: f64,
    pub range: &'static str,
}

impl ConfigError {
    pub fn new(field: &'static str, value: impl Into<f64>, range: &'static str) -> Self {
        Self {
            field,
            value: value.into(),
            range,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    /// No update can ever be delivered (γ·p_s underflowed to zero).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error(
        "alternating occupancy sum lost precision for k={contenders}, v={cells}: \
         error bound {bound:.3e} exceeds {limit:.1e}"
    )]
    LossOfPrecision {
        contenders: u32,
        cells: u32,
        bound: f64,
        limit: f64,
    },

    /// The two algebraic routes to the average age disagree.
    #[error("closed form {closed} and renewal composition {composed} disagree")]
    CrossCheck { closed: f64, composed: f64 },
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("slot index overflow: {frames} frames of {frame_size} slots")]
    Overflow { frames: u64, frame_size: u32 },

    #[error("trace of {rows} rows exceeds the diagnostic limit of {limit}")]
    TraceTooLong { rows: u64, limit: u64 },

    #[error("cannot aggregate an empty replication list")]
    EmptyAggregate,

    #[error("replication {index} was produced by a different configuration")]
    MismatchedReplications { index: usize },

    #[error("trace output: {0}")]
    Trace(#[from] csv::Error),
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("empty grid: `{0}` has no values")]
    EmptyGrid(&'static str),

    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },

    #[error("row {row}: cannot parse `{value}` in column `{column}`")]
    Field {
        row: usize,
        column: &'static str,
        value: String,
    },

    #[error("{0}")]
    Schema(String),
}
