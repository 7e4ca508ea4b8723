use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config parse error: {0}")]
    ConfigParse(#[from] serde_json::Error),

    #[error("invalid config: {key} = {value}: {rule}")]
    InvalidConfig {
        key: &'static str,
        value: String,
        rule: String,
    },

    #[error("unknown vehicle id {0}")]
    UnknownVehicle(usize),

    #[error("centroid of an empty member set")]
    EmptyMembers,

    #[error("time step must be positive, got {0} s")]
    NonPositiveStep(f64),

    #[error("insufficient channels: {demanded} groups demanded, {available} available")]
    InsufficientChannels { demanded: usize, available: usize },

    #[error("cost matrix has {rows} rows but only {cols} columns")]
    AssignmentShape { rows: usize, cols: usize },

    #[error("non-finite cost at ({row}, {col})")]
    NonFiniteCost { row: usize, col: usize },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("seed {seed}: {source}")]
    Scenario {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("plot inputs sweep different parameters: {0} vs {1}")]
    MismatchedParameters(String, String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
