use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing travel time/distance for {origin} -> {dest}")]
    MissingTravel { origin: String, dest: String },

    #[error("unknown location `{0}`")]
    UnknownLocation(String),

    #[error("{operation} is only defined for {expected} arcs")]
    WrongMode {
        operation: &'static str,
        expected: &'static str,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("budget {budget:.2} is below the bus subsystem cost {bus_cost:.2}; redesign the network")]
    BudgetBelowBusCost { budget: f64, bus_cost: f64 },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
