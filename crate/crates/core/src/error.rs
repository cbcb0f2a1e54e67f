use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = TipsError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TipsError {
    #[error("edge list is empty")]
    EmptyNetwork,

    #[error("edge record {record}: negative length {length}")]
    NegativeLength { record: usize, length: f64 },

    #[error("edge record {record}: length is not finite")]
    NonFiniteLength { record: usize },

    #[error("node {node} is not in the network ({node_count} nodes)")]
    InvalidNode { node: usize, node_count: usize },

    #[error("trajectory {id}: {reason}")]
    InvalidTrajectory { id: u64, reason: String },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("instance has no trajectories")]
    NoTrajectories,

    #[error("instance has no candidate sites")]
    NoSites,

    #[error("no sites to evaluate against: selection and existing facilities are both empty")]
    EmptyFacilitySet,

    #[error("k = {k} exceeds the {available} available candidate sites")]
    TooFewSites { k: usize, available: usize },

    #[error("{subsets} subsets exceed the enumeration budget of {budget}")]
    TooLarge { subsets: u128, budget: u128 },

    #[error("distance matrix needs {entries} entries, over the budget of {budget}; sample sites or trajectories first")]
    MatrixTooLarge { entries: usize, budget: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tau {tau} outside the indexed range [{tau_min}, {tau_max}]")]
    TauOutOfRange {
        tau: f64,
        tau_min: f64,
        tau_max: f64,
    },

    #[error(
        "trajectory {trajectory} cannot reach site {site}; prune the site or repair the instance"
    )]
    Unreachable { trajectory: u64, site: usize },

    #[error("index does not match the instance: {0}")]
    IndexMismatch(String),

    #[error("experiment config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl TipsError {
    /// Budget failures are reported separately from input errors by the CLI.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            TipsError::TooLarge { .. } | TipsError::MatrixTooLarge { .. }
        )
    }
}
