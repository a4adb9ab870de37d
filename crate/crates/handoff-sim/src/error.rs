//! Crate-wide error type.

use crate::environment::{GridPosition, StationId};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown scenario `{0}` (expected `default` or `sector_load`)")]
    UnknownScenario(String),
    #[error("unknown policy `{0}` (expected `rssi_default` or `transition_learning`)")]
    UnknownPolicy(String),
    #[error("invalid grid bounds {width}x{height}")]
    InvalidBounds { width: i32, height: i32 },
    #[error("environment needs at least 3 stations, got {0}")]
    TooFewStations(usize),
    #[error("duplicate station id {0}")]
    DuplicateStationId(StationId),
    #[error("station {id} at {position} lies outside the {width}x{height} grid")]
    StationOutsideGrid {
        id: StationId,
        position: GridPosition,
        width: i32,
        height: i32,
    },
    #[error("station {id} must have a positive allocation")]
    NonPositiveAllocation { id: StationId },
    #[error("unknown station id {0}")]
    UnknownStation(StationId),
    #[error("position {0} lies outside the grid")]
    OutOfGrid(GridPosition),
    #[error("rank state entries must be distinct")]
    InvalidRankState,
    #[error("transition key must change the strongest station")]
    InvalidTransitionKey,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("round index {index} out of range for {rounds} rounds")]
    RoundIndexOutOfRange { index: u32, rounds: u32 },
    #[error("stationary distribution did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("{failed} of {total} validation checks failed")]
    OracleChecksFailed { failed: usize, total: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("failed to parse config: {0}")]
    ConfigParse(#[from] toml::de::Error),
    #[error("failed to serialize config: {0}")]
    ConfigSerialize(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 for configuration errors, 2 when
    /// validation checks fail.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::OracleChecksFailed { .. } => 2,
            _ => 1,
        }
    }
}
