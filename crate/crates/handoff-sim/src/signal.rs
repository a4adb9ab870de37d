//! RSSI proxy ranking and rank-state machinery.
//!
//! Signal strength is proxied by Euclidean distance under the isotropic
//! free-space abstraction: closer stations rank stronger. All functions here
//! are pure and stateless.

use std::cmp::Ordering;
use std::fmt;

use crate::environment::{BaseStation, Environment, GridPosition, StationId};
use crate::error::{Error, Result};

/// Ordered triple of the three strongest stations, strongest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankState {
    ranks: [StationId; 3],
}

impl RankState {
    pub fn new(ranks: [StationId; 3]) -> Result<Self> {
        if ranks[0] == ranks[1] || ranks[0] == ranks[2] || ranks[1] == ranks[2] {
            return Err(Error::InvalidRankState);
        }
        Ok(Self { ranks })
    }

    pub fn ranks(&self) -> [StationId; 3] {
        self.ranks
    }

    pub fn strongest(&self) -> StationId {
        self.ranks[0]
    }
}

impl fmt::Display for RankState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {} {}]", self.ranks[0], self.ranks[1], self.ranks[2])
    }
}

/// Signal-strength comparison key for one station as measured from a
/// position. Smaller keys mean stronger signal: keys order by ascending
/// distance, and equal distances order the higher station id first.
///
/// Distances are compared through the squared Euclidean distance, which is
/// integer-exact on the grid and induces the same order as the distance
/// itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignalKey {
    dist_sq: i64,
    station: StationId,
}

impl SignalKey {
    pub fn squared_distance(&self) -> i64 {
        self.dist_sq
    }

    /// Euclidean distance to the station.
    pub fn distance(&self) -> f64 {
        (self.dist_sq as f64).sqrt()
    }

    pub fn station(&self) -> StationId {
        self.station
    }
}

impl Ord for SignalKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist_sq
            .cmp(&other.dist_sq)
            .then_with(|| other.station.cmp(&self.station))
    }
}

impl PartialOrd for SignalKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ranking key for `bs` as measured from `pos`.
pub fn signal_rank_key(pos: GridPosition, bs: &BaseStation) -> SignalKey {
    let dx = (pos.x - bs.position.x) as i64;
    let dy = (pos.y - bs.position.y) as i64;
    SignalKey {
        dist_sq: dx * dx + dy * dy,
        station: bs.id,
    }
}

/// The three strongest stations at `pos`, strongest first. Deterministic for
/// any input: the key's tie-break makes the order independent of how the
/// stations are listed in the environment.
pub fn rank_top3(env: &Environment, pos: GridPosition) -> RankState {
    let mut keys: Vec<SignalKey> = env
        .stations()
        .iter()
        .map(|bs| signal_rank_key(pos, bs))
        .collect();
    keys.sort_unstable();
    RankState {
        ranks: [keys[0].station, keys[1].station, keys[2].station],
    }
}

/// New-state condition: the strongest station changed between two
/// consecutive evaluations. Shuffles among ranks 2 and 3 alone do not
/// constitute a new state.
pub fn is_new_state(prev: RankState, cur: RankState) -> bool {
    prev.ranks[0] != cur.ranks[0]
}
