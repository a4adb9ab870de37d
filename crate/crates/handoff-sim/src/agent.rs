//! UE agent: transition memory and the handoff-override decision process.
//!
//! The agent's only persistent knowledge is a sorted list of transition
//! records, each pairing a (state, state') rank transition with the
//! allocation delta realized the last time that transition occurred: the
//! allocation change caused by switching stations when the handoff was
//! executed, or zero when it was refused and the association kept. The
//! decision step reads two allocation quantities (current and remembered)
//! and is O(1); lookup over the sorted records is a binary search, O(log n).

use std::fmt::Write as _;
use std::str::FromStr;

use crate::environment::{Allocation, Environment, GridPosition, StationId};
use crate::error::{Error, Result};
use crate::signal::{is_new_state, rank_top3, RankState};

/// Identifies one rank-state transition. Only genuine new-state transitions
/// are representable: the strongest station must differ between the ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TransitionKey {
    from: RankState,
    to: RankState,
}

impl TransitionKey {
    pub fn new(from: RankState, to: RankState) -> Result<Self> {
        if from.strongest() == to.strongest() {
            return Err(Error::InvalidTransitionKey);
        }
        Ok(Self { from, to })
    }

    pub fn from_state(&self) -> RankState {
        self.from
    }

    pub fn to_state(&self) -> RankState {
        self.to
    }
}

/// One remembered transition outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionRecord {
    pub key: TransitionKey,
    pub delta: Allocation,
}

/// Sorted list of transition records, unique by key.
#[derive(Debug, Clone, Default)]
pub struct TransitionMemory {
    records: Vec<TransitionRecord>,
}

impl TransitionMemory {
    pub fn new() -> Self {
        Self::default()
    }

    /// The stored delta for `key`, if any. Binary search over the sorted
    /// records.
    pub fn lookup(&self, key: &TransitionKey) -> Option<Allocation> {
        self.records
            .binary_search_by(|r| r.key.cmp(key))
            .ok()
            .map(|i| self.records[i].delta)
    }

    /// Store `delta` for `key`, overwriting any previous observation.
    /// Sortedness and key uniqueness are preserved.
    pub fn record(&mut self, key: TransitionKey, delta: Allocation) {
        match self.records.binary_search_by(|r| r.key.cmp(&key)) {
            Ok(i) => self.records[i].delta = delta,
            Err(i) => self.records.insert(i, TransitionRecord { key, delta }),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[TransitionRecord] {
        &self.records
    }

    /// Debug dump: one `from -> to delta` line per record, in key order.
    pub fn dump_table(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(out, "{} -> {} {:+}", r.key.from, r.key.to, r.delta);
        }
        out
    }
}

/// Association policy the agent runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Always associate with the strongest (closest) station.
    RssiDefault,
    /// Like the default, but refuse handoffs whose remembered allocation
    /// delta is negative.
    TransitionLearning,
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rssi_default" => Ok(Policy::RssiDefault),
            "transition_learning" => Ok(Policy::TransitionLearning),
            other => Err(Error::UnknownPolicy(other.to_string())),
        }
    }
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Policy::RssiDefault => write!(f, "rssi_default"),
            Policy::TransitionLearning => write!(f, "transition_learning"),
        }
    }
}

/// Outcome of one evaluation at a walk end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// The strongest station is unchanged; no mobility action.
    NoChange,
    /// Associate with the new strongest station.
    Handoff { to: StationId, observed: RankState },
    /// Keep the current association despite the new state; `remembered` is
    /// the stored negative delta that justified the refusal.
    Override {
        observed: RankState,
        remembered: Allocation,
    },
}

impl Decision {
    pub fn kind(&self) -> DecisionKind {
        match self {
            Decision::NoChange => DecisionKind::NoChange,
            Decision::Handoff { .. } => DecisionKind::Handoff,
            Decision::Override { .. } => DecisionKind::Override,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionKind {
    NoChange,
    Handoff,
    Override,
}

/// What the metrics layer sees from one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub position: GridPosition,
    pub kind: DecisionKind,
    pub allocation: Allocation,
}

/// The UE agent: position, serving station, last evaluated rank state, and
/// transition memory. Single-owner mutable state confined to one round.
#[derive(Debug, Clone)]
pub struct Agent {
    policy: Policy,
    position: GridPosition,
    associated: StationId,
    current_state: RankState,
    memory: TransitionMemory,
    last_allocation: Allocation,
}

impl Agent {
    /// Fresh agent at `start`, associated with the strongest station there,
    /// with empty memory.
    pub fn new(env: &Environment, start: GridPosition, policy: Policy) -> Result<Self> {
        if !env.bounds().contains(start) {
            return Err(Error::OutOfGrid(start));
        }
        let current_state = rank_top3(env, start);
        let associated = current_state.strongest();
        let last_allocation = env.allocation_at(associated, start)?;
        Ok(Self {
            policy,
            position: start,
            associated,
            current_state,
            memory: TransitionMemory::new(),
            last_allocation,
        })
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn position(&self) -> GridPosition {
        self.position
    }

    pub fn associated(&self) -> StationId {
        self.associated
    }

    pub fn current_state(&self) -> RankState {
        self.current_state
    }

    pub fn memory(&self) -> &TransitionMemory {
        &self.memory
    }

    pub fn last_allocation(&self) -> Allocation {
        self.last_allocation
    }

    pub fn move_to(&mut self, pos: GridPosition) {
        self.position = pos;
    }

    /// Evaluate the current position against the last evaluated state.
    ///
    /// No new state (strongest station unchanged) means no mobility action.
    /// Otherwise the default policy always hands off to the new strongest
    /// station; transition learning first consults its memory and refuses
    /// the handoff when the remembered delta for this exact transition is
    /// negative. Unseen transitions and non-negative deltas follow the
    /// default behavior.
    pub fn evaluate(&self, env: &Environment) -> Decision {
        let cur = rank_top3(env, self.position);
        if !is_new_state(self.current_state, cur) {
            return Decision::NoChange;
        }
        match self.policy {
            Policy::RssiDefault => Decision::Handoff {
                to: cur.strongest(),
                observed: cur,
            },
            Policy::TransitionLearning => {
                let key = TransitionKey::new(self.current_state, cur)
                    .expect("new state implies a changed strongest station");
                match self.memory.lookup(&key) {
                    Some(delta) if delta < 0 => Decision::Override {
                        observed: cur,
                        remembered: delta,
                    },
                    _ => Decision::Handoff {
                        to: cur.strongest(),
                        observed: cur,
                    },
                }
            }
        }
    }

    /// Apply a decision produced by [`evaluate`](Self::evaluate) at the
    /// agent's current position and report the resulting observation.
    ///
    /// Under transition learning the memory is refreshed on every genuine
    /// transition with the allocation delta the decision realized: an
    /// executed handoff stores the change caused by switching stations at
    /// the current position, and an override stores zero, since keeping the
    /// association changed nothing. The remembered value is therefore
    /// always the outcome of the transition's most recent occurrence, and a
    /// refused transition is re-probed the next time it comes up. In both
    /// cases the current state advances to the observed ranking.
    pub fn apply(&mut self, env: &Environment, decision: &Decision) -> Observation {
        let allocation = match *decision {
            Decision::NoChange => self.sample_allocation(env, self.associated),
            Decision::Handoff { to, observed } => {
                let new_allocation = self.sample_allocation(env, to);
                let old_allocation = self.sample_allocation(env, self.associated);
                if self.policy == Policy::TransitionLearning {
                    let key = TransitionKey::new(self.current_state, observed)
                        .expect("handoff implies a changed strongest station");
                    self.memory.record(key, new_allocation - old_allocation);
                }
                self.associated = to;
                self.current_state = observed;
                new_allocation
            }
            Decision::Override { observed, .. } => {
                let key = TransitionKey::new(self.current_state, observed)
                    .expect("override implies a changed strongest station");
                self.memory.record(key, 0);
                self.current_state = observed;
                self.sample_allocation(env, self.associated)
            }
        };
        self.last_allocation = allocation;
        Observation {
            position: self.position,
            kind: decision.kind(),
            allocation,
        }
    }

    fn sample_allocation(&self, env: &Environment, station: StationId) -> Allocation {
        env.allocation_at(station, self.position)
            .expect("agent position stays in-grid and stations are registered")
    }
}
