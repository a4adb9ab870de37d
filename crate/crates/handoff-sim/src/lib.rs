//! Deterministic grid-world simulator of mobile-controlled handoff.
//!
//! A user equipment (UE) agent random-walks a bounded grid served by a
//! handful of base stations. It constantly ranks the three nearest stations
//! (the RSSI proxy) and by default associates with the nearest. The
//! transition-learning policy keeps one extra piece of state: for every
//! executed rank-state transition it remembers the observed allocation
//! delta, and it refuses a handoff whose remembered delta is negative.
//!
//! The crate splits into:
//! - [`environment`]: grid world, base stations, allocation fields, and the
//!   `default` / `sector_load` scenario presets;
//! - [`signal`]: distance ranking and rank-state transitions;
//! - [`agent`]: transition memory and the override decision process;
//! - [`mobility`]: the seeded, clamped random walk;
//! - [`simulation`]: rounds, Monte Carlo trials, and summary metrics;
//! - [`analysis`]: independent oracles (chain matrix, stationary
//!   distribution, coverage geometry, analytic baselines);
//! - [`cli`]: the `run` / `snapshot` / `validate` / `compare` commands and
//!   their file formats.

pub mod agent;
pub mod analysis;
pub mod cli;
pub mod environment;
pub mod error;
pub mod mobility;
pub mod signal;
pub mod simulation;

pub use error::{Error, Result};
