//! 2-D random walk with clamped boundaries.
//!
//! Each step draws one of N/S/E/W uniformly; a move that would leave the
//! grid becomes a self-loop (the UE stays in place). Clamping keeps the
//! chain on the grid, the self-loops make it aperiodic, and 4-connectivity
//! makes it irreducible, so long-run cell occupancy is uniform.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::environment::{GridBounds, GridPosition};
use crate::error::{Error, Result};

/// Cardinal step directions. North is +y, East is +x.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    North,
    South,
    East,
    West,
}

impl Direction {
    pub fn offset(self) -> (i32, i32) {
        match self {
            Direction::North => (0, 1),
            Direction::South => (0, -1),
            Direction::East => (1, 0),
            Direction::West => (-1, 0),
        }
    }

    fn from_index(index: u32) -> Self {
        match index {
            0 => Direction::North,
            1 => Direction::South,
            2 => Direction::East,
            _ => Direction::West,
        }
    }
}

/// Deterministic, platform-independent random stream.
///
/// ChaCha8 keyed by the 64-bit master seed; independent per-round streams
/// select the round index as the ChaCha stream number. Identical seeds yield
/// identical step sequences on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::for_round(seed, 0)
    }

    pub fn for_round(seed: u64, round: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(round);
        Self { rng }
    }

    /// One uniform direction draw. Consumes exactly one 32-bit output; the
    /// two low bits select the direction (0 N, 1 S, 2 E, 3 W).
    pub fn next_direction(&mut self) -> Direction {
        Direction::from_index(self.rng.next_u32() & 3)
    }
}

/// Walk shape: how many unit steps per walk and how many continuous walks
/// per round, starting from `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    pub steps_per_walk: u32,
    pub walks_per_round: u32,
    pub start: GridPosition,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            steps_per_walk: 10,
            walks_per_round: 2000,
            start: GridPosition::new(11, 11),
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_walk < 1 {
            return Err(Error::InvalidConfig(
                "steps_per_walk must be at least 1".into(),
            ));
        }
        if self.walks_per_round < 1 {
            return Err(Error::InvalidConfig(
                "walks_per_round must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Where `dir` leads from `pos`: the neighboring cell, or `pos` itself when
/// the move would exit the grid.
pub fn step_toward(pos: GridPosition, bounds: GridBounds, dir: Direction) -> GridPosition {
    let (dx, dy) = dir.offset();
    let next = GridPosition::new(pos.x + dx, pos.y + dy);
    if bounds.contains(next) {
        next
    } else {
        pos
    }
}

/// One random step. Exactly one random draw is consumed.
pub fn step(pos: GridPosition, bounds: GridBounds, rng: &mut RngStream) -> GridPosition {
    step_toward(pos, bounds, rng.next_direction())
}

/// One continuous walk of `config.steps_per_walk` steps from `start`.
pub fn walk(
    start: GridPosition,
    config: &WalkConfig,
    bounds: GridBounds,
    rng: &mut RngStream,
) -> GridPosition {
    (0..config.steps_per_walk).fold(start, |pos, _| step(pos, bounds, rng))
}
