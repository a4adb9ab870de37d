//! Round and trial orchestration with summary-metric accumulation.
//!
//! A round is one fresh-agent episode of continuous walks; a trial is a
//! Monte Carlo aggregate of many independent rounds, each on its own random
//! substream. Baseline and learning runs of the same trial share per-round
//! substreams, so their trajectories are identical and results are paired.

use crate::agent::{Agent, Decision, DecisionKind, Observation, Policy};
use crate::environment::{Allocation, Environment, Grid};
use crate::error::{Error, Result};
use crate::mobility::{self, RngStream, WalkConfig};

/// Documented default seed; the reference configuration is otherwise
/// expressed by the `WalkConfig` and `rounds` defaults.
pub const DEFAULT_SEED: u64 = 42;

/// Default number of Monte Carlo rounds per trial.
pub const DEFAULT_ROUNDS: u32 = 1000;

/// Full trial configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialConfig {
    pub walk: WalkConfig,
    pub rounds: u32,
    pub seed: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            walk: WalkConfig::default(),
            rounds: DEFAULT_ROUNDS,
            seed: DEFAULT_SEED,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self, env: &Environment) -> Result<()> {
        self.walk.validate()?;
        if self.rounds < 1 {
            return Err(Error::InvalidConfig("rounds must be at least 1".into()));
        }
        if !env.bounds().contains(self.walk.start) {
            return Err(Error::OutOfGrid(self.walk.start));
        }
        Ok(())
    }
}

/// Per-round counters and grid accumulators.
#[derive(Debug, Clone)]
pub struct RoundMetrics {
    pub allocation_samples: u64,
    pub allocation_sum: i64,
    /// New-state events (strongest station changed).
    pub transitions: u64,
    pub handoffs: u64,
    pub overrides: u64,
    pub per_cell_sum: Grid<i64>,
    pub per_cell_count: Grid<u64>,
    pub visited: Grid<bool>,
}

impl RoundMetrics {
    pub fn new(bounds: crate::environment::GridBounds) -> Self {
        Self {
            allocation_samples: 0,
            allocation_sum: 0,
            transitions: 0,
            handoffs: 0,
            overrides: 0,
            per_cell_sum: Grid::new(bounds),
            per_cell_count: Grid::new(bounds),
            visited: Grid::new(bounds),
        }
    }

    pub fn average_allocation(&self) -> f64 {
        self.allocation_sum as f64 / self.allocation_samples as f64
    }

    fn record(&mut self, obs: &Observation) {
        self.allocation_samples += 1;
        self.allocation_sum += obs.allocation;
        self.per_cell_sum[obs.position] += obs.allocation;
        self.per_cell_count[obs.position] += 1;
        self.visited[obs.position] = true;
        match obs.kind {
            DecisionKind::NoChange => {}
            DecisionKind::Handoff => {
                self.transitions += 1;
                self.handoffs += 1;
            }
            DecisionKind::Override => {
                self.transitions += 1;
                self.overrides += 1;
            }
        }
    }
}

/// One round: a fresh agent runs `walk.walks_per_round` continuous walks,
/// evaluating once at the end of each walk. Memory persists across walks
/// within the round and is discarded with the agent at round end.
pub fn run_round(
    env: &Environment,
    policy: Policy,
    walk: &WalkConfig,
    rng: &mut RngStream,
) -> RoundMetrics {
    run_round_observed(env, policy, walk, rng, |_, _, _| {})
}

/// [`run_round`] with an observer called after every evaluation; the agent
/// is passed in its post-decision state.
pub fn run_round_observed(
    env: &Environment,
    policy: Policy,
    walk: &WalkConfig,
    rng: &mut RngStream,
    mut observe: impl FnMut(&Agent, &Decision, &Observation),
) -> RoundMetrics {
    let mut agent = Agent::new(env, walk.start, policy).expect("config validated");
    let mut metrics = RoundMetrics::new(env.bounds());
    for _ in 0..walk.walks_per_round {
        let end = mobility::walk(agent.position(), walk, env.bounds(), rng);
        agent.move_to(end);
        let decision = agent.evaluate(env);
        let obs = agent.apply(env, &decision);
        metrics.record(&obs);
        observe(&agent, &decision, &obs);
    }
    metrics
}

/// Aggregate results for one policy over a full trial.
#[derive(Debug, Clone)]
pub struct TrialStats {
    pub policy: Policy,
    pub rounds: u32,
    /// Mean of the per-round average allocations.
    pub average_allocation: f64,
    /// 100 * overrides / transitions over the whole trial.
    pub override_pct: f64,
    pub transitions: u64,
    pub handoffs: u64,
    pub overrides: u64,
    pub round_averages: Vec<f64>,
    /// Per-cell mean allocation across the trial; 0 where never sampled.
    pub mean_allocation: Grid<f64>,
    pub visits: Grid<u64>,
}

impl TrialStats {
    /// Order-free reduction over per-round metrics. Rounds must be supplied
    /// in round-index order so results do not depend on execution order.
    pub fn aggregate(policy: Policy, rounds: &[RoundMetrics]) -> Self {
        assert!(!rounds.is_empty(), "at least one round required");
        let bounds = rounds[0].per_cell_sum.bounds();
        let round_averages: Vec<f64> =
            rounds.iter().map(RoundMetrics::average_allocation).collect();
        let average_allocation =
            round_averages.iter().sum::<f64>() / round_averages.len() as f64;

        let transitions: u64 = rounds.iter().map(|r| r.transitions).sum();
        let handoffs: u64 = rounds.iter().map(|r| r.handoffs).sum();
        let overrides: u64 = rounds.iter().map(|r| r.overrides).sum();
        let override_pct = if transitions > 0 {
            100.0 * overrides as f64 / transitions as f64
        } else {
            0.0
        };

        let mut mean_allocation: Grid<f64> = Grid::new(bounds);
        let mut visits: Grid<u64> = Grid::new(bounds);
        for pos in bounds.positions() {
            let sum: i64 = rounds.iter().map(|r| r.per_cell_sum[pos]).sum();
            let count: u64 = rounds.iter().map(|r| r.per_cell_count[pos]).sum();
            visits[pos] = count;
            mean_allocation[pos] = if count > 0 {
                sum as f64 / count as f64
            } else {
                0.0
            };
        }

        Self {
            policy,
            rounds: rounds.len() as u32,
            average_allocation,
            override_pct,
            transitions,
            handoffs,
            overrides,
            round_averages,
            mean_allocation,
            visits,
        }
    }

    /// Standard error of the trial mean, from the spread of round averages.
    pub fn std_error(&self) -> f64 {
        let n = self.round_averages.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let mean = self.average_allocation;
        let var = self
            .round_averages
            .iter()
            .map(|a| (a - mean) * (a - mean))
            .sum::<f64>()
            / (n - 1.0);
        (var / n).sqrt()
    }
}

/// Paired trial results: the baseline always runs; the learning policy is
/// optional. Both use the same per-round substreams.
#[derive(Debug, Clone)]
pub struct SummaryReport {
    pub baseline: TrialStats,
    pub learning: Option<TrialStats>,
}

impl SummaryReport {
    /// Performance gain of `policy` over the paired baseline, in percent of
    /// the policy's own trial average. The baseline's gain over itself is 0.
    pub fn performance_gain_pct(&self, policy: Policy) -> f64 {
        match policy {
            Policy::RssiDefault => 0.0,
            Policy::TransitionLearning => self
                .learning
                .as_ref()
                .map(|l| {
                    100.0 * (l.average_allocation - self.baseline.average_allocation)
                        / l.average_allocation
                })
                .unwrap_or(0.0),
        }
    }

    pub fn stats_for(&self, policy: Policy) -> Option<&TrialStats> {
        match policy {
            Policy::RssiDefault => Some(&self.baseline),
            Policy::TransitionLearning => self.learning.as_ref(),
        }
    }
}

/// Run one policy over all rounds of a trial.
pub fn run_policy_trial(
    env: &Environment,
    config: &TrialConfig,
    policy: Policy,
) -> Result<TrialStats> {
    config.validate(env)?;
    let rounds: Vec<RoundMetrics> = (0..config.rounds)
        .map(|round| {
            let mut rng = RngStream::for_round(config.seed, round as u64);
            run_round(env, policy, &config.walk, &mut rng)
        })
        .collect();
    Ok(TrialStats::aggregate(policy, &rounds))
}

/// Run a full trial: the paired baseline always, plus the learning policy
/// when `with_learning` is set.
pub fn run_trial(
    env: &Environment,
    config: &TrialConfig,
    with_learning: bool,
) -> Result<SummaryReport> {
    let baseline = run_policy_trial(env, config, Policy::RssiDefault)?;
    let learning = if with_learning {
        Some(run_policy_trial(env, config, Policy::TransitionLearning)?)
    } else {
        None
    };
    Ok(SummaryReport { baseline, learning })
}

/// Replay exactly one round and emit its per-cell allocation map: the last
/// allocation sampled at each walk-end cell, 0 where never sampled.
pub fn snapshot_round(
    env: &Environment,
    policy: Policy,
    config: &TrialConfig,
    round_index: u32,
) -> Result<Grid<Allocation>> {
    config.validate(env)?;
    if round_index >= config.rounds {
        return Err(Error::RoundIndexOutOfRange {
            index: round_index,
            rounds: config.rounds,
        });
    }
    let mut grid: Grid<Allocation> = Grid::new(env.bounds());
    let mut rng = RngStream::for_round(config.seed, round_index as u64);
    run_round_observed(env, policy, &config.walk, &mut rng, |_, _, obs| {
        grid[obs.position] = obs.allocation;
    });
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{build_scenario, preset_config, Environment, GridPosition, Scenario};
    use crate::signal::rank_top3;

    fn uniform_env() -> Environment {
        let mut config = preset_config(Scenario::Default);
        for s in &mut config.stations {
            s.allocation = 5;
        }
        Environment::from_config(&config).unwrap()
    }

    fn small_config() -> TrialConfig {
        TrialConfig {
            walk: WalkConfig {
                steps_per_walk: 10,
                walks_per_round: 400,
                start: GridPosition::new(11, 11),
            },
            rounds: 5,
            seed: 99,
        }
    }

    #[test]
    fn uniform_field_makes_every_round_average_exact() {
        let env = uniform_env();
        for policy in [Policy::RssiDefault, Policy::TransitionLearning] {
            let mut rng = RngStream::new(3);
            let metrics = run_round(&env, policy, &WalkConfig::default(), &mut rng);
            assert_eq!(metrics.average_allocation(), 5.0);
            assert_eq!(metrics.overrides, 0);
        }
    }

    #[test]
    fn per_cell_accumulators_conserve_the_totals() {
        let env = build_scenario(Scenario::Default);
        let mut rng = RngStream::new(17);
        let walk = WalkConfig::default();
        let metrics = run_round(&env, Policy::TransitionLearning, &walk, &mut rng);

        assert_eq!(metrics.allocation_samples, walk.walks_per_round as u64);
        let count_total: u64 = metrics.per_cell_count.cells().iter().sum();
        assert_eq!(count_total, metrics.allocation_samples);
        let sum_total: i64 = metrics.per_cell_sum.cells().iter().sum();
        assert_eq!(sum_total, metrics.allocation_sum);
        assert_eq!(metrics.handoffs + metrics.overrides, metrics.transitions);
        for pos in env.bounds().positions() {
            assert_eq!(metrics.visited[pos], metrics.per_cell_count[pos] > 0);
        }
    }

    #[test]
    fn transition_count_matches_a_trajectory_replay() {
        let env = build_scenario(Scenario::Default);
        let walk = WalkConfig::default();
        let mut positions = Vec::new();
        let mut rng = RngStream::new(11);
        let metrics =
            run_round_observed(&env, Policy::RssiDefault, &walk, &mut rng, |_, _, obs| {
                positions.push(obs.position);
            });

        // Replay through the ranking alone: the evaluated state advances
        // only when the strongest station changes.
        let mut state = rank_top3(&env, walk.start);
        let mut transitions = 0u64;
        for pos in positions {
            let cur = rank_top3(&env, pos);
            if cur.strongest() != state.strongest() {
                transitions += 1;
                state = cur;
            }
        }
        assert_eq!(transitions, metrics.transitions);
        assert!(transitions > 0);
    }

    #[test]
    fn paired_policies_share_the_same_trajectory() {
        let env = build_scenario(Scenario::SectorLoad);
        let walk = WalkConfig::default();
        let collect = |policy: Policy| {
            let mut rng = RngStream::for_round(5, 0);
            let mut positions = Vec::new();
            run_round_observed(&env, policy, &walk, &mut rng, |_, _, obs| {
                positions.push(obs.position);
            });
            positions
        };
        assert_eq!(collect(Policy::RssiDefault), collect(Policy::TransitionLearning));
    }

    #[test]
    fn aggregation_is_independent_of_execution_order() {
        let env = build_scenario(Scenario::Default);
        let config = small_config();

        let in_order: Vec<RoundMetrics> = (0..config.rounds)
            .map(|i| {
                let mut rng = RngStream::for_round(config.seed, i as u64);
                run_round(&env, Policy::TransitionLearning, &config.walk, &mut rng)
            })
            .collect();

        let mut shuffled: Vec<Option<RoundMetrics>> = vec![None; config.rounds as usize];
        for &i in &[3u32, 0, 4, 1, 2] {
            let mut rng = RngStream::for_round(config.seed, i as u64);
            shuffled[i as usize] = Some(run_round(
                &env,
                Policy::TransitionLearning,
                &config.walk,
                &mut rng,
            ));
        }
        let shuffled: Vec<RoundMetrics> =
            shuffled.into_iter().map(Option::unwrap).collect();

        let a = TrialStats::aggregate(Policy::TransitionLearning, &in_order);
        let b = TrialStats::aggregate(Policy::TransitionLearning, &shuffled);
        assert_eq!(a.average_allocation, b.average_allocation);
        assert_eq!(a.override_pct, b.override_pct);
        assert_eq!(a.round_averages, b.round_averages);
        assert_eq!(a.mean_allocation, b.mean_allocation);
    }

    #[test]
    fn single_round_trial_degenerates_cleanly() {
        let env = build_scenario(Scenario::Default);
        let config = TrialConfig {
            rounds: 1,
            ..small_config()
        };
        let report = run_trial(&env, &config, true).unwrap();
        assert_eq!(report.baseline.rounds, 1);
        assert_eq!(
            report.baseline.average_allocation,
            report.baseline.round_averages[0]
        );
        assert_eq!(report.performance_gain_pct(Policy::RssiDefault), 0.0);
    }

    #[test]
    fn default_round_average_sits_near_the_coverage_prediction() {
        let env = build_scenario(Scenario::Default);
        let mut rng = RngStream::new(1);
        let metrics = run_round(&env, Policy::RssiDefault, &WalkConfig::default(), &mut rng);
        let avg = metrics.average_allocation();
        assert!((5.5..=6.5).contains(&avg), "round average {avg}");
    }

    #[test]
    fn snapshots_are_deterministic_and_zero_where_unexplored() {
        let env = build_scenario(Scenario::Default);
        let config = small_config();
        let a = snapshot_round(&env, Policy::TransitionLearning, &config, 2).unwrap();
        let b = snapshot_round(&env, Policy::TransitionLearning, &config, 2).unwrap();
        assert_eq!(a, b);

        let allowed = env.allocation_values();
        let mut nonzero = 0;
        for (_, &v) in a.iter() {
            if v == 0 {
                continue;
            }
            nonzero += 1;
            assert!(allowed.contains(&v));
        }
        assert!(nonzero > 50, "only {nonzero} cells sampled");

        // The start region is sampled in any realistic round.
        let start = config.walk.start;
        let near_start = a.iter().any(|(p, &v)| {
            v != 0 && (p.x - start.x).abs() <= 2 && (p.y - start.y).abs() <= 2
        });
        assert!(near_start);
    }

    #[test]
    fn snapshot_round_index_is_validated() {
        let env = build_scenario(Scenario::Default);
        let config = small_config();
        assert!(matches!(
            snapshot_round(&env, Policy::RssiDefault, &config, 5),
            Err(Error::RoundIndexOutOfRange { index: 5, rounds: 5 })
        ));
    }

    #[test]
    fn invalid_configs_are_rejected_before_running() {
        let env = build_scenario(Scenario::Default);
        let mut config = small_config();
        config.rounds = 0;
        assert!(run_trial(&env, &config, false).is_err());

        let mut config = small_config();
        config.walk.start = GridPosition::new(40, 40);
        assert!(run_trial(&env, &config, false).is_err());
    }
}
