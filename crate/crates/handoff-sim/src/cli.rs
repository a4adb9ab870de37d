//! Command-line interface: configuration parsing, experiment execution, and
//! file emission.
//!
//! Emitted files are reproducible from (config, seed) alone; the manifest
//! written next to them suffices to replay any result. Floats are written
//! with a fixed 4-decimal rule so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::agent::Policy;
use crate::analysis;
use crate::environment::{
    build_scenario, preset_config, Environment, EnvironmentConfig, Grid, Scenario,
};
use crate::error::{Error, Result};
use crate::mobility::WalkConfig;
use crate::simulation::{
    self, snapshot_round, SummaryReport, TrialConfig, TrialStats, DEFAULT_ROUNDS, DEFAULT_SEED,
};

const EMPIRICAL_STEPS: u64 = 10_000_000;

#[derive(Debug, Parser)]
#[command(
    name = "handoff-sim",
    version,
    about = "Grid-world simulator of mobile-controlled handoff with transition-learning overrides"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo trial and write summary, heatmap, and visit files.
    Run(RunArgs),
    /// Replay one round and write its per-cell allocation grid (0 marks
    /// unexplored cells).
    Snapshot(SnapshotArgs),
    /// Validate the chain structure and scenario geometry; print one
    /// pass/fail line per check.
    Validate(CommonArgs),
    /// Run both policies with paired seeds and print a comparison table.
    Compare(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario preset: default | sector_load.
    #[arg(long, default_value = "default")]
    pub scenario: String,

    /// Environment config file (TOML); replaces the scenario preset.
    #[arg(long)]
    pub config_file: Option<PathBuf>,

    /// Monte Carlo rounds per trial.
    #[arg(long, default_value_t = DEFAULT_ROUNDS)]
    pub rounds: u32,

    /// Continuous walks per round.
    #[arg(long, default_value_t = 2000)]
    pub walks: u32,

    /// Unit steps per walk.
    #[arg(long, default_value_t = 10)]
    pub steps_per_walk: u32,

    /// Master seed; per-round substreams derive from it.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Directory for emitted files.
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Policy to run; `both` pairs the baseline with transition learning.
    #[arg(long, value_enum, default_value_t = PolicyArg::Both)]
    pub policy: PolicyArg,
}

#[derive(Debug, Args)]
pub struct SnapshotArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Policy to replay.
    #[arg(long, value_enum, default_value_t = PolicyArg::TransitionLearning)]
    pub policy: PolicyArg,

    /// Round index to replay.
    #[arg(long)]
    pub round: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    #[value(name = "rssi_default")]
    RssiDefault,
    #[value(name = "transition_learning")]
    TransitionLearning,
    #[value(name = "both")]
    Both,
}

impl PolicyArg {
    fn label(self) -> &'static str {
        match self {
            PolicyArg::RssiDefault => "rssi_default",
            PolicyArg::TransitionLearning => "transition_learning",
            PolicyArg::Both => "both",
        }
    }
}

/// Resolved environment plus the label used in emitted files.
struct ResolvedEnvironment {
    label: String,
    scenario: Option<Scenario>,
    config: EnvironmentConfig,
    env: Environment,
}

fn resolve_environment(common: &CommonArgs) -> Result<ResolvedEnvironment> {
    if let Some(path) = &common.config_file {
        let text = fs::read_to_string(path)?;
        let config = EnvironmentConfig::from_toml_str(&text)?;
        let env = Environment::from_config(&config)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".to_string());
        Ok(ResolvedEnvironment {
            label,
            scenario: None,
            config,
            env,
        })
    } else {
        let scenario: Scenario = common.scenario.parse()?;
        let config = preset_config(scenario);
        Ok(ResolvedEnvironment {
            label: scenario.to_string(),
            scenario: Some(scenario),
            config,
            env: build_scenario(scenario),
        })
    }
}

/// The walk starts at the grid center ([11, 11] on the default grid).
fn trial_config(common: &CommonArgs, env: &Environment) -> TrialConfig {
    let bounds = env.bounds();
    TrialConfig {
        walk: WalkConfig {
            steps_per_walk: common.steps_per_walk,
            walks_per_round: common.walks,
            start: crate::environment::GridPosition::new(bounds.width / 2, bounds.height / 2),
        },
        rounds: common.rounds,
        seed: common.seed,
    }
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    run: ManifestRun<'a>,
    environment: &'a EnvironmentConfig,
}

#[derive(Debug, Serialize)]
struct ManifestRun<'a> {
    command: &'a str,
    scenario: &'a str,
    policy: &'a str,
    rounds: u32,
    walks: u32,
    steps_per_walk: u32,
    start_x: i32,
    start_y: i32,
    seed: u64,
}

/// Entry point used by the binary.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Snapshot(args) => cmd_snapshot(&args),
        Command::Validate(common) => cmd_validate(&common),
        Command::Compare(common) => cmd_compare(&common),
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let resolved = resolve_environment(&args.common)?;
    let config = trial_config(&args.common, &resolved.env);
    config.validate(&resolved.env)?;

    let with_learning = args.policy != PolicyArg::RssiDefault;
    let report = simulation::run_trial(&resolved.env, &config, with_learning)?;

    emit_run_files(&args.common, "run", args.policy, &resolved, &config, &report)?;
    print_report(&resolved.label, &config, &report, args.policy);
    println!("wrote {}", args.common.output_dir.display());
    Ok(())
}

fn cmd_compare(common: &CommonArgs) -> Result<()> {
    let resolved = resolve_environment(common)?;
    let config = trial_config(common, &resolved.env);
    config.validate(&resolved.env)?;

    let report = simulation::run_trial(&resolved.env, &config, true)?;
    emit_run_files(common, "compare", PolicyArg::Both, &resolved, &config, &report)?;
    print_report(&resolved.label, &config, &report, PolicyArg::Both);
    println!("wrote {}", common.output_dir.display());
    Ok(())
}

fn cmd_snapshot(args: &SnapshotArgs) -> Result<()> {
    if args.policy == PolicyArg::Both {
        return Err(Error::InvalidConfig(
            "snapshot replays a single policy; pass rssi_default or transition_learning".into(),
        ));
    }
    let policy = match args.policy {
        PolicyArg::RssiDefault => Policy::RssiDefault,
        PolicyArg::TransitionLearning => Policy::TransitionLearning,
        PolicyArg::Both => unreachable!(),
    };
    let resolved = resolve_environment(&args.common)?;
    let config = trial_config(&args.common, &resolved.env);

    let grid = snapshot_round(&resolved.env, policy, &config, args.round)?;
    fs::create_dir_all(&args.common.output_dir)?;
    let path = args
        .common
        .output_dir
        .join(format!("snapshot_round_{}.csv", args.round));
    write_grid_csv(&path, &grid, |v| v.to_string())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_validate(common: &CommonArgs) -> Result<()> {
    let resolved = resolve_environment(common)?;
    let report = analysis::run_oracle_checks(
        &resolved.env,
        resolved.scenario,
        EMPIRICAL_STEPS,
        common.seed,
    );
    print!("{report}");
    if report.all_passed() {
        Ok(())
    } else {
        Err(Error::OracleChecksFailed {
            failed: report.failed_count(),
            total: report.checks.len(),
        })
    }
}

fn emit_run_files(
    common: &CommonArgs,
    command: &str,
    policy: PolicyArg,
    resolved: &ResolvedEnvironment,
    config: &TrialConfig,
    report: &SummaryReport,
) -> Result<()> {
    fs::create_dir_all(&common.output_dir)?;

    write_summary_csv(
        &common.output_dir.join("summary.csv"),
        &resolved.label,
        config,
        report,
        policy,
    )?;

    // Heatmaps for the policy of interest under the fixed names; the paired
    // baseline additionally under suffixed names when both policies ran.
    let primary = match policy {
        PolicyArg::RssiDefault => &report.baseline,
        _ => report.learning.as_ref().expect("learning stats present"),
    };
    write_grid_csv(
        &common.output_dir.join("heatmap_avg.csv"),
        &primary.mean_allocation,
        |v| format!("{v:.4}"),
    )?;
    write_grid_csv(&common.output_dir.join("visits.csv"), &primary.visits, |v| {
        v.to_string()
    })?;
    if policy == PolicyArg::Both {
        write_grid_csv(
            &common.output_dir.join("heatmap_avg_rssi_default.csv"),
            &report.baseline.mean_allocation,
            |v| format!("{v:.4}"),
        )?;
        write_grid_csv(
            &common.output_dir.join("visits_rssi_default.csv"),
            &report.baseline.visits,
            |v| v.to_string(),
        )?;
    }

    let manifest = RunManifest {
        run: ManifestRun {
            command,
            scenario: &resolved.label,
            policy: policy.label(),
            rounds: config.rounds,
            walks: config.walk.walks_per_round,
            steps_per_walk: config.walk.steps_per_walk,
            start_x: config.walk.start.x,
            start_y: config.walk.start.y,
            seed: config.seed,
        },
        environment: &resolved.config,
    };
    let text = toml::to_string_pretty(&manifest)?;
    fs::write(common.output_dir.join("run_manifest.toml"), text)?;
    Ok(())
}

fn summary_rows<'a>(
    report: &'a SummaryReport,
    policy: PolicyArg,
) -> Vec<(&'a TrialStats, f64)> {
    let mut rows = Vec::new();
    if matches!(policy, PolicyArg::RssiDefault | PolicyArg::Both) {
        rows.push((&report.baseline, 0.0));
    }
    if let Some(learning) = &report.learning {
        if matches!(policy, PolicyArg::TransitionLearning | PolicyArg::Both) {
            rows.push((learning, report.performance_gain_pct(Policy::TransitionLearning)));
        }
    }
    rows
}

fn write_summary_csv(
    path: &Path,
    scenario: &str,
    config: &TrialConfig,
    report: &SummaryReport,
    policy: PolicyArg,
) -> Result<()> {
    let mut out = String::from(
        "scenario,policy,avg_allocation,override_pct,performance_gain_pct,rounds,walks,seed\n",
    );
    for (stats, gain) in summary_rows(report, policy) {
        out.push_str(&format!(
            "{},{},{:.4},{:.4},{:.4},{},{},{}\n",
            scenario,
            stats.policy,
            stats.average_allocation,
            stats.override_pct,
            gain,
            config.rounds,
            config.walk.walks_per_round,
            config.seed,
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Write a grid as CSV: one line per row, row 0 = y 0, x ascending.
fn write_grid_csv<T>(path: &Path, grid: &Grid<T>, fmt: impl Fn(&T) -> String) -> Result<()> {
    let bounds = grid.bounds();
    let mut out = String::new();
    for y in 0..bounds.height {
        let row: Vec<String> = (0..bounds.width)
            .map(|x| fmt(&grid[crate::environment::GridPosition::new(x, y)]))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn print_report(label: &str, config: &TrialConfig, report: &SummaryReport, policy: PolicyArg) {
    println!(
        "scenario: {label}  seed: {}  rounds: {}  walks: {}  steps/walk: {}",
        config.seed, config.rounds, config.walk.walks_per_round, config.walk.steps_per_walk
    );
    println!(
        "{:<22} {:>11} {:>18} {:>8}",
        "policy", "override %", "allocation average", "gain %"
    );
    for (stats, gain) in summary_rows(report, policy) {
        println!(
            "{:<22} {:>11.2} {:>18.4} {:>8.2}",
            stats.policy.to_string(),
            stats.override_pct,
            stats.average_allocation,
            gain
        );
    }
}
