use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use sharing_game::checks::{
    bid_oracle, concavity, game_checks, order_relation, resolution_oracle, scenario_draw, scheduling_oracle,
    scenario_invariants, supergradient, two_player_games, CheckResult,
};
use sharing_game::experiment::{emit_outputs, prepare_output_dir, run_experiment, ExperimentConfig};
use sharing_game::orchestrator::Mode;
use sharing_game::scenario::{Preset, ScenarioConfig};
use sharing_game::{Error, Result};

const ALPHAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

#[derive(Debug, Parser)]
#[command(name = "sharing-game", version, about = "Inter-operator resource-sharing games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte-Carlo experiment and write rates.csv, convergence.csv and summary.json.
    Run {
        /// JSON experiment configuration
        config: PathBuf,
        /// Master seed
        #[arg(long)]
        seed: Option<u64>,
        /// mdsg, sdsg or mdsg-then-sdsg
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Probability that a user is dropped anywhere on the floor
        #[arg(long)]
        visiting_prob: Option<f64>,
        /// 2 or 4
        #[arg(long)]
        players: Option<usize>,
    },
    /// Randomized invariant checks on scenarios drawn from the configuration.
    Verify {
        /// JSON experiment configuration
        config: PathBuf,
        /// Scenarios drawn from the configuration
        #[arg(long, default_value_t = 6)]
        scenarios: usize,
    },
    /// Brute-force cross-checks of resolution, scheduling and bidding on small instances.
    Oracle {
        /// JSON experiment configuration
        config: PathBuf,
        /// Random bid profiles per player count
        #[arg(long, default_value_t = 200)]
        profiles: usize,
    },
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    serde_json::from_value(json!(s)).map_err(|_| format!("unknown mode {s:?}; expected mdsg, sdsg or mdsg-then-sdsg"))
}

fn load(path: &PathBuf) -> Result<ExperimentConfig> {
    let config = ExperimentConfig::load(path)?;
    config.validate()?;
    Ok(config)
}

fn run(
    config: &PathBuf,
    seed: Option<u64>,
    mode: Option<Mode>,
    out: Option<PathBuf>,
    visiting_prob: Option<f64>,
    players: Option<usize>,
) -> Result<serde_json::Value> {
    let mut config = ExperimentConfig::load(config)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(mode) = mode {
        config.game.mode = mode;
    }
    if let Some(out) = out {
        config.output_dir = out;
    }
    if let Some(vp) = visiting_prob {
        config.scenario.visiting_prob = vp;
    }
    if let Some(n) = players {
        config.scenario.preset = Preset::from_players(n)?;
    }
    config.validate()?;
    prepare_output_dir(&config.output_dir)?;
    let report = run_experiment(&config)?;
    let summary = emit_outputs(&report, &config.output_dir)?;
    Ok(json!({
        "output_dir": config.output_dir,
        "summary": summary,
    }))
}

fn verify(config: &PathBuf, scenarios: usize) -> Result<Vec<CheckResult>> {
    let config = load(config)?;
    let pool = (0..scenarios.max(1))
        .map(|i| scenario_draw(&config.scenario, i, config.seed))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = vec![
        scenario_invariants(&pool)?,
        concavity(&pool, 10 * pool.len(), &ALPHAS, config.seed)?,
        supergradient(&pool, 5 * pool.len(), &ALPHAS, config.seed)?,
        order_relation(&pool, 10 * pool.len(), &ALPHAS, 0.01, config.seed)?,
    ];
    let games = game_checks(&pool, &config.game, &[config.game.kind])?;
    checks.extend([games.convergence, games.outcomes, games.baselines]);
    if config.n_players() == 2 {
        checks.push(two_player_games(&pool, &config.game, config.nash_epsilon)?);
    }
    Ok(checks)
}

fn oracle(config: &PathBuf, profiles: usize) -> Result<Vec<CheckResult>> {
    let config = load(config)?;
    let two = ScenarioConfig {
        preset: Preset::TwoPlayer,
        ..config.scenario.clone()
    };
    let pool = (0..4)
        .map(|i| scenario_draw(&two, i, config.seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        resolution_oracle(&[2, 3], profiles, config.seed)?,
        scheduling_oracle(profiles / 4 + 1, config.seed)?,
        bid_oracle(&pool, config.seed)?,
    ])
}

fn report(command: &str, checks: Result<Vec<CheckResult>>) -> Result<(serde_json::Value, bool)> {
    let checks = checks?;
    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        eprintln!("{}", c.line());
    }
    Ok((json!({ "command": command, "passed": passed, "checks": checks }), passed))
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("{}", serde_json::to_string(&e.record()).unwrap_or_else(|_| e.to_string()));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            mode,
            out,
            visiting_prob,
            players,
        } => run(&config, seed, mode, out, visiting_prob, players).map(|v| (v, true)),
        Command::Verify { config, scenarios } => report("verify", verify(&config, scenarios)),
        Command::Oracle { config, profiles } => report("oracle", oracle(&config, profiles)),
    };
    match result {
        Ok((value, passed)) => {
            // A closed pipe on stdout is not an error of the run.
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&value).unwrap_or_default());
            if passed {
                ExitCode::SUCCESS
            } else {
                let failed = value["checks"]
                    .as_array()
                    .map(|cs| cs.iter().filter(|c| c["passed"] == false).count())
                    .unwrap_or(0);
                eprintln!("{}", json!({ "error": "check-failed", "message": format!("{failed} checks failed") }));
                ExitCode::from(1)
            }
        }
        Err(e) => fail(&e),
    }
}
