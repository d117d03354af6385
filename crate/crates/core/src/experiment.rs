//! Monte Carlo experiments: user drops × fading draws, the game, the baselines, and
//! CSV/JSON outputs.
//!
//! Seeds: every stream is derived from the master seed by [`derive_seed`], a SplitMix64
//! hash chain over integer tags. User drop `i` uses tags `[1, i]`, fading draw `j` of drop
//! `i` uses `[2, i, j]` and the voting stream of that realization uses `[3, i, j]`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{bid_box, default_pattern, is_feasible, AllocationPattern};
use crate::error::{Error, Result};
use crate::orchestrator::{
    centralized_lr, centralized_sr, play, player_tables, verify_nash, GameConfig, Mode,
};
use crate::scenario::{Preset, Scenario, ScenarioConfig};
use crate::scheduler::{evaluate, SpectralEfficiencyTable};

pub const RATES_HEADER: [&str; 9] = [
    "realization",
    "user_draw",
    "fading_draw",
    "player",
    "user",
    "game_rate_bps",
    "default_rate_bps",
    "cs_sr_rate_bps",
    "cs_lr_rate_bps",
];
pub const CONVERGENCE_HEADER: [&str; 4] = ["realization", "mode", "iterations", "converged"];

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream named by `tags` under `master`.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(master), |acc, &t| mix(acc ^ mix(t)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub game: GameConfig,
    /// User number and location realizations; defaults to 100 (two players) or 50 (four).
    pub user_draws: Option<usize>,
    /// Fast-fading realizations per user drop; defaults to 20 (two players) or 10 (four).
    pub fading_draws: Option<usize>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub verify_nash: bool,
    pub nash_epsilon: f64,
    /// Bandwidth per operator; the unit resource is `N` times this.
    pub band_hz: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            game: GameConfig::default(),
            user_draws: None,
            fading_draws: None,
            seed: 1,
            output_dir: PathBuf::from("out"),
            verify_nash: true,
            nash_epsilon: 1e-3,
            band_hz: 20e6,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn n_players(&self) -> usize {
        self.scenario.preset.n_players()
    }

    pub fn user_draws(&self) -> usize {
        self.user_draws.unwrap_or(match self.scenario.preset {
            Preset::TwoPlayer => 100,
            Preset::FourPlayer => 50,
        })
    }

    pub fn fading_draws(&self) -> usize {
        self.fading_draws.unwrap_or(match self.scenario.preset {
            Preset::TwoPlayer => 20,
            Preset::FourPlayer => 10,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.game.validate()?;
        self.game.alphas(self.n_players())?;
        self.scenario.channel.validate()?;
        if self.user_draws() == 0 || self.fading_draws() == 0 {
            return Err(Error::Config("repetition counts must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.scenario.visiting_prob) {
            return Err(Error::Config("visiting probability must lie in [0, 1]".into()));
        }
        if !(self.scenario.mean_users > 0.0) {
            return Err(Error::Config("mean user count must be positive".into()));
        }
        if !(self.band_hz > 0.0) || !(self.nash_epsilon > 0.0) {
            return Err(Error::Config("band and Nash epsilon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub realization: usize,
    pub user_draw: usize,
    pub fading_draw: usize,
    pub player: usize,
    pub user: usize,
    pub game_rate_bps: f64,
    pub default_rate_bps: f64,
    pub cs_sr_rate_bps: f64,
    pub cs_lr_rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub realization: usize,
    pub mode: String,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub index: usize,
    pub user_draw: usize,
    pub fading_draw: usize,
    pub game_pattern: AllocationPattern,
    pub game_utilities: Vec<f64>,
    pub default_utilities: Vec<f64>,
    pub cs_sr_utilities: Vec<f64>,
    pub cs_lr_utilities: Vec<f64>,
    pub nash_gains: Option<Vec<f64>>,
    pub rates: Vec<RateRow>,
    pub convergence: Vec<ConvergenceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n_players: usize,
    pub nash_epsilon: f64,
    pub realizations: Vec<Realization>,
}

impl ExperimentReport {
    pub fn rate_rows(&self) -> impl Iterator<Item = &RateRow> {
        self.realizations.iter().flat_map(|r| r.rates.iter())
    }

    pub fn convergence_rows(&self) -> impl Iterator<Item = &ConvergenceRow> {
        self.realizations.iter().flat_map(|r| r.convergence.iter())
    }
}

fn rates_bps(
    pattern: &AllocationPattern,
    tables: &[SpectralEfficiencyTable],
    alphas: &[f64],
    unit_hz: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut utils = Vec::with_capacity(tables.len());
    let mut rates = Vec::with_capacity(tables.len());
    for (p, t) in tables.iter().enumerate() {
        let r = evaluate(p, pattern, t, alphas[p])?;
        utils.push(r.value);
        rates.push(r.rates.iter().map(|x| x * unit_hz).collect());
    }
    Ok((utils, rates))
}

/// One realization: scenario, game, baselines and the re-checks before recording.
pub fn run_realization(config: &ExperimentConfig, user_draw: usize, fading_draw: usize) -> Result<Realization> {
    let index = user_draw * config.fading_draws() + fading_draw;
    let (i, j) = (user_draw as u64, fading_draw as u64);
    let scenario = Scenario::generate(
        &config.scenario,
        derive_seed(config.seed, &[1, i]),
        derive_seed(config.seed, &[2, i, j]),
    )?;
    let n = scenario.n_players;
    let game_cfg = GameConfig {
        seed: derive_seed(config.seed, &[3, i, j]),
        ..config.game.clone()
    };
    let alphas = game_cfg.alphas(n)?;
    let tables = player_tables(&scenario, game_cfg.comp, game_cfg.max_groups)?;

    let outcome = play(&game_cfg, &tables, &alphas)?;
    if !is_feasible(&outcome.pattern, 1e-8) {
        return Err(Error::Internal(format!("game outcome of realization {index} is infeasible")));
    }
    for bid in &outcome.bids {
        if !bid_box(bid, &outcome.b0)?.contains(&outcome.pattern, 1e-9) {
            return Err(Error::Internal(format!(
                "game outcome of realization {index} leaves the box of player {}",
                bid.player()
            )));
        }
    }
    let default = default_pattern(game_cfg.kind, n)?;
    let sr = centralized_sr(&tables, &alphas, &default)?;
    let lr = centralized_lr(&tables, &alphas, &default)?;

    let unit_hz = n as f64 * config.band_hz;
    let (game_u, game_r) = rates_bps(&outcome.pattern, &tables, &alphas, unit_hz)?;
    let (def_u, def_r) = rates_bps(&default, &tables, &alphas, unit_hz)?;
    let (_, sr_r) = rates_bps(&sr.pattern, &tables, &alphas, unit_hz)?;
    let (_, lr_r) = rates_bps(&lr.pattern, &tables, &alphas, unit_hz)?;

    let mut rates = Vec::new();
    for p in 0..n {
        for u in 0..game_r[p].len() {
            rates.push(RateRow {
                realization: index,
                user_draw,
                fading_draw,
                player: p,
                user: u,
                game_rate_bps: game_r[p][u],
                default_rate_bps: def_r[p][u],
                cs_sr_rate_bps: sr_r[p][u],
                cs_lr_rate_bps: lr_r[p][u],
            });
        }
    }
    let mut convergence = Vec::new();
    for (mode, trace) in [(Mode::Mdsg, &outcome.mdsg), (Mode::Sdsg, &outcome.sdsg)] {
        if let Some(t) = trace {
            convergence.push(ConvergenceRow {
                realization: index,
                mode: mode.label().to_string(),
                iterations: t.iterations_count,
                converged: t.converged,
            });
        }
    }
    let nash_gains = if config.verify_nash {
        Some(verify_nash(&outcome.bids, &outcome.b0, &tables, &alphas, config.nash_epsilon)?.gains)
    } else {
        None
    };
    Ok(Realization {
        index,
        user_draw,
        fading_draw,
        game_pattern: outcome.pattern,
        game_utilities: game_u,
        default_utilities: def_u,
        cs_sr_utilities: sr.utilities,
        cs_lr_utilities: lr.utilities,
        nash_gains,
        rates,
        convergence,
    })
}

/// Runs every realization (in parallel) and returns them ordered by index.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let fading = config.fading_draws();
    let jobs: Vec<(usize, usize)> = (0..config.user_draws())
        .flat_map(|i| (0..fading).map(move |j| (i, j)))
        .collect();
    let realizations = jobs
        .par_iter()
        .map(|&(i, j)| run_realization(config, i, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        n_players: config.n_players(),
        nash_epsilon: config.nash_epsilon,
        realizations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveStats {
    pub median: Option<f64>,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashSummary {
    pub epsilon: f64,
    pub checked: usize,
    pub passed: usize,
    pub max_gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub runs: usize,
    pub converged: usize,
    /// Iterations (sweeps for the subset game) → number of realizations.
    pub histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_players: usize,
    pub realizations: usize,
    pub users: usize,
    /// Per-user rate statistics, bits/s, keyed `game`, `default`, `cs_sr`, `cs_lr`.
    pub rates_bps: BTreeMap<String, CurveStats>,
    /// Mean utility of each player, same keys.
    pub player_utilities: BTreeMap<String, Vec<Option<f64>>>,
    pub nash: NashSummary,
    pub convergence: BTreeMap<String, ConvergenceSummary>,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// `None` stands for a non-finite mean (a starved user at α ≥ 1).
fn finite(v: Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite())
}

pub fn summarize(report: &ExperimentReport) -> Summary {
    let curves: [(&str, fn(&RateRow) -> f64); 4] = [
        ("game", |r| r.game_rate_bps),
        ("default", |r| r.default_rate_bps),
        ("cs_sr", |r| r.cs_sr_rate_bps),
        ("cs_lr", |r| r.cs_lr_rate_bps),
    ];
    let mut rates_bps = BTreeMap::new();
    for (name, f) in curves {
        let vals: Vec<f64> = report.rate_rows().map(f).collect();
        rates_bps.insert(
            name.to_string(),
            CurveStats {
                median: median(&vals),
                mean: mean(&vals),
            },
        );
    }
    let utils: [(&str, fn(&Realization) -> &Vec<f64>); 4] = [
        ("game", |r| &r.game_utilities),
        ("default", |r| &r.default_utilities),
        ("cs_sr", |r| &r.cs_sr_utilities),
        ("cs_lr", |r| &r.cs_lr_utilities),
    ];
    let mut player_utilities = BTreeMap::new();
    for (name, f) in utils {
        let per_player = (0..report.n_players)
            .map(|p| {
                let v: Vec<f64> = report.realizations.iter().map(|r| f(r)[p]).collect();
                finite(mean(&v))
            })
            .collect();
        player_utilities.insert(name.to_string(), per_player);
    }
    let gains: Vec<&Vec<f64>> = report
        .realizations
        .iter()
        .filter_map(|r| r.nash_gains.as_ref())
        .collect();
    let nash = NashSummary {
        epsilon: report.nash_epsilon,
        checked: gains.len(),
        passed: gains
            .iter()
            .filter(|g| g.iter().all(|&x| x <= report.nash_epsilon))
            .count(),
        max_gain: gains.iter().flat_map(|g| g.iter().copied()).reduce(f64::max),
    };
    let mut convergence: BTreeMap<String, ConvergenceSummary> = BTreeMap::new();
    for row in report.convergence_rows() {
        let entry = convergence
            .entry(row.mode.clone())
            .or_insert_with(|| ConvergenceSummary {
                runs: 0,
                converged: 0,
                histogram: BTreeMap::new(),
            });
        entry.runs += 1;
        entry.converged += usize::from(row.converged);
        *entry.histogram.entry(row.iterations).or_insert(0) += 1;
    }
    Summary {
        n_players: report.n_players,
        realizations: report.realizations.len(),
        users: report.rate_rows().count(),
        rates_bps,
        player_utilities,
        nash,
        convergence,
    }
}

/// Creates `dir` and checks that files can be written into it.
pub fn prepare_output_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write-check");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source: e,
    }
}

fn write_csv<'a, T: Serialize + 'a>(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = &'a T>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `rates.csv`, `convergence.csv` and `summary.json` into `dir`.
pub fn emit_outputs(report: &ExperimentReport, dir: &Path) -> Result<Summary> {
    prepare_output_dir(dir)?;
    write_csv(&dir.join("rates.csv"), &RATES_HEADER, report.rate_rows())?;
    write_csv(
        &dir.join("convergence.csv"),
        &CONVERGENCE_HEADER,
        report.convergence_rows(),
    )?;
    let summary = summarize(report);
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}
