//! Sequential games, subset voting, Nash verification and centralized baselines.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocation::{default_pattern, AllocationPattern, Bid, DefaultKind};
use crate::error::{Error, Result};
use crate::resolution::resolve;
use crate::scenario::Scenario;
use crate::scheduler::{mu_table, Block, SpectralEfficiencyTable, Supply, DEFAULT_MAX_GROUPS};
use crate::solver::interior::ConcaveProgram;
use crate::strategy::{best_response_gain, greedy_bid, restricted_greedy_bid, utility, StrategyProblem};
use crate::subset::{nonempty_subsets, SubsetId};

const CENTRAL_PROX_WEIGHT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Mdsg,
    Sdsg,
    MdsgThenSdsg,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Mdsg => "mdsg",
            Mode::Sdsg => "sdsg",
            Mode::MdsgThenSdsg => "mdsg-then-sdsg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameConfig {
    pub kind: DefaultKind,
    pub mode: Mode,
    pub epsilon: f64,
    pub mdsg_cap: usize,
    pub sdsg_cap: usize,
    /// One value per player, or a single value applied to all.
    pub alpha: Vec<f64>,
    pub comp: bool,
    pub max_groups: usize,
    pub seed: u64,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            kind: DefaultKind::Mrg,
            mode: Mode::Mdsg,
            epsilon: 1e-6,
            mdsg_cap: 100,
            sdsg_cap: 50,
            alpha: vec![1.0],
            comp: false,
            max_groups: DEFAULT_MAX_GROUPS,
            seed: 0,
        }
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("convergence epsilon must be positive".into()));
        }
        if self.mdsg_cap == 0 || self.sdsg_cap == 0 {
            return Err(Error::Config("iteration caps must be at least 1".into()));
        }
        if self.alpha.is_empty() || self.alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::Config("alpha must be non-negative and finite".into()));
        }
        if self.max_groups == 0 {
            return Err(Error::Config("max_groups must be at least 1".into()));
        }
        Ok(())
    }

    /// Fairness parameter of each of `n` players.
    pub fn alphas(&self, n: usize) -> Result<Vec<f64>> {
        match self.alpha.len() {
            1 => Ok(vec![self.alpha[0]; n]),
            len if len == n => Ok(self.alpha.clone()),
            len => Err(Error::Config(format!("{len} alpha values for {n} players"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Sweep number for the subset game, starting at 1.
    pub sweep: Option<usize>,
    /// Subset negotiated in this step of the subset game.
    pub subset: Option<SubsetId>,
    pub b0: AllocationPattern,
    pub bids: Vec<Bid>,
    pub pattern: AllocationPattern,
    pub utilities: Vec<f64>,
    /// `‖pattern − b0‖₁`.
    pub movement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameTrace {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    /// Rounds (sweeps for the subset game) until the outcome stopped moving, at least 1.
    pub iterations_count: usize,
}

impl GameTrace {
    pub fn final_pattern(&self) -> Option<&AllocationPattern> {
        self.iterations.last().map(|r| &r.pattern)
    }
}

/// Builds every player's spectral-efficiency table for a scenario.
pub fn player_tables(scenario: &Scenario, comp: bool, max_groups: usize) -> Result<Vec<SpectralEfficiencyTable>> {
    (0..scenario.n_players)
        .map(|n| mu_table(scenario, n, comp, max_groups))
        .collect()
}

fn utilities(pattern: &AllocationPattern, tables: &[SpectralEfficiencyTable], alphas: &[f64]) -> Result<Vec<f64>> {
    tables
        .iter()
        .enumerate()
        .map(|(n, t)| utility(n, pattern, t, alphas[n]))
        .collect()
}

fn check_inputs(b0: &AllocationPattern, tables: &[SpectralEfficiencyTable], alphas: &[f64]) -> Result<()> {
    let n = b0.n_players();
    if tables.len() != n || alphas.len() != n {
        return Err(Error::invalid(format!(
            "{} tables and {} alphas for {n} players",
            tables.len(),
            alphas.len()
        )));
    }
    Ok(())
}

/// Sequential multi-dimensional game from `b0`.
pub fn run_mdsg_tables(
    config: &GameConfig,
    tables: &[SpectralEfficiencyTable],
    alphas: &[f64],
    b0: &AllocationPattern,
) -> Result<GameTrace> {
    config.validate()?;
    check_inputs(b0, tables, alphas)?;
    let n = b0.n_players();
    let mut b0 = b0.clone();
    let mut trace = GameTrace {
        iterations: Vec::new(),
        converged: false,
        iterations_count: config.mdsg_cap,
    };
    for round in 1..=config.mdsg_cap {
        let bids = (0..n)
            .map(|p| {
                greedy_bid(&StrategyProblem {
                    player: p,
                    b0: &b0,
                    table: &tables[p],
                    alpha: alphas[p],
                    restriction: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let outcome = resolve(&bids, &b0)?;
        let movement = outcome.pattern.l1_distance(&b0);
        trace.iterations.push(IterationRecord {
            sweep: None,
            subset: None,
            b0: b0.clone(),
            bids,
            utilities: utilities(&outcome.pattern, tables, alphas)?,
            pattern: outcome.pattern.clone(),
            movement,
        });
        b0 = outcome.pattern;
        if movement < config.epsilon {
            trace.converged = true;
            trace.iterations_count = (round - 1).max(1);
            break;
        }
    }
    Ok(trace)
}

pub fn run_mdsg(config: &GameConfig, scenario: &Scenario) -> Result<GameTrace> {
    let tables = player_tables(scenario, config.comp, config.max_groups)?;
    let alphas = config.alphas(scenario.n_players)?;
    let b0 = default_pattern(config.kind, scenario.n_players)?;
    run_mdsg_tables(config, &tables, &alphas, &b0)
}

/// Samples a subset with probability proportional to its votes.
pub fn choose_subset_by_vote<R: Rng + ?Sized>(preferences: &[(usize, SubsetId)], rng: &mut R) -> Result<SubsetId> {
    if preferences.is_empty() {
        return Err(Error::invalid("no subset preferences to vote on"));
    }
    let mut tally: Vec<(SubsetId, usize)> = Vec::new();
    for &(_, s) in preferences {
        match tally.iter_mut().find(|(t, _)| *t == s) {
            Some((_, c)) => *c += 1,
            None => tally.push((s, 1)),
        }
    }
    tally.sort_by_key(|&(s, _)| s);
    let mut pick = rng.random_range(0..preferences.len());
    for (s, c) in tally {
        if pick < c {
            return Ok(s);
        }
        pick -= c;
    }
    unreachable!("pick is below the total vote count")
}

/// Sequential single-dimensional subset game from `b0`.
pub fn run_sdsg_tables(
    config: &GameConfig,
    tables: &[SpectralEfficiencyTable],
    alphas: &[f64],
    b0: &AllocationPattern,
) -> Result<GameTrace> {
    config.validate()?;
    check_inputs(b0, tables, alphas)?;
    let n = b0.n_players();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let shared: Vec<SubsetId> = nonempty_subsets(n).filter(|s| s.len() > 1).collect();
    let mut b0 = b0.clone();
    let mut trace = GameTrace {
        iterations: Vec::new(),
        converged: false,
        iterations_count: config.sdsg_cap,
    };
    for sweep in 1..=config.sdsg_cap {
        let start = b0.clone();
        let mut remaining = shared.clone();
        while !remaining.is_empty() {
            let current = utilities(&b0, tables, alphas)?;
            // Each player's restricted bid on every open subset, kept for the chosen one.
            let mut offers: Vec<Vec<(SubsetId, Bid)>> = vec![Vec::new(); n];
            let mut votes = Vec::new();
            for p in 0..n {
                let mut best: Option<(SubsetId, f64)> = None;
                for &s in remaining.iter().filter(|s| s.contains(p)) {
                    let bid = restricted_greedy_bid(&StrategyProblem {
                        player: p,
                        b0: &b0,
                        table: &tables[p],
                        alpha: alphas[p],
                        restriction: Some(s),
                    })?;
                    let ideal = bid_pattern(&bid, &b0)?;
                    let gain = utility(p, &ideal, &tables[p], alphas[p])? - current[p];
                    if best.is_none_or(|(_, g)| gain > g) {
                        best = Some((s, gain));
                    }
                    offers[p].push((s, bid));
                }
                if let Some((s, _)) = best {
                    votes.push((p, s));
                }
            }
            let chosen = choose_subset_by_vote(&votes, &mut rng)?;
            let bids: Vec<Bid> = (0..n)
                .map(|p| {
                    offers[p]
                        .iter()
                        .find(|(s, _)| *s == chosen)
                        .map_or_else(|| b0.restriction(p), |(_, b)| b.clone())
                })
                .collect();
            let outcome = resolve(&bids, &b0)?;
            let movement = outcome.pattern.l1_distance(&b0);
            trace.iterations.push(IterationRecord {
                sweep: Some(sweep),
                subset: Some(chosen),
                b0: b0.clone(),
                bids,
                utilities: utilities(&outcome.pattern, tables, alphas)?,
                pattern: outcome.pattern.clone(),
                movement,
            });
            b0 = outcome.pattern;
            remaining.retain(|&s| s != chosen);
        }
        if b0.l1_distance(&start) < config.epsilon {
            trace.converged = true;
            trace.iterations_count = (sweep - 1).max(1);
            break;
        }
    }
    Ok(trace)
}

pub fn run_sdsg(config: &GameConfig, scenario: &Scenario, initial_b0: &AllocationPattern) -> Result<GameTrace> {
    let tables = player_tables(scenario, config.comp, config.max_groups)?;
    let alphas = config.alphas(scenario.n_players)?;
    run_sdsg_tables(config, &tables, &alphas, initial_b0)
}

/// The pattern a bid asks for: the bid on the bidder's subsets, the default elsewhere.
fn bid_pattern(bid: &Bid, b0: &AllocationPattern) -> Result<AllocationPattern> {
    let mut p = b0.clone();
    for (s, v) in bid.entries() {
        p.set(s, v);
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub mdsg: Option<GameTrace>,
    pub sdsg: Option<GameTrace>,
    pub pattern: AllocationPattern,
    /// Bids of the last round and the default they were made against.
    pub bids: Vec<Bid>,
    pub b0: AllocationPattern,
}

/// Runs the configured mode from the configured default.
pub fn play(config: &GameConfig, tables: &[SpectralEfficiencyTable], alphas: &[f64]) -> Result<GameOutcome> {
    let n = tables.len();
    let start = default_pattern(config.kind, n)?;
    let mdsg = match config.mode {
        Mode::Mdsg | Mode::MdsgThenSdsg => Some(run_mdsg_tables(config, tables, alphas, &start)?),
        Mode::Sdsg => None,
    };
    let sdsg = match config.mode {
        Mode::Sdsg => Some(run_sdsg_tables(config, tables, alphas, &start)?),
        Mode::MdsgThenSdsg => {
            let from = mdsg
                .as_ref()
                .and_then(|t| t.final_pattern())
                .cloned()
                .unwrap_or(start.clone());
            Some(run_sdsg_tables(config, tables, alphas, &from)?)
        }
        Mode::Mdsg => None,
    };
    let last = sdsg
        .as_ref()
        .or(mdsg.as_ref())
        .and_then(|t| t.iterations.last())
        .ok_or_else(|| Error::Internal("game produced no iterations".into()))?;
    Ok(GameOutcome {
        pattern: last.pattern.clone(),
        bids: last.bids.clone(),
        b0: last.b0.clone(),
        mdsg,
        sdsg,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashReport {
    pub gains: Vec<f64>,
    pub epsilon: f64,
    pub is_nash: bool,
}

/// Best-response gains of every player; an ε-Nash point when all are at most `eps`.
pub fn verify_nash(
    bids: &[Bid],
    b0: &AllocationPattern,
    tables: &[SpectralEfficiencyTable],
    alphas: &[f64],
    eps: f64,
) -> Result<NashReport> {
    check_inputs(b0, tables, alphas)?;
    let gains = (0..tables.len())
        .map(|p| best_response_gain(p, bids, b0, &tables[p], alphas[p]))
        .collect::<Result<Vec<_>>>()?;
    let is_nash = gains.iter().all(|&g| g <= eps);
    Ok(NashReport {
        gains,
        epsilon: eps,
        is_nash,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralizedOutcome {
    pub pattern: AllocationPattern,
    pub utilities: Vec<f64>,
    pub sum_utility: f64,
}

#[derive(Clone, Copy)]
enum Reciprocity {
    PerPlayer,
    TotalMass,
}

fn centralized(
    tables: &[SpectralEfficiencyTable],
    alphas: &[f64],
    tie_target: &AllocationPattern,
    rule: Reciprocity,
) -> Result<CentralizedOutcome> {
    check_inputs(tie_target, tables, alphas)?;
    let n = tie_target.n_players();
    let subsets: Vec<SubsetId> = nonempty_subsets(n).collect();
    let mut prog = ConcaveProgram::new();
    let vars: Vec<usize> = subsets.iter().map(|_| prog.add_var()).collect();
    match rule {
        Reciprocity::PerPlayer => {
            for p in 0..n {
                prog.add_row(
                    subsets
                        .iter()
                        .zip(&vars)
                        .filter(|(s, _)| s.contains(p))
                        .map(|(s, &v)| (v, 1.0 / s.len() as f64))
                        .collect(),
                    1.0 / n as f64,
                );
            }
        }
        Reciprocity::TotalMass => {
            prog.add_row(vars.iter().map(|&v| (v, 1.0)).collect(), 1.0);
        }
    }
    for (s, &v) in subsets.iter().zip(&vars) {
        prog.add_prox(v, CENTRAL_PROX_WEIGHT, tie_target.get(*s));
    }
    for (p, table) in tables.iter().enumerate() {
        Block::build(&mut prog, table, alphas[p], |_, s| Supply::Var {
            index: vars[s.index() - 1],
            offset: 0.0,
        });
    }
    let sol = prog.solve()?;
    let mut values = vec![0.0; 1 << n];
    for (s, &v) in subsets.iter().zip(&vars) {
        let x = sol.x[v];
        values[s.index()] = if x < 1e-11 { 0.0 } else { x };
    }
    let pattern = AllocationPattern::new(n, values)?;
    let utilities = utilities(&pattern, tables, alphas)?;
    Ok(CentralizedOutcome {
        sum_utility: utilities.iter().sum(),
        utilities,
        pattern,
    })
}

/// Sum-utility optimum under per-player reciprocity.
pub fn centralized_sr(
    tables: &[SpectralEfficiencyTable],
    alphas: &[f64],
    tie_target: &AllocationPattern,
) -> Result<CentralizedOutcome> {
    centralized(tables, alphas, tie_target, Reciprocity::PerPlayer)
}

/// Sum-utility optimum when only the total mass is constrained.
pub fn centralized_lr(
    tables: &[SpectralEfficiencyTable],
    alphas: &[f64],
    tie_target: &AllocationPattern,
) -> Result<CentralizedOutcome> {
    centralized(tables, alphas, tie_target, Reciprocity::TotalMass)
}

/// Default pattern of a game kind, used as the neutral tie-break target.
pub fn tie_target(kind: DefaultKind, n: usize) -> Result<AllocationPattern> {
    default_pattern(kind, n)
}
