//! Randomized invariant checks over generated scenarios.
//!
//! Each check returns a [`CheckResult`] instead of panicking so the same code backs the
//! `verify` and `oracle` commands and the acceptance tests.

use std::time::Instant;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::allocation::{
    bid_box, default_pattern, is_feasible, sample_feasible, uniform_interior, AllocationPattern, Bid, DefaultKind,
};
use crate::error::Result;
use crate::experiment::derive_seed;
use crate::orchestrator::{
    centralized_lr, centralized_sr, play, player_tables, run_mdsg_tables, run_sdsg_tables, tie_target,
    verify_nash, GameConfig, GameTrace, Mode,
};
use crate::oracle::{greedy_bid_by_grid, random_bid, resolve_by_vertices, utility_by_grid};
use crate::resolution::{resolve, sign_coefficients};
use crate::scenario::{Preset, Scenario, ScenarioConfig};
use crate::scheduler::{
    evaluate, finite_difference_gradient, mu_table, utility_supergradient, SpectralEfficiencyTable, TableUser,
};
use crate::strategy::{greedy_bid, utility, StrategyProblem};
use crate::subset::{subsets_containing, SubsetId};

const MAX_NOTES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub trials: usize,
    pub failures: usize,
    /// Largest violation seen, in the units of the check's tolerance.
    pub worst: f64,
    pub seconds: f64,
    pub notes: Vec<String>,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{} {}: {} trials, {} failures, worst {:.3e}, {:.2}s{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.trials,
            self.failures,
            self.worst,
            self.seconds,
            if self.notes.is_empty() {
                String::new()
            } else {
                format!(" [{}]", self.notes.join("; "))
            }
        )
    }
}

struct Tally {
    name: String,
    start: Instant,
    trials: usize,
    failures: usize,
    worst: f64,
    notes: Vec<String>,
}

impl Tally {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            start: Instant::now(),
            trials: 0,
            failures: 0,
            worst: 0.0,
            notes: Vec::new(),
        }
    }

    /// Records one trial whose violation is `excess` beyond its tolerance (pass iff ≤ 0).
    fn record(&mut self, violation: f64, tol: f64, note: impl FnOnce() -> String) {
        self.trials += 1;
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        self.worst = self.worst.max(v);
        if v > tol {
            self.fail(note);
        }
    }

    fn check(&mut self, ok: bool, note: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.fail(note);
        }
    }

    fn fail(&mut self, note: impl FnOnce() -> String) {
        self.failures += 1;
        if self.notes.len() < MAX_NOTES {
            self.notes.push(note());
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            passed: self.failures == 0,
            name: self.name,
            trials: self.trials,
            failures: self.failures,
            worst: self.worst,
            seconds: self.start.elapsed().as_secs_f64(),
            notes: self.notes,
        }
    }
}

/// `count` scenarios of one preset, alternating visiting probabilities 0 and 0.5.
pub fn random_scenarios(preset: Preset, count: usize, seed: u64) -> Result<Vec<Scenario>> {
    (0..count)
        .map(|i| {
            let config = ScenarioConfig {
                preset,
                visiting_prob: if i % 2 == 0 { 0.0 } else { 0.5 },
                ..ScenarioConfig::default()
            };
            scenario_draw(&config, i, seed)
        })
        .collect()
}

/// Scenario number `i` drawn from `config`.
pub fn scenario_draw(config: &ScenarioConfig, i: usize, seed: u64) -> Result<Scenario> {
    Scenario::generate(
        config,
        derive_seed(seed, &[10, i as u64]),
        derive_seed(seed, &[11, i as u64]),
    )
}

fn tables_of(scenarios: &[Scenario]) -> Result<Vec<Vec<SpectralEfficiencyTable>>> {
    scenarios.iter().map(|s| player_tables(s, false, 0)).collect()
}

/// Players with at least one user, as (scenario, player) pairs.
fn populated(tables: &[Vec<SpectralEfficiencyTable>]) -> Vec<(usize, usize)> {
    tables
        .iter()
        .enumerate()
        .flat_map(|(i, ts)| {
            ts.iter()
                .enumerate()
                .filter(|(_, t)| !t.is_empty())
                .map(move |(n, _)| (i, n))
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Mix of a random feasible pattern with the uniform interior point.
fn interior_pattern<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<AllocationPattern> {
    let vertex_mix = sample_feasible(n, 3, rng)?;
    Ok(vertex_mix.mix(&uniform_interior(n)?, 0.5))
}

/// The two hand-derived two-player instances, timed individually.
pub fn resolution_golden() -> Result<CheckResult> {
    let mut t = Tally::new("resolution golden values");
    let b0 = default_pattern(DefaultKind::Mrg, 2)?;
    let s = SubsetId::from_players;

    let bids = [
        Bid::from_entries(0, 2, &[(s(&[0]), 0.3), (s(&[0, 1]), 0.4)])?,
        Bid::from_entries(1, 2, &[(s(&[1]), 0.1), (s(&[0, 1]), 0.8)])?,
    ];
    let clock = Instant::now();
    let out = resolve(&bids, &b0)?;
    let elapsed = clock.elapsed().as_secs_f64();
    let expected = [(s(&[0]), 0.3), (s(&[1]), 0.3), (s(&[0, 1]), 0.4)];
    let err = expected
        .iter()
        .map(|&(k, v)| (out.pattern.get(k) - v).abs())
        .fold((out.objective - 0.8).abs(), f64::max);
    t.record(err, 1e-8, || format!("golden instance off by {err:.3e}"));
    t.check(elapsed < 1e-3, || format!("golden instance took {elapsed:.2e}s"));

    let bids = [
        Bid::from_entries(0, 2, &[(s(&[0]), 0.0), (s(&[0, 1]), 1.0)])?,
        Bid::from_entries(1, 2, &[(s(&[1]), 0.5), (s(&[0, 1]), 0.0)])?,
    ];
    let clock = Instant::now();
    let out = resolve(&bids, &b0)?;
    let elapsed = clock.elapsed().as_secs_f64();
    t.check(out.pattern == b0, || format!("mixed-sign instance moved to {:?}", out.pattern.values()));
    t.check(elapsed < 1e-3, || format!("mixed-sign instance took {elapsed:.2e}s"));
    Ok(t.finish())
}

fn random_profile<R: Rng + ?Sized>(n: usize, i: usize, rng: &mut R) -> Result<(AllocationPattern, Vec<Bid>)> {
    let b0 = match i % 3 {
        0 => default_pattern(DefaultKind::Mrg, n)?,
        1 => default_pattern(DefaultKind::Rpg, n)?,
        _ => sample_feasible(n, 3, rng)?,
    };
    let bids = (0..n)
        .map(|p| {
            if rng.random_bool(0.2) {
                Ok(b0.restriction(p))
            } else {
                random_bid(p, n, rng)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((b0, bids))
}

/// Resolution against vertex enumeration on random bid profiles.
///
/// Besides the objective comparison, every outcome must be feasible and inside every
/// bidder's box, and the sign-linearized objective must equal the ℓ¹ distance on it.
/// Where the resolution reports a unique optimum the two patterns must coincide.
pub fn resolution_oracle(players: &[usize], profiles: usize, seed: u64) -> Result<CheckResult> {
    let mut t = Tally::new("resolution vs vertex enumeration");
    for &n in players {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[20, n as u64]));
        for i in 0..profiles {
            let (b0, bids) = random_profile(n, i, &mut rng)?;
            let out = resolve(&bids, &b0)?;
            let oracle = resolve_by_vertices(&bids, &b0)?;
            let gap = (out.objective - oracle.objective).abs();
            t.record(gap, 2e-3, || format!("N={n} profile {i}: objective gap {gap:.3e}"));
            t.check(is_feasible(&out.pattern, 1e-8), || format!("N={n} profile {i}: infeasible"));
            for bid in &bids {
                let inside = bid_box(bid, &b0)?.contains(&out.pattern, 1e-9);
                t.check(inside, || format!("N={n} profile {i}: outside box of player {}", bid.player()));
            }
            let signs = sign_coefficients(&bids, &b0)?;
            let linear: f64 = out
                .pattern
                .values()
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, v)| f64::from(signs.alpha(SubsetId(k as u32))) * (v - b0.values()[k]))
                .sum();
            let drift = (linear - out.objective).abs();
            t.record(drift, 1e-8, || format!("N={n} profile {i}: linearized objective off by {drift:.3e}"));
            if out.unique {
                let d = out.pattern.l1_distance(&oracle.pattern);
                t.record(d, 1e-6, || format!("N={n} profile {i}: unique optimum differs by {d:.3e}"));
            }
        }
    }
    Ok(t.finish())
}

/// Scheduling against grid search on random one- or two-transmitter tables.
pub fn scheduling_oracle(cases: usize, seed: u64) -> Result<CheckResult> {
    let mut t = Tally::new("scheduling vs grid search");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[21]));
    for i in 0..cases {
        let n = 2 + i % 2;
        // The grid has (steps + 1)^|P_0| points, so three players get a coarser one.
        let (steps, tol) = if n == 2 { (1000, 1e-3) } else { (24, 5e-3) };
        let subsets = subsets_containing(0, n)?;
        // Two users on one transmitter keep the grid one-dimensional per subset.
        let users: Vec<TableUser> = (0..2)
            .map(|_| TableUser {
                serving_tx: 0,
                mu: subsets.iter().map(|_| rng.random_range(0.2..4.0)).collect(),
            })
            .collect();
        let table = SpectralEfficiencyTable::new(0, n, users)?;
        let b = sample_feasible(n, 3, &mut rng)?;
        let alpha = *[0.0, 0.5, 1.0, 2.0].choose(&mut rng).unwrap_or(&1.0);
        let exact = evaluate(0, &b, &table, alpha)?.value;
        let grid = utility_by_grid(&b, &table, alpha, steps)?;
        // The grid can only undershoot; its resolution bounds how far.
        let over = grid - exact;
        t.record(over, 1e-9, || format!("case {i}: grid beats solver by {over:.3e}"));
        let under = rel(exact, grid);
        t.record(under, tol, || format!("case {i}: solver {exact} vs grid {grid}"));
    }
    Ok(t.finish())
}

/// Greedy bids against a grid over the strategy simplex for two players.
pub fn bid_oracle(scenarios: &[Scenario], seed: u64) -> Result<CheckResult> {
    let mut t = Tally::new("greedy bid vs grid search");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[22]));
    for (i, scenario) in scenarios.iter().enumerate() {
        if scenario.n_players != 2 {
            continue;
        }
        for n in 0..2 {
            let table = mu_table(scenario, n, false, 0)?;
            if table.is_empty() {
                continue;
            }
            let b0 = match rng.random_range(0..3) {
                0 => default_pattern(DefaultKind::Mrg, 2)?,
                1 => default_pattern(DefaultKind::Rpg, 2)?,
                _ => sample_feasible(2, 2, &mut rng)?,
            };
            let alpha = *[0.5, 1.0, 2.0].choose(&mut rng).unwrap_or(&1.0);
            let problem = StrategyProblem {
                player: n,
                b0: &b0,
                table: &table,
                alpha,
                restriction: None,
            };
            let bid = greedy_bid(&problem)?;
            let mut values = b0.values().to_vec();
            for (s, v) in bid.entries() {
                values[s.index()] = v;
            }
            let value = utility(n, &AllocationPattern::new(2, values)?, &table, alpha)?;
            let grid = greedy_bid_by_grid(n, &b0, &table, alpha, 2000)?;
            // Solver may exceed the grid; the grid may exceed it only by its resolution.
            let short = (grid.utility - value) / grid.utility.abs().max(1.0);
            t.record(short, 1e-4, || format!("scenario {i} player {n}: grid {} vs bid {value}", grid.utility));
        }
    }
    Ok(t.finish())
}

/// Gains positive and finite, users inside the floor and served by their own operator,
/// spectral efficiencies monotone under removal of interferers.
pub fn scenario_invariants(scenarios: &[Scenario]) -> Result<CheckResult> {
    let mut t = Tally::new("scenario and table invariants");
    for (i, s) in scenarios.iter().enumerate() {
        t.check(s.gains.iter().flatten().all(|&g| g > 0.0 && g.is_finite()), || {
            format!("scenario {i}: non-positive gain")
        });
        for (u, user) in s.users.iter().enumerate() {
            let own = s.layout.transmitters[user.serving_tx].owner == user.operator;
            t.check(own && s.layout.contains(user.position), || {
                format!("scenario {i} user {u}: bad serving transmitter or position")
            });
        }
        for n in 0..s.n_players {
            let table = mu_table(s, n, false, 0)?;
            for (u, row) in table.users().iter().enumerate() {
                for (a, &sa) in table.subsets().iter().enumerate() {
                    for (b, &sb) in table.subsets().iter().enumerate() {
                        if sa != sb && sa.is_subset_of(sb) {
                            let drop = row.mu[b] - row.mu[a];
                            t.record(drop, 0.0, || {
                                format!("scenario {i} player {n} user {u}: {sa} below {sb}")
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(t.finish())
}

/// Jensen's inequality for `g_n` on random feasible pairs.
pub fn concavity(scenarios: &[Scenario], triples: usize, alphas: &[f64], seed: u64) -> Result<CheckResult> {
    let mut t = Tally::new("utility concavity");
    let tables = tables_of(scenarios)?;
    let pairs = populated(&tables);
    if pairs.is_empty() {
        return Ok(t.finish());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[23]));
    for k in 0..triples {
        let (i, n) = pairs[k % pairs.len()];
        let table = &tables[i][n];
        let np = scenarios[i].n_players;
        let alpha = alphas[k % alphas.len()];
        let b1 = sample_feasible(np, 3, &mut rng)?;
        let b2 = sample_feasible(np, 3, &mut rng)?;
        let theta = rng.random_range(0.0..1.0);
        let mid = b1.mix(&b2, theta);
        let g1 = utility(n, &b1, table, alpha)?;
        let g2 = utility(n, &b2, table, alpha)?;
        let gm = utility(n, &mid, table, alpha)?;
        let chord = theta * g1 + (1.0 - theta) * g2;
        let violation = if chord == f64::NEG_INFINITY { 0.0 } else { chord - gm };
        t.record(violation, 1e-6, || format!("trial {k} (α={alpha}): chord {chord} above {gm}"));
    }
    Ok(t.finish())
}

/// Dual-based supergradient against central differences at interior points.
pub fn supergradient(scenarios: &[Scenario], points: usize, alphas: &[f64], seed: u64) -> Result<CheckResult> {
    let mut t = Tally::new("supergradient vs finite differences");
    let tables = tables_of(scenarios)?;
    let pairs = populated(&tables);
    if pairs.is_empty() {
        return Ok(t.finish());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[24]));
    for k in 0..points {
        let (i, n) = pairs[k % pairs.len()];
        let table = &tables[i][n];
        let alpha = alphas[k % alphas.len()];
        let b = interior_pattern(scenarios[i].n_players, &mut rng)?;
        let g = utility_supergradient(n, &b, table, alpha)?;
        let fd = finite_difference_gradient(n, &b, table, alpha, 1e-6)?;
        let err = g
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b).abs() / b.abs().max(1e-8))
            .fold(0.0, f64::max);
        t.record(err, 1e-4, || format!("point {k} (α={alpha}): relative error {err:.3e}"));
    }
    Ok(t.finish())
}

/// Moving `eps` of resource from `S` to a smaller `S̃` containing the player never hurts.
pub fn order_relation(
    scenarios: &[Scenario],
    trials: usize,
    alphas: &[f64],
    eps: f64,
    seed: u64,
) -> Result<CheckResult> {
    let mut t = Tally::new("order relation");
    let tables = tables_of(scenarios)?;
    let pairs = populated(&tables);
    if pairs.is_empty() {
        return Ok(t.finish());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[25]));
    for k in 0..trials {
        let (i, n) = pairs[k % pairs.len()];
        let table = &tables[i][n];
        let np = scenarios[i].n_players;
        let alpha = alphas[k % alphas.len()];
        let shared: Vec<SubsetId> = table.subsets().iter().copied().filter(|s| s.len() > 1).collect();
        let big = *shared.choose(&mut rng).unwrap_or(&SubsetId::full(np));
        let smaller: Vec<SubsetId> = table
            .subsets()
            .iter()
            .copied()
            .filter(|s| *s != big && s.is_subset_of(big))
            .collect();
        let small = *smaller.choose(&mut rng).unwrap_or(&SubsetId::singleton(n));
        let b = interior_pattern(np, &mut rng)?;
        let mut values = b.values().to_vec();
        let moved = eps.min(values[big.index()]);
        values[big.index()] -= moved;
        values[small.index()] += moved;
        let after = AllocationPattern::new(np, values)?;
        let before = evaluate(n, &b, table, alpha)?;
        let g1 = utility(n, &after, table, alpha)?;
        let drop = (before.value - g1) / before.value.abs().max(1.0);
        t.record(drop, 1e-9, || {
            format!("trial {k}: moving {big} to {small} changed {} to {g1}", before.value)
        });
        let col = table.subsets().iter().position(|&s| s == big).unwrap_or(0);
        let small_col = table.subsets().iter().position(|&s| s == small).unwrap_or(0);
        let strict = before.allocation.rows.iter().enumerate().any(|(u, w)| {
            w[col] > 1e-9 && table.users()[u].mu[small_col] > table.users()[u].mu[col] * (1.0 + 1e-9)
        });
        if strict && moved > 0.0 {
            t.check(g1 > before.value, || {
                format!("trial {k}: expected strict increase moving {big} to {small}")
            });
        }
    }
    Ok(t.finish())
}

/// Two-player MDSG: one resolution step and an ε-Nash outcome for both game kinds.
pub fn two_player_games(scenarios: &[Scenario], base: &GameConfig, nash_eps: f64) -> Result<CheckResult> {
    let mut t = Tally::new("two-player one-step convergence and Nash");
    for (i, s) in scenarios.iter().enumerate() {
        let tables = player_tables(s, base.comp, base.max_groups)?;
        let alphas = base.alphas(s.n_players)?;
        for kind in [DefaultKind::Mrg, DefaultKind::Rpg] {
            let config = GameConfig {
                kind,
                mode: Mode::Mdsg,
                ..base.clone()
            };
            let out = play(&config, &tables, &alphas)?;
            let trace = out.mdsg.as_ref().expect("MDSG mode records a trace");
            t.check(trace.converged && trace.iterations_count == 1, || {
                format!(
                    "scenario {i} {kind:?}: converged={} after {} iterations",
                    trace.converged, trace.iterations_count
                )
            });
            let report = verify_nash(&out.bids, &out.b0, &tables, &alphas, nash_eps)?;
            let worst = report.gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            t.record(worst, nash_eps, || format!("scenario {i} {kind:?}: best-response gain {worst:.3e}"));
        }
    }
    Ok(t.finish())
}

fn monotone_payoffs(trace: &GameTrace, tables: &[SpectralEfficiencyTable], alphas: &[f64]) -> Result<f64> {
    let Some(first) = trace.iterations.first() else {
        return Ok(0.0);
    };
    let mut prev: Vec<f64> = tables
        .iter()
        .enumerate()
        .map(|(n, tb)| utility(n, &first.b0, tb, alphas[n]))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for it in &trace.iterations {
        for (p, &u) in prev.iter().zip(&it.utilities) {
            let drop = if *p == f64::NEG_INFINITY { 0.0 } else { p - u };
            worst = worst.max(if drop.is_nan() { f64::INFINITY } else { drop });
        }
        prev.clone_from(&it.utilities);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameChecks {
    pub convergence: CheckResult,
    pub outcomes: CheckResult,
    pub baselines: CheckResult,
}

/// Runs MDSG, SDSG from the default and the MDSG-then-SDSG protocol on every scenario,
/// cycling through `kinds`, and checks convergence, monotone SDSG payoffs, outcome
/// validity and the centralized bounds.
pub fn game_checks(scenarios: &[Scenario], base: &GameConfig, kinds: &[DefaultKind]) -> Result<GameChecks> {
    let mut conv = Tally::new("convergence and monotone payoffs");
    let mut valid = Tally::new("game outcomes feasible and box-contained");
    let mut order = Tally::new("centralized bounds ordering");
    for (i, s) in scenarios.iter().enumerate() {
        let kind = kinds[i % kinds.len()];
        let config = GameConfig {
            kind,
            mode: Mode::MdsgThenSdsg,
            ..base.clone()
        };
        let tables = player_tables(s, config.comp, config.max_groups)?;
        let alphas = config.alphas(s.n_players)?;
        let start = default_pattern(kind, s.n_players)?;
        let fresh_sdsg = run_sdsg_tables(&config, &tables, &alphas, &start)?;
        let out = play(&config, &tables, &alphas)?;
        let mdsg = out.mdsg.clone().unwrap_or(run_mdsg_tables(&config, &tables, &alphas, &start)?);
        let follow = out.sdsg.as_ref().expect("protocol runs SDSG");

        for (label, trace) in [("MDSG", &mdsg), ("SDSG", &fresh_sdsg), ("MDSG+SDSG", follow)] {
            let last = trace.iterations.last().map_or(0.0, |r| r.movement);
            conv.check(trace.converged && last < config.epsilon, || {
                format!("scenario {i} {kind:?} {label}: converged={} last movement {last:.3e}", trace.converged)
            });
            for (k, it) in trace.iterations.iter().enumerate() {
                valid.check(is_feasible(&it.pattern, 1e-8), || format!("scenario {i} {label} step {k}: infeasible"));
                for bid in &it.bids {
                    let inside = bid_box(bid, &it.b0)?.contains(&it.pattern, 1e-9);
                    valid.check(inside, || format!("scenario {i} {label} step {k}: outside box"));
                }
            }
        }
        for (label, trace) in [("SDSG", &fresh_sdsg), ("MDSG+SDSG", follow)] {
            let drop = monotone_payoffs(trace, &tables, &alphas)?;
            conv.record(drop, 1e-7, || format!("scenario {i} {kind:?} {label}: payoff drop {drop:.3e}"));
        }

        let target = tie_target(kind, s.n_players)?;
        let sr = centralized_sr(&tables, &alphas, &target)?;
        let lr = centralized_lr(&tables, &alphas, &target)?;
        order.record(sr.sum_utility - lr.sum_utility, 1e-4, || {
            format!("scenario {i}: CS-SR {} above CS-LR {}", sr.sum_utility, lr.sum_utility)
        });
        for (label, trace) in [("MDSG", &mdsg), ("SDSG", &fresh_sdsg), ("MDSG+SDSG", follow)] {
            if let Some(last) = trace.iterations.last() {
                let game: f64 = last.utilities.iter().sum();
                order.record(game - sr.sum_utility, 1e-4, || {
                    format!("scenario {i} {label}: game {game} above CS-SR {}", sr.sum_utility)
                });
            }
        }
    }
    Ok(GameChecks {
        convergence: conv.finish(),
        outcomes: valid.finish(),
        baselines: order.finish(),
    })
}
