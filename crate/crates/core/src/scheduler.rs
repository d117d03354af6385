//! Operator utility: α-fair scheduling of an operator's users on an allocation pattern.
//!
//! `g_n(b) = sup_W Σ_u f(r_u)` with `r_u = Σ_S w_uS μ_uS` and, per transmitter `v` and
//! subset `S`, `Σ_{u at v} w_uS = b_S`. With cooperative transmission the transmitters of
//! an operator serve enumerated user groups instead and `Σ_c w_cS = b_S` per operator.
//!
//! The same block of variables and rows is reused by the bid and centralized programs,
//! where `b_S` becomes a variable instead of a constant.

use serde::{Deserialize, Serialize};

use crate::allocation::AllocationPattern;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::solver::interior::{ConcaveProgram, ProgramSolution};
use crate::subset::{subset_count, subsets_containing, SubsetId};

pub use crate::solver::interior::alpha_fair as alpha_fair_value;

/// Supplies at or below this are treated as exactly zero (their users get nothing).
const ZERO_SUPPLY: f64 = 1e-14;
pub const DEFAULT_MAX_GROUPS: usize = 4096;

/// `signal / (interference + noise)`.
pub fn sinr_from_parts(signal: f64, interference: f64, noise: f64) -> f64 {
    signal / (interference + noise)
}

/// SINR of `user` served by `serving_tx` on a resource shared by `subset`.
///
/// All other transmitters of the user's operator interfere, as do all transmitters of the
/// other players in `subset`.
pub fn sinr(scenario: &Scenario, user: usize, serving_tx: usize, subset: SubsetId) -> Result<f64> {
    let Some(u) = scenario.users.get(user) else {
        return Err(Error::invalid(format!("user {user} not in scenario")));
    };
    let Some(tx) = scenario.layout.transmitters.get(serving_tx) else {
        return Err(Error::invalid(format!(
            "transmitter {serving_tx} not in scenario"
        )));
    };
    if tx.owner != u.operator {
        return Err(Error::invalid(format!(
            "transmitter {serving_tx} does not belong to the operator of user {user}"
        )));
    }
    let p = scenario.tx_power_w_hz();
    let mut interference = 0.0;
    for (v, t) in scenario.layout.transmitters.iter().enumerate() {
        if v == serving_tx {
            continue;
        }
        if t.owner == u.operator || subset.contains(t.owner) {
            interference += p * scenario.gains[v][user];
        }
    }
    Ok(sinr_from_parts(
        p * scenario.gains[serving_tx][user],
        interference,
        scenario.noise_w_hz(),
    ))
}

/// `log₂(1 + γ)` in bits/s/Hz.
pub fn spectral_efficiency(gamma: f64) -> Result<f64> {
    if gamma < 0.0 || gamma.is_nan() {
        return Err(Error::invalid(format!("SINR must be non-negative, got {gamma}")));
    }
    Ok((1.0 + gamma).log2())
}

/// `Σ_S w_S μ_S`.
pub fn user_rate(w_row: &[f64], mu_row: &[f64]) -> f64 {
    w_row.iter().zip(mu_row).map(|(w, m)| w * m).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableUser {
    pub serving_tx: usize,
    /// Spectral efficiency per subset, aligned with [`SpectralEfficiencyTable::subsets`].
    pub mu: Vec<f64>,
}

/// Users served jointly by distinct transmitters of one operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompGroup {
    /// Indices into the table's users.
    pub members: Vec<usize>,
    /// `mu[k][s]` for member `k`; non-members have zero spectral efficiency in the group.
    pub mu: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEfficiencyTable {
    player: usize,
    n_players: usize,
    subsets: Vec<SubsetId>,
    users: Vec<TableUser>,
    groups: Option<Vec<CompGroup>>,
    truncated: bool,
}

impl SpectralEfficiencyTable {
    /// Table with per-transmitter scheduling; `mu` rows follow [`subsets_containing`].
    pub fn new(player: usize, n_players: usize, users: Vec<TableUser>) -> Result<Self> {
        let subsets = subsets_containing(player, n_players)?;
        for (u, user) in users.iter().enumerate() {
            if user.mu.len() != subsets.len() {
                return Err(Error::invalid(format!(
                    "user {u} has {} spectral efficiencies, expected {}",
                    user.mu.len(),
                    subsets.len()
                )));
            }
            if user.mu.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
                return Err(Error::invalid(format!(
                    "spectral efficiencies of user {u} must be finite and non-negative"
                )));
            }
        }
        Ok(Self {
            player,
            n_players,
            subsets,
            users,
            groups: None,
            truncated: false,
        })
    }

    /// Switches the table to cooperative scheduling over `groups`.
    pub fn with_groups(mut self, groups: Vec<CompGroup>) -> Result<Self> {
        for g in &groups {
            if g.members.is_empty()
                || g.members.len() != g.mu.len()
                || g.members.iter().any(|&u| u >= self.users.len())
                || g.mu.iter().any(|row| row.len() != self.subsets.len())
            {
                return Err(Error::invalid("malformed user group"));
            }
        }
        self.groups = Some(groups);
        Ok(self)
    }

    /// Cooperative table in which every user forms its own group.
    pub fn singleton_groups(self) -> Result<Self> {
        let groups = self
            .users
            .iter()
            .enumerate()
            .map(|(u, user)| CompGroup {
                members: vec![u],
                mu: vec![user.mu.clone()],
            })
            .collect();
        self.with_groups(groups)
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn subsets(&self) -> &[SubsetId] {
        &self.subsets
    }

    pub fn users(&self) -> &[TableUser] {
        &self.users
    }

    pub fn groups(&self) -> Option<&[CompGroup]> {
        self.groups.as_deref()
    }

    pub fn is_comp(&self) -> bool {
        self.groups.is_some()
    }

    /// Group enumeration hit the configured cap.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn mu(&self, user: usize, s: SubsetId) -> f64 {
        self.subsets
            .iter()
            .position(|&t| t == s)
            .map_or(0.0, |k| self.users[user].mu[k])
    }

    /// Copy with every spectral efficiency multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut t = self.clone();
        for u in &mut t.users {
            u.mu.iter_mut().for_each(|m| *m *= factor);
        }
        if let Some(groups) = &mut t.groups {
            for g in groups {
                g.mu.iter_mut().flatten().for_each(|m| *m *= factor);
            }
        }
        t
    }

    /// Transmitters with at least one user, ascending, each with its users.
    fn transmitter_users(&self) -> Vec<Vec<usize>> {
        let mut txs: Vec<usize> = self.users.iter().map(|u| u.serving_tx).collect();
        txs.sort_unstable();
        txs.dedup();
        txs.iter()
            .map(|&v| {
                (0..self.users.len())
                    .filter(|&u| self.users[u].serving_tx == v)
                    .collect()
            })
            .collect()
    }
}

/// Spectral efficiencies of `player`'s users on every subset containing the player.
pub fn mu_table(
    scenario: &Scenario,
    player: usize,
    comp_mode: bool,
    max_groups: usize,
) -> Result<SpectralEfficiencyTable> {
    if player >= scenario.n_players {
        return Err(Error::invalid(format!("player {player} not in scenario")));
    }
    let subsets = subsets_containing(player, scenario.n_players)?;
    let ids = scenario.users_of(player);
    let row = |u: usize, tx: usize| -> Result<Vec<f64>> {
        subsets
            .iter()
            .map(|&s| spectral_efficiency(sinr(scenario, u, tx, s)?))
            .collect()
    };
    let users = ids
        .iter()
        .map(|&u| {
            Ok(TableUser {
                serving_tx: scenario.users[u].serving_tx,
                mu: row(u, scenario.users[u].serving_tx)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let table = SpectralEfficiencyTable::new(player, scenario.n_players, users)?;
    if !comp_mode {
        return Ok(table);
    }

    let txs = scenario.layout.operator_transmitters(player);
    let max_size = ids.len().min(txs.len());
    let mut groups = Vec::new();
    let mut truncated = false;
    'sizes: for size in 1..=max_size {
        for members in combinations(ids.len(), size) {
            if groups.len() == max_groups {
                truncated = true;
                break 'sizes;
            }
            let assignment = best_assignment(scenario, &txs, &members, &ids);
            let mu = members
                .iter()
                .zip(&assignment)
                .map(|(&k, &tx)| row(ids[k], tx))
                .collect::<Result<Vec<_>>>()?;
            groups.push(CompGroup { members, mu });
        }
    }
    let mut table = table.with_groups(groups)?;
    table.truncated = truncated;
    Ok(table)
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Distinct transmitters for the group members maximizing the product of serving gains.
fn best_assignment(scenario: &Scenario, txs: &[usize], members: &[usize], ids: &[usize]) -> Vec<usize> {
    fn search(
        scenario: &Scenario,
        txs: &[usize],
        members: &[usize],
        ids: &[usize],
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
    ) {
        let k = cur.len();
        if k == members.len() {
            let score: f64 = cur
                .iter()
                .zip(members)
                .map(|(&tx, &m)| scenario.gains[tx][ids[m]].ln())
                .sum();
            if score > best.0 {
                *best = (score, cur.clone());
            }
            return;
        }
        for (i, &tx) in txs.iter().enumerate() {
            if !used[i] {
                used[i] = true;
                cur.push(tx);
                search(scenario, txs, members, ids, used, cur, best);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut best = (f64::NEG_INFINITY, Vec::new());
    search(
        scenario,
        txs,
        members,
        ids,
        &mut vec![false; txs.len()],
        &mut Vec::new(),
        &mut best,
    );
    best.1
}

/// Scheduling weights: rows are users (or groups), columns follow `subsets`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationMatrix {
    pub subsets: Vec<SubsetId>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityResult {
    pub value: f64,
    pub allocation: AllocationMatrix,
    pub rates: Vec<f64>,
}

/// Resource available to a player on one subset inside a larger program.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Supply {
    Fixed(f64),
    /// `b_S = offset + x[index]` for a program variable.
    Var { index: usize, offset: f64 },
}

/// One player's scheduling variables and rows inside a [`ConcaveProgram`].
pub(crate) struct Block {
    alpha: f64,
    comp: bool,
    /// Program user index per table user; `None` for excluded or starved users.
    user_ids: Vec<Option<usize>>,
    /// Users with some positive μ but no resource at all.
    starved: Vec<usize>,
    /// `w_vars[row][k]` for users (or groups) and subsets.
    w_vars: Vec<Vec<Option<usize>>>,
    /// Equality rows carrying each subset's supply.
    rows: Vec<Vec<usize>>,
    dropped: Vec<bool>,
}

impl Block {
    pub(crate) fn build(
        prog: &mut ConcaveProgram,
        table: &SpectralEfficiencyTable,
        alpha: f64,
        supply: impl Fn(usize, SubsetId) -> Supply,
    ) -> Self {
        let n_subsets = table.subsets.len();
        let comp = table.is_comp();
        let n_rows = table.groups.as_ref().map_or(table.users.len(), |g| g.len());
        let mut w_vars = vec![vec![None; n_subsets]; n_rows];
        let mut rows = vec![Vec::new(); n_subsets];
        let mut dropped = vec![false; n_subsets];
        let pools: Vec<Vec<usize>> = if comp {
            vec![(0..n_rows).collect()]
        } else {
            table.transmitter_users()
        };
        for (k, &s) in table.subsets.iter().enumerate() {
            let sup = supply(k, s);
            if let Supply::Fixed(x) = sup {
                if x <= ZERO_SUPPLY {
                    dropped[k] = true;
                    continue;
                }
            }
            for pool in &pools {
                let mut terms: Vec<(usize, f64)> = pool
                    .iter()
                    .map(|&r| {
                        let v = prog.add_var();
                        w_vars[r][k] = Some(v);
                        (v, 1.0)
                    })
                    .collect();
                let rhs = match sup {
                    Supply::Fixed(x) => x,
                    Supply::Var { index, offset } => {
                        terms.push((index, -1.0));
                        offset
                    }
                };
                rows[k].push(prog.add_row(terms, rhs));
            }
        }

        let mut user_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); table.users.len()];
        match &table.groups {
            None => {
                for (u, user) in table.users.iter().enumerate() {
                    for k in 0..n_subsets {
                        if let Some(v) = w_vars[u][k] {
                            user_terms[u].push((v, user.mu[k]));
                        }
                    }
                }
            }
            Some(groups) => {
                for (c, g) in groups.iter().enumerate() {
                    for (m, &u) in g.members.iter().enumerate() {
                        for k in 0..n_subsets {
                            if let Some(v) = w_vars[c][k] {
                                user_terms[u].push((v, g.mu[m][k]));
                            }
                        }
                    }
                }
            }
        }
        let mut user_ids = vec![None; table.users.len()];
        let mut starved = Vec::new();
        for (u, terms) in user_terms.into_iter().enumerate() {
            let live: Vec<(usize, f64)> = terms.into_iter().filter(|&(_, c)| c > 0.0).collect();
            let any_mu = match &table.groups {
                None => table.users[u].mu.iter().any(|&m| m > 0.0),
                Some(groups) => groups
                    .iter()
                    .any(|g| g.members.iter().zip(&g.mu).any(|(&v, row)| v == u && row.iter().any(|&m| m > 0.0))),
            };
            if live.is_empty() {
                if any_mu {
                    starved.push(u);
                }
            } else {
                user_ids[u] = Some(prog.add_user(0.0, live, alpha));
            }
        }
        Self {
            alpha,
            comp,
            user_ids,
            starved,
            w_vars,
            rows,
            dropped,
        }
    }

    pub(crate) fn rates(&self, sol: &ProgramSolution) -> Vec<f64> {
        self.user_ids
            .iter()
            .map(|id| id.map_or(0.0, |i| sol.rates[i]))
            .collect()
    }

    pub(crate) fn value(&self, sol: &ProgramSolution) -> f64 {
        let live: f64 = self
            .user_ids
            .iter()
            .flatten()
            .map(|&i| alpha_fair_value(sol.rates[i], self.alpha))
            .sum();
        let starved = self.starved.len() as f64;
        if starved > 0.0 {
            live + starved * alpha_fair_value(0.0, self.alpha)
        } else {
            live
        }
    }

    pub(crate) fn allocation(&self, table: &SpectralEfficiencyTable, sol: &ProgramSolution) -> AllocationMatrix {
        AllocationMatrix {
            subsets: table.subsets.clone(),
            rows: self
                .w_vars
                .iter()
                .map(|row| row.iter().map(|v| v.map_or(0.0, |j| sol.x[j])).collect())
                .collect(),
        }
    }

    /// `∂g/∂b_S` per subset of the table, from the row multipliers.
    pub(crate) fn gradient(&self, table: &SpectralEfficiencyTable, sol: &ProgramSolution) -> Result<Vec<f64>> {
        if !self.starved.is_empty() && self.alpha > 0.0 {
            return Err(Error::UndefinedGradient(format!(
                "{} users have zero rate",
                self.starved.len()
            )));
        }
        let rates = self.rates(sol);
        let marginal: Vec<f64> = rates
            .iter()
            .zip(&self.user_ids)
            .map(|(&r, id)| {
                if id.is_some() {
                    r.powf(-self.alpha)
                } else {
                    0.0
                }
            })
            .collect();
        let mut grad = vec![0.0; table.subsets.len()];
        for k in 0..table.subsets.len() {
            if !self.dropped[k] {
                grad[k] = self.rows[k].iter().map(|&i| sol.sensitivities[i]).sum();
                continue;
            }
            // No resource on S: the right derivative is the best marginal use of it.
            grad[k] = if self.comp {
                let groups = table.groups.as_ref().expect("cooperative table");
                groups
                    .iter()
                    .map(|g| {
                        g.members
                            .iter()
                            .zip(&g.mu)
                            .map(|(&u, row)| marginal[u] * row[k])
                            .sum::<f64>()
                    })
                    .fold(0.0, f64::max)
            } else {
                table
                    .transmitter_users()
                    .iter()
                    .map(|pool| {
                        pool.iter()
                            .map(|&u| marginal[u] * table.users[u].mu[k])
                            .fold(0.0, f64::max)
                    })
                    .sum()
            };
            if !grad[k].is_finite() {
                return Err(Error::UndefinedGradient(format!(
                    "infinite marginal utility on {}",
                    table.subsets[k]
                )));
            }
        }
        Ok(grad)
    }
}

fn check_pattern(player: usize, b: &AllocationPattern, table: &SpectralEfficiencyTable) -> Result<()> {
    if table.player != player || table.n_players != b.n_players() {
        return Err(Error::invalid(format!(
            "table for player {} of {} does not match player {player} of {}",
            table.player,
            table.n_players,
            b.n_players()
        )));
    }
    if table.subsets.iter().any(|&s| b.get(s) < -ZERO_SUPPLY) {
        return Err(Error::invalid("allocation pattern has negative entries"));
    }
    Ok(())
}

fn solve_fixed(
    player: usize,
    b: &AllocationPattern,
    table: &SpectralEfficiencyTable,
    alpha: f64,
) -> Result<(Block, ProgramSolution)> {
    check_pattern(player, b, table)?;
    let mut prog = ConcaveProgram::new();
    let block = Block::build(&mut prog, table, alpha, |_, s| Supply::Fixed(b.get(s).max(0.0)));
    let sol = prog.solve()?;
    Ok((block, sol))
}

/// Utility under whichever scheduling mode `table` was built for.
pub fn evaluate(
    player: usize,
    b: &AllocationPattern,
    table: &SpectralEfficiencyTable,
    alpha: f64,
) -> Result<UtilityResult> {
    let (block, sol) = solve_fixed(player, b, table, alpha)?;
    Ok(UtilityResult {
        value: block.value(&sol),
        allocation: block.allocation(table, &sol),
        rates: block.rates(&sol),
    })
}

/// Per-transmitter scheduling; cooperative groups in `table`, if any, are ignored.
pub fn evaluate_utility(
    player: usize,
    b: &AllocationPattern,
    table: &SpectralEfficiencyTable,
    alpha: f64,
) -> Result<UtilityResult> {
    if table.is_comp() {
        let plain = SpectralEfficiencyTable {
            groups: None,
            ..table.clone()
        };
        return evaluate(player, b, &plain, alpha);
    }
    evaluate(player, b, table, alpha)
}

/// Cooperative scheduling over the table's user groups.
pub fn evaluate_utility_comp(
    player: usize,
    b: &AllocationPattern,
    table: &SpectralEfficiencyTable,
    alpha: f64,
) -> Result<UtilityResult> {
    if !table.is_comp() {
        return Err(Error::invalid("table has no user groups"));
    }
    evaluate(player, b, table, alpha)
}

/// Supergradient of `g_n` at `b`, dense over all subsets (zero outside `P_n`).
pub fn utility_supergradient(
    player: usize,
    b: &AllocationPattern,
    table: &SpectralEfficiencyTable,
    alpha: f64,
) -> Result<Vec<f64>> {
    let (block, sol) = solve_fixed(player, b, table, alpha)?;
    if !block.value(&sol).is_finite() {
        return Err(Error::UndefinedGradient("utility is unbounded below".into()));
    }
    let local = block.gradient(table, &sol)?;
    let mut dense = vec![0.0; subset_count(b.n_players())];
    for (k, &s) in table.subsets.iter().enumerate() {
        dense[s.index()] = local[k];
    }
    Ok(dense)
}

/// Central differences of `g_n` along each coordinate of `P_n`.
pub fn finite_difference_gradient(
    player: usize,
    b: &AllocationPattern,
    table: &SpectralEfficiencyTable,
    alpha: f64,
    step: f64,
) -> Result<Vec<f64>> {
    let mut dense = vec![0.0; subset_count(b.n_players())];
    for &s in &table.subsets {
        let mut plus = b.clone();
        plus.set(s, b.get(s) + step);
        let mut minus = b.clone();
        minus.set(s, b.get(s) - step);
        let up = evaluate(player, &plus, table, alpha)?.value;
        let down = evaluate(player, &minus, table, alpha)?.value;
        dense[s.index()] = (up - down) / (2.0 * step);
    }
    Ok(dense)
}
