//! Player bids: greedy best responses over the full strategy space or along one subset.
//!
//! Utility of a bid is `g_n(a) = sup_W h_n(a, W)`, jointly concave in `(a, W)`, so each bid
//! is one concave program over bid and scheduling variables together. A vanishing proximal
//! term toward the default breaks ties between equally good bids.

use crate::allocation::{bid_box, AllocationPattern, Bid};
use crate::error::{Error, Result};
use crate::resolution::{resolve, SNAP_TOL};
use crate::scheduler::{evaluate, Block, SpectralEfficiencyTable, Supply};
use crate::solver::interior::ConcaveProgram;
use crate::solver::simplex::BoundedLp;
use crate::subset::{nonempty_subsets, subsets_containing, SubsetId};

/// Weight of the proximal tie-break term.
const PROX_WEIGHT: f64 = 1e-8;
/// Bid values below this are rounded to zero.
const BID_FLOOR: f64 = 1e-11;
/// Coordinates whose feasible range is narrower than this are fixed before solving.
const FIXED_RANGE: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct StrategyProblem<'a> {
    pub player: usize,
    pub b0: &'a AllocationPattern,
    pub table: &'a SpectralEfficiencyTable,
    pub alpha: f64,
    /// Single multi-player subset along which the bid may move.
    pub restriction: Option<SubsetId>,
}

impl StrategyProblem<'_> {
    fn check(&self) -> Result<()> {
        let n = self.b0.n_players();
        if self.table.player() != self.player || self.table.n_players() != n {
            return Err(Error::invalid("spectral-efficiency table does not match the player"));
        }
        if let Some(s) = self.restriction {
            if s.len() < 2 || !s.contains(self.player) || s.index() >= 1 << n {
                return Err(Error::invalid(format!(
                    "restriction {s} must be a shared subset containing player {}",
                    self.player
                )));
            }
        }
        Ok(())
    }
}

/// Utility of `player` on pattern `b`.
pub fn utility(player: usize, b: &AllocationPattern, table: &SpectralEfficiencyTable, alpha: f64) -> Result<f64> {
    Ok(evaluate(player, b, table, alpha)?.value)
}

/// Rounds tiny values to zero and rescales to exact reciprocity.
fn clean_bid(player: usize, n: usize, subsets: &[SubsetId], raw: &[f64]) -> Result<Bid> {
    let mut vals: Vec<f64> = raw.iter().map(|&v| if v < BID_FLOOR { 0.0 } else { v }).collect();
    let share: f64 = subsets.iter().zip(&vals).map(|(s, v)| v / s.len() as f64).sum();
    if share <= 0.0 {
        return Err(Error::Internal("bid lost all its mass".into()));
    }
    let scale = (1.0 / n as f64) / share;
    vals.iter_mut().for_each(|v| *v *= scale);
    Bid::new(player, n, &vals)
}

/// Best bid over the player's whole strategy space.
pub fn greedy_bid(problem: &StrategyProblem) -> Result<Bid> {
    problem.check()?;
    if problem.restriction.is_some() {
        return restricted_greedy_bid(problem);
    }
    let StrategyProblem {
        player,
        b0,
        table,
        alpha,
        ..
    } = *problem;
    let default = b0.restriction(player);
    if table.is_empty() {
        return Ok(default);
    }
    let n = b0.n_players();
    let subsets = subsets_containing(player, n)?;
    let mut prog = ConcaveProgram::new();
    let vars: Vec<usize> = subsets.iter().map(|_| prog.add_var()).collect();
    prog.add_row(
        subsets
            .iter()
            .zip(&vars)
            .map(|(s, &v)| (v, 1.0 / s.len() as f64))
            .collect(),
        1.0 / n as f64,
    );
    for (s, &v) in subsets.iter().zip(&vars) {
        prog.add_prox(v, PROX_WEIGHT, b0.get(*s));
    }
    let block = Block::build(&mut prog, table, alpha, |k, _| Supply::Var {
        index: vars[k],
        offset: 0.0,
    });
    let sol = prog.solve()?;
    let raw: Vec<f64> = vars.iter().map(|&v| sol.x[v]).collect();
    let bid = clean_bid(player, n, &subsets, &raw)?;
    keep_default_if_no_better(problem, bid, block.value(&sol))
}

/// Returns the default restriction when the optimum does not beat it.
fn keep_default_if_no_better(problem: &StrategyProblem, bid: Bid, optimum: f64) -> Result<Bid> {
    let default = problem.b0.restriction(problem.player);
    let at_default = utility(problem.player, problem.b0, problem.table, problem.alpha)?;
    if at_default.is_finite() && optimum <= at_default + 1e-10 * (1.0 + at_default.abs()) {
        return Ok(default);
    }
    Ok(bid)
}

/// Best bid that differs from the default only on the restriction and the own singleton.
pub fn restricted_greedy_bid(problem: &StrategyProblem) -> Result<Bid> {
    problem.check()?;
    let StrategyProblem {
        player,
        b0,
        table,
        alpha,
        restriction,
    } = *problem;
    let Some(target) = restriction else {
        return Err(Error::invalid("restricted bid needs a restriction subset"));
    };
    let default = b0.restriction(player);
    let n = b0.n_players();
    let own = SubsetId::singleton(player);
    let budget = b0.get(own) + b0.get(target) / target.len() as f64;
    if table.is_empty() || budget <= SNAP_TOL {
        return Ok(default);
    }
    let subsets = subsets_containing(player, n)?;
    let mut prog = ConcaveProgram::new();
    let v_own = prog.add_var();
    let v_target = prog.add_var();
    prog.add_row(
        vec![(v_own, 1.0), (v_target, 1.0 / target.len() as f64)],
        budget,
    );
    prog.add_prox(v_own, PROX_WEIGHT, b0.get(own));
    prog.add_prox(v_target, PROX_WEIGHT, b0.get(target));
    let block = Block::build(&mut prog, table, alpha, |_, s| {
        if s == own {
            Supply::Var {
                index: v_own,
                offset: 0.0,
            }
        } else if s == target {
            Supply::Var {
                index: v_target,
                offset: 0.0,
            }
        } else {
            Supply::Fixed(b0.get(s))
        }
    });
    let sol = prog.solve()?;
    let mut a_target = sol.x[v_target];
    if a_target < BID_FLOOR {
        a_target = 0.0;
    }
    let mut a_own = budget - a_target / target.len() as f64;
    if a_own < BID_FLOOR {
        a_own = 0.0;
        a_target = budget * target.len() as f64;
    }
    let vals: Vec<f64> = subsets
        .iter()
        .map(|&s| {
            if s == own {
                a_own
            } else if s == target {
                a_target
            } else {
                b0.get(s)
            }
        })
        .collect();
    let bid = Bid::new(player, n, &vals)?;
    keep_default_if_no_better(problem, bid, block.value(&sol))
}

/// `g_n(Υ(bids))`, the payoff of `player` under the joint bid profile.
pub fn payoff(
    player: usize,
    bids: &[Bid],
    b0: &AllocationPattern,
    table: &SpectralEfficiencyTable,
    alpha: f64,
) -> Result<f64> {
    let outcome = resolve(bids, b0)?;
    utility(player, &outcome.pattern, table, alpha)
}

/// Largest payoff improvement `player` could obtain by changing only its own bid.
///
/// Whatever the player bids, the outcome stays in the feasible set and in every other player's
/// box; the utility maximum over that region bounds the achievable payoff. Bidding the
/// maximizer itself attains it for the profiles reached by sequential play.
pub fn best_response_gain(
    player: usize,
    bids: &[Bid],
    b0: &AllocationPattern,
    table: &SpectralEfficiencyTable,
    alpha: f64,
) -> Result<f64> {
    let current = payoff(player, bids, b0, table, alpha)?;
    if table.is_empty() {
        return Ok(0.0);
    }
    let n = b0.n_players();
    let vars: Vec<SubsetId> = nonempty_subsets(n).collect();
    let mut lo = vec![0.0; vars.len()];
    let mut hi = vec![f64::INFINITY; vars.len()];
    for bid in bids.iter().filter(|b| b.player() != player) {
        let bx = bid_box(bid, b0)?;
        for (j, &s) in vars.iter().enumerate() {
            if let Some((l, h)) = bx.interval(s) {
                let d = b0.get(s);
                let snap = |v: f64| if (v - d).abs() <= SNAP_TOL { d } else { v };
                lo[j] = f64::max(lo[j], snap(l));
                hi[j] = hi[j].min(snap(h));
            }
        }
    }

    // Tighten every coordinate to its range over the polytope, so that the concave
    // program below has a strictly feasible interior.
    let mut lp = BoundedLp::new(vars.len());
    for j in 0..vars.len() {
        if lo[j] > hi[j] {
            return Err(Error::Internal(format!("opponent boxes empty on {}", vars[j])));
        }
        lp.set_bounds(j, lo[j], hi[j]);
    }
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|p| {
            vars.iter()
                .enumerate()
                .filter(|(_, s)| s.contains(p))
                .map(|(j, s)| (j, 1.0 / s.len() as f64))
                .collect()
        })
        .collect();
    for row in &rows {
        lp.add_row(row, 1.0 / n as f64);
    }
    let mut range = Vec::with_capacity(vars.len());
    for j in 0..vars.len() {
        let mut probe = lp.clone();
        probe.set_objective(j, 1.0);
        let max = probe.maximize()?.x[j];
        let min = probe.minimize()?.x[j];
        range.push((min, max));
    }

    let mut prog = ConcaveProgram::new();
    let mut index = vec![None; vars.len()];
    for j in 0..vars.len() {
        let (min, max) = range[j];
        if max - min > FIXED_RANGE {
            let x = prog.add_var();
            index[j] = Some(x);
            if max.is_finite() {
                let slack = prog.add_var();
                prog.add_row(vec![(x, 1.0), (slack, 1.0)], max - min);
            }
        }
    }
    for row in &rows {
        let mut terms = Vec::new();
        let mut rhs = 1.0 / n as f64;
        for &(j, c) in row {
            rhs -= c * range[j].0;
            if let Some(x) = index[j] {
                terms.push((x, c));
            }
        }
        if !terms.is_empty() {
            prog.add_row(terms, rhs);
        }
    }
    let block = Block::build(&mut prog, table, alpha, |_, s| {
        let j = s.index() - 1;
        match index[j] {
            Some(x) => Supply::Var {
                index: x,
                offset: range[j].0,
            },
            None => Supply::Fixed(range[j].0),
        }
    });
    let sol = prog.solve()?;
    Ok(block.value(&sol) - current)
}
