//! The resolution rule: joint bids plus the default pattern give the agreed pattern.
//!
//! On the feasible set the ℓ¹ distance to the default is linear with per-subset sign
//! `α_S`, so the rule is a linear program over the intersection of all bid boxes. When
//! some bidders on `S` ask for more than the default and others for less, the boxes meet
//! only at `b0_S`. Note that the −1 case needs every bid strictly *below* the default.

use crate::allocation::{bid_box, is_feasible, AllocationPattern, Bid};
use crate::error::{Error, Result};
use crate::solver::projection::project_on_optimal_face;
use crate::solver::simplex::BoundedLp;
use crate::subset::{nonempty_subsets, subset_count, SubsetId};

/// Bids closer than this to the default count as equal to it.
pub const SNAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignCoefficients {
    alpha: Vec<i8>,
    mixed: Vec<bool>,
}

impl SignCoefficients {
    pub fn alpha(&self, s: SubsetId) -> i8 {
        self.alpha[s.index()]
    }

    /// Bidders on `s` disagree in direction, so `b_s` is pinned to the default.
    pub fn is_mixed(&self, s: SubsetId) -> bool {
        self.mixed[s.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionOutcome {
    pub pattern: AllocationPattern,
    /// `Σ_S |b_S − b0_S|`.
    pub objective: f64,
    /// False when the optimum was not a single vertex and the tie-break chose a point.
    pub unique: bool,
}

/// Bids ordered by player, after checking there is exactly one per player.
fn ordered<'a>(bids: &'a [Bid], b0: &AllocationPattern) -> Result<Vec<&'a Bid>> {
    let n = b0.n_players();
    let mut slots: Vec<Option<&Bid>> = vec![None; n];
    for bid in bids {
        if bid.n_players() != n {
            return Err(Error::invalid(format!(
                "bid of player {} is for {} players, default for {n}",
                bid.player(),
                bid.n_players()
            )));
        }
        let slot = &mut slots[bid.player()];
        if slot.is_some() {
            return Err(Error::invalid(format!("duplicate bid from player {}", bid.player())));
        }
        *slot = Some(bid);
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(p, b)| b.ok_or_else(|| Error::invalid(format!("missing bid from player {p}"))))
        .collect()
}

fn snapped(a: f64, default: f64) -> f64 {
    if (a - default).abs() <= SNAP_TOL {
        default
    } else {
        a
    }
}

pub fn sign_coefficients(bids: &[Bid], b0: &AllocationPattern) -> Result<SignCoefficients> {
    let bids = ordered(bids, b0)?;
    let n = b0.n_players();
    let mut alpha = vec![0i8; subset_count(n)];
    let mut mixed = vec![false; subset_count(n)];
    for s in nonempty_subsets(n) {
        let d = b0.get(s);
        let (mut above, mut below, mut equal) = (0, 0, 0);
        for p in s.members() {
            let a = snapped(bids[p].get(s).expect("bid covers own subsets"), d);
            if a > d {
                above += 1;
            } else if a < d {
                below += 1;
            } else {
                equal += 1;
            }
        }
        let k = s.len();
        if above == k {
            alpha[s.index()] = 1;
        } else if below == k {
            alpha[s.index()] = -1;
        } else if equal != k {
            mixed[s.index()] = true;
        }
    }
    Ok(SignCoefficients { alpha, mixed })
}

/// Intersection of all bid boxes as `(lo, hi)` per subset.
fn box_bounds(bids: &[&Bid], b0: &AllocationPattern) -> Result<Vec<(f64, f64)>> {
    let n = b0.n_players();
    let boxes = bids
        .iter()
        .map(|b| bid_box(b, b0))
        .collect::<Result<Vec<_>>>()?;
    let mut bounds = vec![(0.0, 0.0); subset_count(n)];
    for s in nonempty_subsets(n) {
        let d = b0.get(s);
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for p in s.members() {
            let (l, h) = boxes[p].interval(s).expect("box covers own subsets");
            lo = lo.max(snapped(l, d));
            hi = hi.min(snapped(h, d));
        }
        bounds[s.index()] = (lo, hi);
    }
    Ok(bounds)
}

pub fn resolve(bids: &[Bid], b0: &AllocationPattern) -> Result<ResolutionOutcome> {
    let ordered_bids = ordered(bids, b0)?;
    let signs = sign_coefficients(bids, b0)?;
    let bounds = box_bounds(&ordered_bids, b0)?;
    let n = b0.n_players();
    let vars: Vec<SubsetId> = nonempty_subsets(n).collect();

    let mut lp = BoundedLp::new(vars.len());
    for (j, &s) in vars.iter().enumerate() {
        let (lo, hi) = bounds[s.index()];
        if lo > hi {
            return Err(Error::Internal(format!(
                "bid boxes on {s} do not intersect: [{lo}, {hi}]"
            )));
        }
        if signs.is_mixed(s) {
            lp.set_bounds(j, b0.get(s), b0.get(s));
        } else {
            lp.set_bounds(j, lo, hi);
        }
        lp.set_objective(j, f64::from(signs.alpha(s)));
    }
    let share = 1.0 / n as f64;
    for p in 0..n {
        let row: Vec<(usize, f64)> = vars
            .iter()
            .enumerate()
            .filter(|(_, s)| s.contains(p))
            .map(|(j, s)| (j, 1.0 / s.len() as f64))
            .collect();
        lp.add_row(&row, share);
    }

    let sol = lp.maximize().map_err(|e| match e {
        Error::Solver(msg) if msg.contains("infeasible") => {
            Error::Internal(format!("resolution constraints infeasible: {msg}"))
        }
        other => other,
    })?;
    let target: Vec<f64> = vars.iter().map(|&s| b0.get(s)).collect();
    let face = project_on_optimal_face(&lp, &sol, &target);

    let mut values = vec![0.0; subset_count(n)];
    for (j, &s) in vars.iter().enumerate() {
        let (lo, hi) = lp.bounds(j);
        values[s.index()] = face.x[j].clamp(lo, hi);
    }
    let pattern = AllocationPattern::new(n, values)?;
    if !is_feasible(&pattern, 1e-8) {
        return Err(Error::Internal("resolved pattern violates reciprocity".into()));
    }
    let objective = pattern.l1_distance(b0);
    Ok(ResolutionOutcome {
        pattern,
        objective,
        unique: face.unique,
    })
}
