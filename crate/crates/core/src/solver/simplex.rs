//! Dense bounded-variable primal simplex for small linear programs.
//!
//! Problems have the form `max cᵀx  s.t.  Ax = b,  l ≤ x ≤ u` with finite lower bounds.
//! Phase one starts every structural variable at its lower bound and adds one artificial
//! per row. Bland's rule is used throughout, which is slow on large problems but never
//! cycles on the heavily degenerate polytopes produced by bid boxes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Debug, Clone)]
pub struct BoundedLp {
    n: usize,
    c: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// `c_j − A_jᵀy` at the final basis.
    pub reduced_costs: Vec<f64>,
    pub status: Vec<VarStatus>,
}

impl BoundedLp {
    /// `n` variables, all in `[0, +inf)` with zero objective.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            c: vec![0.0; n],
            lo: vec![0.0; n],
            hi: vec![f64::INFINITY; n],
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    pub fn set_objective(&mut self, j: usize, c: f64) {
        self.c[j] = c;
    }

    pub fn objective(&self) -> &[f64] {
        &self.c
    }

    pub fn add_row(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let mut row = vec![0.0; self.n];
        for &(j, a) in terms {
            row[j] += a;
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Largest absolute equality residual of `x`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn maximize(&self) -> Result<LpSolution> {
        Tableau::build(self)?.solve(self)
    }

    pub fn minimize(&self) -> Result<LpSolution> {
        let mut neg = self.clone();
        for c in &mut neg.c {
            *c = -*c;
        }
        let mut sol = neg.maximize()?;
        sol.objective = -sol.objective;
        for d in &mut sol.reduced_costs {
            *d = -*d;
        }
        Ok(sol)
    }
}

struct Tableau {
    m: usize,
    n: usize,
    t: Vec<Vec<f64>>,
    basic: Vec<usize>,
    xb: Vec<f64>,
    x: Vec<f64>,
    status: Vec<VarStatus>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    sign: Vec<f64>,
}

impl Tableau {
    fn build(lp: &BoundedLp) -> Result<Self> {
        let (m, n) = (lp.rows.len(), lp.n);
        for j in 0..n {
            if !lp.lo[j].is_finite() {
                return Err(Error::Solver(format!("variable {j} has no finite lower bound")));
            }
            if lp.lo[j] > lp.hi[j] + 1e-12 {
                return Err(Error::Solver(format!(
                    "variable {j} has empty bounds [{}, {}]",
                    lp.lo[j], lp.hi[j]
                )));
            }
        }
        let nt = n + m;
        let mut t = vec![vec![0.0; nt]; m];
        let mut xb = vec![0.0; m];
        let mut sign = vec![1.0; m];
        for i in 0..m {
            let res = lp.rhs[i]
                - lp.rows[i]
                    .iter()
                    .zip(&lp.lo)
                    .map(|(a, l)| a * l)
                    .sum::<f64>();
            sign[i] = if res >= 0.0 { 1.0 } else { -1.0 };
            for j in 0..n {
                t[i][j] = sign[i] * lp.rows[i][j];
            }
            t[i][n + i] = 1.0;
            xb[i] = res.abs();
        }
        let mut lo = lp.lo.clone();
        let mut hi: Vec<f64> = lp.lo.iter().zip(&lp.hi).map(|(l, h)| h.max(*l)).collect();
        lo.extend(std::iter::repeat_n(0.0, m));
        hi.extend(std::iter::repeat_n(f64::INFINITY, m));
        let mut x = lo.clone();
        let mut status = vec![VarStatus::AtLower; nt];
        for i in 0..m {
            status[n + i] = VarStatus::Basic;
            x[n + i] = xb[i];
        }
        Ok(Self {
            m,
            n,
            t,
            basic: (n..nt).collect(),
            xb,
            x,
            status,
            lo,
            hi,
            sign,
        })
    }

    fn solve(mut self, lp: &BoundedLp) -> Result<LpSolution> {
        let nt = self.n + self.m;
        if self.m > 0 {
            let mut phase1 = vec![0.0; nt];
            for c in &mut phase1[self.n..] {
                *c = -1.0;
            }
            self.iterate(&phase1)?;
            let infeas: f64 = self.basic_values_of_artificials();
            let scale = 1.0 + lp.rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
            if infeas > 1e-9 * scale {
                return Err(Error::Solver(format!(
                    "linear program is infeasible (phase-one residual {infeas:e})"
                )));
            }
            for k in self.n..nt {
                self.hi[k] = 0.0;
                if self.status[k] != VarStatus::Basic {
                    self.x[k] = 0.0;
                    self.status[k] = VarStatus::AtLower;
                }
            }
        }
        let mut phase2 = lp.c.clone();
        phase2.extend(std::iter::repeat_n(0.0, self.m));
        self.iterate(&phase2)?;
        self.finish(lp, &phase2)
    }

    fn basic_values_of_artificials(&self) -> f64 {
        self.basic
            .iter()
            .zip(&self.xb)
            .filter(|(&k, _)| k >= self.n)
            .map(|(_, v)| v.max(0.0))
            .sum()
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut d = cost[j];
        for i in 0..self.m {
            d -= cost[self.basic[i]] * self.t[i][j];
        }
        d
    }

    fn iterate(&mut self, cost: &[f64]) -> Result<()> {
        let nt = self.n + self.m;
        for _ in 0..MAX_PIVOTS {
            let entering = (0..nt).find(|&j| {
                if self.hi[j] - self.lo[j] <= 0.0 {
                    return false;
                }
                match self.status[j] {
                    VarStatus::Basic => false,
                    VarStatus::AtLower => self.reduced_cost(cost, j) > COST_TOL,
                    VarStatus::AtUpper => self.reduced_cost(cost, j) < -COST_TOL,
                }
            });
            let Some(j) = entering else {
                return Ok(());
            };
            let dir = if self.status[j] == VarStatus::AtLower {
                1.0
            } else {
                -1.0
            };

            let mut theta = self.hi[j] - self.lo[j];
            let mut leave: Option<usize> = None;
            for i in 0..self.m {
                let a = self.t[i][j] * dir;
                let k = self.basic[i];
                let lim = if a > PIVOT_TOL {
                    (self.xb[i] - self.lo[k]).max(0.0) / a
                } else if a < -PIVOT_TOL {
                    (self.hi[k] - self.xb[i]).max(0.0) / -a
                } else {
                    continue;
                };
                let better = match leave {
                    _ if lim < theta - 1e-14 => true,
                    Some(r) => lim <= theta + 1e-14 && k < self.basic[r],
                    None => false,
                };
                if better {
                    theta = lim;
                    leave = Some(i);
                }
            }
            if !theta.is_finite() {
                return Err(Error::Solver("linear program is unbounded".into()));
            }

            for i in 0..self.m {
                self.xb[i] -= self.t[i][j] * dir * theta;
            }
            let entering_value = if dir > 0.0 {
                self.lo[j] + theta
            } else {
                self.hi[j] - theta
            };

            match leave {
                None => {
                    self.status[j] = if dir > 0.0 {
                        VarStatus::AtUpper
                    } else {
                        VarStatus::AtLower
                    };
                    self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                }
                Some(r) => {
                    let k = self.basic[r];
                    let decreased = self.t[r][j] * dir > 0.0;
                    if decreased {
                        self.status[k] = VarStatus::AtLower;
                        self.x[k] = self.lo[k];
                    } else {
                        self.status[k] = VarStatus::AtUpper;
                        self.x[k] = self.hi[k];
                    }
                    self.pivot(r, j);
                    self.basic[r] = j;
                    self.status[j] = VarStatus::Basic;
                    self.xb[r] = entering_value;
                }
            }
        }
        Err(Error::Solver("simplex pivot limit reached".into()))
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.t[r][j];
        for v in &mut self.t[r] {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[j];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }

    /// Recompute basic values and duals from the original data for accuracy.
    fn finish(mut self, lp: &BoundedLp, cost: &[f64]) -> Result<LpSolution> {
        let (m, n) = (self.m, self.n);
        for (i, &k) in self.basic.iter().enumerate() {
            self.x[k] = self.xb[i];
        }
        let column = |k: usize, i: usize| -> f64 {
            if k < n {
                lp.rows[i][k]
            } else if k - n == i {
                self.sign[i]
            } else {
                0.0
            }
        };
        let mut reduced = cost[..n].to_vec();
        if m > 0 {
            let basis = DMatrix::from_fn(m, m, |i, c| column(self.basic[c], i));
            let lu = basis.clone().lu();
            let mut rhs = DVector::from_fn(m, |i, _| lp.rhs[i]);
            for k in 0..n + m {
                if self.status[k] != VarStatus::Basic && self.x[k] != 0.0 {
                    for i in 0..m {
                        rhs[i] -= column(k, i) * self.x[k];
                    }
                }
            }
            if let Some(xb) = lu.solve(&rhs) {
                for (i, &k) in self.basic.iter().enumerate() {
                    self.x[k] = xb[i];
                }
            }
            let cb = DVector::from_fn(m, |i, _| cost[self.basic[i]]);
            if let Some(y) = basis.transpose().lu().solve(&cb) {
                for (j, d) in reduced.iter_mut().enumerate() {
                    *d = cost[j] - (0..m).map(|i| lp.rows[i][j] * y[i]).sum::<f64>();
                }
            } else {
                for (j, d) in reduced.iter_mut().enumerate() {
                    *d = self.reduced_cost(cost, j);
                }
            }
        }
        let x: Vec<f64> = (0..n)
            .map(|j| {
                // Clamp basic values onto their bounds when within round-off.
                let v = self.x[j];
                if (v - lp.lo[j]).abs() <= 1e-13 {
                    lp.lo[j]
                } else if (lp.hi[j] - v).abs() <= 1e-13 {
                    lp.hi[j]
                } else {
                    v
                }
            })
            .collect();
        let objective = x.iter().zip(&lp.c).map(|(v, c)| v * c).sum();
        Ok(LpSolution {
            objective,
            x,
            reduced_costs: reduced,
            status: self.status[..n].to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 (slacks s1..s3)
        let mut lp = BoundedLp::new(5);
        lp.set_objective(0, 3.0);
        lp.set_objective(1, 5.0);
        lp.add_row(&[(0, 1.0), (2, 1.0)], 4.0);
        lp.add_row(&[(1, 2.0), (3, 1.0)], 12.0);
        lp.add_row(&[(0, 3.0), (1, 2.0), (4, 1.0)], 18.0);
        let sol = lp.maximize().unwrap();
        assert_abs_diff_eq!(sol.objective, 36.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.x[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.x[1], 6.0, epsilon = 1e-9);
    }

    #[test]
    fn bounded_variables_flip() {
        // max x + y, x + y + s = 3, x ∈ [0,1], y ∈ [0,1]
        let mut lp = BoundedLp::new(3);
        lp.set_bounds(0, 0.0, 1.0);
        lp.set_bounds(1, 0.0, 1.0);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 1.0);
        lp.add_row(&[(0, 1.0), (1, 1.0), (2, 1.0)], 3.0);
        let sol = lp.maximize().unwrap();
        assert_abs_diff_eq!(sol.objective, 2.0, epsilon = 1e-12);
        assert_eq!(sol.status[0], VarStatus::AtUpper);
    }

    #[test]
    fn infeasible_detected() {
        let mut lp = BoundedLp::new(2);
        lp.set_bounds(0, 0.0, 1.0);
        lp.set_bounds(1, 0.0, 1.0);
        lp.add_row(&[(0, 1.0), (1, 1.0)], 3.0);
        assert!(matches!(lp.maximize(), Err(Error::Solver(_))));
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = BoundedLp::new(2);
        lp.set_objective(0, 1.0);
        lp.add_row(&[(0, 1.0), (1, -1.0)], 0.0);
        assert!(lp.maximize().is_err());
    }

    #[test]
    fn minimize_and_duals() {
        // min x + 2y s.t. x + y = 1 → x = 1, reduced cost of y is 1
        let mut lp = BoundedLp::new(2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 2.0);
        lp.add_row(&[(0, 1.0), (1, 1.0)], 1.0);
        let sol = lp.minimize().unwrap();
        assert_abs_diff_eq!(sol.objective, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.reduced_costs[1], 1.0, epsilon = 1e-12);
        assert!(lp.residual(&sol.x) < 1e-12);
    }

    #[test]
    fn negative_rhs_and_fixed_vars() {
        let mut lp = BoundedLp::new(3);
        lp.set_bounds(2, 0.25, 0.25);
        lp.set_objective(0, 1.0);
        lp.add_row(&[(0, -1.0), (1, -1.0), (2, -1.0)], -1.0);
        let sol = lp.maximize().unwrap();
        assert_abs_diff_eq!(sol.x[0], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.x[2], 0.25, epsilon = 1e-15);
    }
}
