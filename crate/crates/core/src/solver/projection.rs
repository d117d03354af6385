//! Euclidean projection onto the optimal face of a solved [`BoundedLp`].
//!
//! The optimal face is `{x ∈ P : x_j at its bound wherever the reduced cost is non-zero}`.
//! Projection onto it is a small strictly convex QP, solved with a primal active-set method
//! started from the simplex vertex (which is feasible).

use nalgebra::{DMatrix, DVector};

use super::simplex::{BoundedLp, LpSolution, VarStatus};

const REDUCED_COST_TOL: f64 = 1e-9;
const BOUND_TOL: f64 = 1e-12;
const MAX_ACTIVE_SET_STEPS: usize = 500;

#[derive(Debug, Clone)]
pub struct FaceProjection {
    pub x: Vec<f64>,
    /// True when the simplex reported no zero reduced cost on a movable non-basic variable.
    pub unique: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Active {
    Free,
    Lower,
    Upper,
}

/// Closest point to `target` among the optimal solutions of `lp`.
pub fn project_on_optimal_face(lp: &BoundedLp, sol: &LpSolution, target: &[f64]) -> FaceProjection {
    let n = lp.n_vars();
    let movable: Vec<usize> = (0..n)
        .filter(|&j| {
            let (lo, hi) = lp.bounds(j);
            if hi - lo <= BOUND_TOL {
                return false;
            }
            sol.status[j] == VarStatus::Basic || sol.reduced_costs[j].abs() <= REDUCED_COST_TOL
        })
        .collect();
    let degenerate = movable
        .iter()
        .any(|&j| sol.status[j] != VarStatus::Basic);
    if !degenerate {
        return FaceProjection {
            x: sol.x.clone(),
            unique: true,
        };
    }
    FaceProjection {
        x: active_set(lp, &sol.x, &movable, target),
        unique: false,
    }
}

fn active_set(lp: &BoundedLp, start: &[f64], movable: &[usize], target: &[f64]) -> Vec<f64> {
    let m = lp.n_rows();
    let k = movable.len();
    let mut x = start.to_vec();
    let a = DMatrix::from_fn(m, k, |i, c| lp.row(i)[movable[c]]);

    let mut state: Vec<Active> = movable
        .iter()
        .map(|&j| {
            let (lo, hi) = lp.bounds(j);
            if (x[j] - lo).abs() <= BOUND_TOL {
                Active::Lower
            } else if (hi - x[j]).abs() <= BOUND_TOL {
                Active::Upper
            } else {
                Active::Free
            }
        })
        .collect();

    for _ in 0..MAX_ACTIVE_SET_STEPS {
        let free: Vec<usize> = (0..k).filter(|&c| state[c] == Active::Free).collect();
        let g = DVector::from_fn(k, |c, _| x[movable[c]] - target[movable[c]]);

        // Equality-constrained step on the free coordinates: p = −g + Aᵀλ with A p = 0.
        let mut step = DVector::zeros(k);
        if !free.is_empty() {
            let af = DMatrix::from_fn(m, free.len(), |i, c| a[(i, free[c])]);
            let gf = DVector::from_fn(free.len(), |c, _| g[free[c]]);
            let gram = &af * af.transpose();
            let lambda = pseudo_solve(gram, &af * &gf);
            let pf = -&gf + af.transpose() * lambda;
            for (c, &col) in free.iter().enumerate() {
                step[col] = pf[c];
            }
        }

        let scale = 1.0 + x.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if step.amax() <= 1e-14 * scale {
            // Multipliers of the working set from g = Aᵀλ + Σ ν_j e_j.
            let bound_cols: Vec<usize> = (0..k).filter(|&c| state[c] != Active::Free).collect();
            if bound_cols.is_empty() {
                break;
            }
            let mut sys = DMatrix::zeros(k, m + bound_cols.len());
            for c in 0..k {
                for i in 0..m {
                    sys[(c, i)] = a[(i, c)];
                }
            }
            for (q, &c) in bound_cols.iter().enumerate() {
                sys[(c, m + q)] = 1.0;
            }
            let gram = sys.transpose() * &sys;
            let mult = pseudo_solve(gram, sys.transpose() * &g);
            let mut worst: Option<(usize, f64)> = None;
            for (q, &c) in bound_cols.iter().enumerate() {
                let nu = mult[m + q];
                let violation = match state[c] {
                    Active::Lower => -nu,
                    Active::Upper => nu,
                    Active::Free => 0.0,
                };
                if violation > 1e-12 && worst.is_none_or(|(_, v)| violation > v) {
                    worst = Some((c, violation));
                }
            }
            match worst {
                Some((c, _)) => state[c] = Active::Free,
                None => break,
            }
            continue;
        }

        let mut tau = 1.0;
        let mut blocking = None;
        for &c in &free {
            let j = movable[c];
            let (lo, hi) = lp.bounds(j);
            let p = step[c];
            let lim = if p < 0.0 {
                (x[j] - lo).max(0.0) / -p
            } else if p > 0.0 {
                (hi - x[j]).max(0.0) / p
            } else {
                continue;
            };
            if lim < tau {
                tau = lim;
                blocking = Some((c, if p < 0.0 { Active::Lower } else { Active::Upper }));
            }
        }
        for &c in &free {
            x[movable[c]] += tau * step[c];
        }
        if let Some((c, side)) = blocking {
            let (lo, hi) = lp.bounds(movable[c]);
            x[movable[c]] = if side == Active::Lower { lo } else { hi };
            state[c] = side;
        }
    }
    x
}

fn pseudo_solve(gram: DMatrix<f64>, rhs: DVector<f64>) -> DVector<f64> {
    let scale = gram.amax().max(1e-300);
    let svd = gram.svd(true, true);
    svd.solve(&rhs, 1e-12 * scale)
        .unwrap_or_else(|_| DVector::zeros(rhs.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unique_vertex_is_returned() {
        let mut lp = BoundedLp::new(2);
        lp.set_objective(0, 1.0);
        lp.add_row(&[(0, 1.0), (1, 1.0)], 1.0);
        let sol = lp.maximize().unwrap();
        let p = project_on_optimal_face(&lp, &sol, &[0.5, 0.5]);
        assert!(p.unique);
        assert_eq!(p.x, sol.x);
    }

    #[test]
    fn flat_objective_projects_target() {
        // Every point of the segment x + y = 1 is optimal for a zero objective.
        let mut lp = BoundedLp::new(2);
        lp.set_bounds(0, 0.0, 1.0);
        lp.set_bounds(1, 0.0, 1.0);
        lp.add_row(&[(0, 1.0), (1, 1.0)], 1.0);
        let sol = lp.maximize().unwrap();
        let p = project_on_optimal_face(&lp, &sol, &[0.9, 0.3]);
        assert!(!p.unique);
        assert_abs_diff_eq!(p.x[0], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(p.x[1], 0.2, epsilon = 1e-12);
    }

    #[test]
    fn projection_respects_bounds() {
        let mut lp = BoundedLp::new(3);
        for j in 0..3 {
            lp.set_bounds(j, 0.0, 0.5);
        }
        lp.add_row(&[(0, 1.0), (1, 1.0), (2, 1.0)], 1.0);
        let sol = lp.maximize().unwrap();
        let p = project_on_optimal_face(&lp, &sol, &[1.0, 0.0, 0.0]);
        assert_abs_diff_eq!(p.x[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.x[1], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p.x[2], 0.25, epsilon = 1e-12);
    }
}
