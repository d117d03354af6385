//! Primal-dual interior-point method for separable α-fair programs.
//!
//! Solves
//!
//! ```text
//! maximize   Σ_u f_{α_u}(r_u) − ½ Σ_j ρ_j (x_j − t_j)²
//! subject to r_u = o_u + Σ_j M_uj x_j,   A x = c,   x ≥ 0
//! ```
//!
//! with `M ≥ 0`. The Newton system is reduced with the Woodbury identity so that the
//! only dense factorizations are `U×U` (users) and `p×p` (equality rows); the number of
//! variables may be large (cooperative user groups).

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const STEP_FRACTION: f64 = 0.995;

/// One user's rate as an affine function of the variables.
#[derive(Debug, Clone)]
pub struct RateTerm {
    pub offset: f64,
    pub terms: Vec<(usize, f64)>,
    pub alpha: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ConcaveProgram {
    n: usize,
    rows: Vec<(Vec<(usize, f64)>, f64)>,
    users: Vec<RateTerm>,
    prox: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ProgramSolution {
    pub x: Vec<f64>,
    /// `∂(optimal value)/∂c_i` for every equality row.
    pub sensitivities: Vec<f64>,
    /// Rates of the users in insertion order (excluded users report their offset).
    pub rates: Vec<f64>,
    /// `Σ_u f(r_u)` over included users, without the proximal term.
    pub value: f64,
    pub iterations: usize,
    pub gap: f64,
    /// Largest row violation, relative to the supply on single-supply rows.
    pub primal_residual: f64,
}

impl ConcaveProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self) -> usize {
        self.n += 1;
        self.n - 1
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds `Σ coef·x = rhs` and returns its row index.
    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, rhs: f64) -> usize {
        self.rows.push((terms, rhs));
        self.rows.len() - 1
    }

    /// Adds a user; terms with zero coefficient are dropped. Returns the user index.
    pub fn add_user(&mut self, offset: f64, terms: Vec<(usize, f64)>, alpha: f64) -> usize {
        let terms = terms.into_iter().filter(|&(_, c)| c > 0.0).collect();
        self.users.push(RateTerm {
            offset,
            terms,
            alpha,
        });
        self.users.len() - 1
    }

    /// Adds `−½ weight (x_j − target)²` to the objective.
    pub fn add_prox(&mut self, var: usize, weight: f64, target: f64) {
        self.prox.push((var, weight, target));
    }

    pub fn solve(&self) -> Result<ProgramSolution> {
        for u in &self.users {
            if u.offset < 0.0 || u.alpha < 0.0 || u.terms.iter().any(|&(_, c)| c < 0.0) {
                return Err(Error::invalid("rate terms must be non-negative"));
            }
        }
        let included: Vec<&RateTerm> = self
            .users
            .iter()
            .filter(|u| !u.terms.is_empty() || u.offset > 0.0)
            .collect();
        let sol = if self.n == 0 {
            Dense {
                x: DVector::zeros(0),
                y: DVector::zeros(self.rows.len()),
                iterations: 0,
                gap: 0.0,
                primal_residual: self.rows.iter().fold(0.0, |a, (_, c)| a.max(c.abs())),
            }
        } else {
            // Normalized supplies suit most programs; a few with users pressed against the
            // boundary only converge in the original units.
            Solver::new(self, &included, true)
                .run()
                .or_else(|_| Solver::new(self, &included, false).run())?
        };
        let rates: Vec<f64> = self
            .users
            .iter()
            .map(|u| u.offset + u.terms.iter().map(|&(j, c)| c * sol.x[j]).sum::<f64>())
            .collect();
        let value = self
            .users
            .iter()
            .zip(&rates)
            .filter(|(u, _)| !u.terms.is_empty() || u.offset > 0.0)
            .map(|(u, &r)| alpha_fair(r, u.alpha))
            .sum();
        Ok(ProgramSolution {
            x: sol.x.iter().copied().collect(),
            sensitivities: sol.y.iter().map(|v| -v).collect(),
            rates,
            value,
            iterations: sol.iterations,
            gap: sol.gap,
            primal_residual: sol.primal_residual,
        })
    }
}

/// `ln r` for `α = 1`, `r^{1−α}/(1−α)` otherwise; `−∞` when `r = 0` and `α ≥ 1`.
pub fn alpha_fair(rate: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        if rate <= 0.0 {
            f64::NEG_INFINITY
        } else {
            rate.ln()
        }
    } else if rate <= 0.0 && alpha > 1.0 {
        f64::NEG_INFINITY
    } else {
        rate.max(0.0).powf(1.0 - alpha) / (1.0 - alpha)
    }
}

fn derivatives(rate: f64, alpha: f64) -> (f64, f64) {
    if alpha == 0.0 {
        (1.0, 0.0)
    } else if alpha == 1.0 {
        (1.0 / rate, 1.0 / (rate * rate))
    } else {
        let d1 = rate.powf(-alpha);
        (d1, alpha * d1 / rate)
    }
}

struct Dense {
    x: DVector<f64>,
    y: DVector<f64>,
    iterations: usize,
    gap: f64,
    primal_residual: f64,
}

struct Solver {
    m: usize,
    n_rows: usize,
    /// Rows kept after dropping linearly dependent ones; dropped rows get zero multipliers.
    kept: Vec<usize>,
    a: DMatrix<f64>,
    c: DVector<f64>,
    rates: DMatrix<f64>,
    offset: DVector<f64>,
    alpha: Vec<f64>,
    rho: DVector<f64>,
    target: DVector<f64>,
    /// The solver works in `x̃ = x / scale` so that supplies of very different sizes are
    /// equally well resolved.
    scale: DVector<f64>,
    /// Confined rows are divided by their supply; multipliers are mapped back on output.
    row_scale: DVector<f64>,
}

struct Point {
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
}

struct Residuals {
    rp: DVector<f64>,
    rd: DVector<f64>,
    grad: DVector<f64>,
    hess: DVector<f64>,
    objective: f64,
}

impl Solver {
    fn new(p: &ConcaveProgram, users: &[&RateTerm], normalize: bool) -> Self {
        let m = p.n;
        let mut full = DMatrix::zeros(p.rows.len(), m);
        for (i, (terms, _)) in p.rows.iter().enumerate() {
            for &(j, v) in terms {
                full[(i, j)] += v;
            }
        }
        let kept = independent_rows(&full);
        let a = full.select_rows(kept.iter());
        let c = DVector::from_iterator(kept.len(), kept.iter().map(|&i| p.rows[i].1));
        let mut rates = DMatrix::zeros(users.len(), m);
        let mut offset = DVector::zeros(users.len());
        for (u, term) in users.iter().enumerate() {
            for &(j, v) in &term.terms {
                rates[(u, j)] += v;
            }
            offset[u] = term.offset;
        }
        let mut rho = DVector::zeros(m);
        let mut target = DVector::zeros(m);
        for &(j, w, t) in &p.prox {
            // Several proximal terms on one variable combine into one.
            let total = rho[j] + w;
            if total > 0.0 {
                target[j] = (rho[j] * target[j] + w * t) / total;
            }
            rho[j] = total;
        }
        // Only variables confined to one fixed, positive supply row are rescaled; variables
        // shared between rows keep their natural scale.
        let mut rows_of = vec![0usize; m];
        for (terms, _) in &p.rows {
            for &(j, _) in terms {
                rows_of[j] += 1;
            }
        }
        let mut scale = DVector::from_element(m, 1.0);
        let mut row_scale = DVector::from_element(kept.len(), 1.0);
        for (k, &i) in kept.iter().enumerate() {
            let (terms, rhs) = &p.rows[i];
            let coef = terms.iter().map(|&(_, v)| v).fold(0.0, f64::max);
            if normalize && *rhs > 0.0 && terms.iter().all(|&(j, v)| v > 0.0 && rows_of[j] == 1) {
                for &(j, _) in terms {
                    scale[j] = rhs / coef;
                }
                row_scale[k] = *rhs;
            }
        }
        let mut a = a;
        let mut c = c;
        let mut rates = rates;
        for k in 0..kept.len() {
            a.row_mut(k).unscale_mut(row_scale[k]);
            c[k] /= row_scale[k];
        }
        for j in 0..m {
            a.column_mut(j).scale_mut(scale[j]);
            rates.column_mut(j).scale_mut(scale[j]);
            rho[j] *= scale[j] * scale[j];
            target[j] /= scale[j];
        }
        Self {
            m,
            n_rows: p.rows.len(),
            kept,
            a,
            c,
            rates,
            offset,
            alpha: users.iter().map(|u| u.alpha).collect(),
            rho,
            target,
            scale,
            row_scale,
        }
    }

    fn residuals(&self, pt: &Point) -> Residuals {
        let r = &self.offset + &self.rates * &pt.x;
        let mut fp = DVector::zeros(r.len());
        let mut hess = DVector::zeros(r.len());
        let mut objective = 0.0;
        for u in 0..r.len() {
            let (d1, d2) = derivatives(r[u], self.alpha[u]);
            fp[u] = d1;
            hess[u] = d2;
            objective -= alpha_fair(r[u], self.alpha[u]);
        }
        let dx = &pt.x - &self.target;
        objective += 0.5 * self.rho.component_mul(&dx).dot(&dx);
        let grad = -(self.rates.transpose() * fp) + self.rho.component_mul(&dx);
        let rd = &grad - self.a.transpose() * &pt.y - &pt.z;
        let rp = &self.a * &pt.x - &self.c;
        Residuals {
            rp,
            rd,
            grad,
            hess,
            objective,
        }
    }

    fn initial_point(&self) -> Point {
        let m = self.m;
        let p = self.a.nrows();
        let mut x = if p > 0 {
            let gram = &self.a * self.a.transpose();
            let lam = gram
                .svd(true, true)
                .solve(&self.c, 1e-14)
                .unwrap_or_else(|_| DVector::zeros(p));
            self.a.transpose() * lam
        } else {
            DVector::from_element(m, 1.0)
        };
        // Shift each coordinate in proportion to its own size so that tiny supplies are
        // not swamped by the largest one.
        let scale = x.amax().max(1e-3);
        for v in x.iter_mut() {
            *v = v.max(0.0) + 0.1 * v.abs().max(1e-3 * scale);
        }
        let probe = Point {
            x: x.clone(),
            y: DVector::zeros(p),
            z: DVector::zeros(m),
        };
        let res = self.residuals(&probe);
        let zscale = res.grad.amax().max(1e-2);
        let z = DVector::from_element(m, zscale);
        Point {
            x,
            y: DVector::zeros(p),
            z,
        }
    }

    fn run(&self) -> Result<Dense> {
        let m = self.m;
        let mut pt = self.initial_point();
        let c_scale = 1.0 + self.c.amax();
        let mut best: Option<(f64, Point)> = None;
        let mut stall = 0;
        let mut iterations = 0;

        for it in 0..MAX_ITERATIONS {
            iterations = it + 1;
            let res = self.residuals(&pt);
            let mu = pt.x.dot(&pt.z) / m as f64;
            let p_err = res.rp.amax() / c_scale;
            let d_err = res.rd.amax() / (1.0 + res.grad.amax());
            let gap_err = m as f64 * mu / (1.0 + res.objective.abs());
            let score = p_err.max(d_err).max(gap_err);
            if !score.is_finite() {
                break;
            }
            match &best {
                Some((s, _)) if *s <= score => stall += 1,
                _ => {
                    if best.as_ref().is_some_and(|(s, _)| score < 0.5 * s) {
                        stall = 0;
                    }
                    best = Some((
                        score,
                        Point {
                            x: pt.x.clone(),
                            y: pt.y.clone(),
                            z: pt.z.clone(),
                        },
                    ));
                }
            }
            if p_err <= 1e-13 && d_err <= 1e-12 && gap_err <= 1e-15 {
                break;
            }
            if stall >= 8 {
                break;
            }

            let Some(newton) = NewtonSystem::factor(self, &pt, &res) else {
                break;
            };
            let xz = pt.x.component_mul(&pt.z);
            let aff = newton.solve(self, &pt, &res, &xz);
            let a_aff = max_step(&pt.x, &aff.0).min(max_step(&pt.z, &aff.2)).min(1.0);
            let mu_aff = (&pt.x + a_aff * &aff.0).dot(&(&pt.z + a_aff * &aff.2)) / m as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
            let rc = &xz + aff.0.component_mul(&aff.2) - DVector::from_element(m, sigma * mu);
            let (dx, dy, dz) = newton.solve(self, &pt, &res, &rc);
            if !(dx.iter().chain(dy.iter()).chain(dz.iter()).all(|v| v.is_finite())) {
                break;
            }

            let alpha_max = max_step(&pt.x, &dx).min(max_step(&pt.z, &dz));
            let mut step = (STEP_FRACTION * alpha_max).min(1.0);
            let merit = |r: &Residuals, p: &Point| {
                r.rp.norm_squared() + r.rd.norm_squared() + p.x.dot(&p.z).powi(2)
            };
            let current = merit(&res, &pt);
            let mut trial = Point {
                x: &pt.x + step * &dx,
                y: &pt.y + step * &dy,
                z: &pt.z + step * &dz,
            };
            let mut accepted = false;
            for _ in 0..30 {
                let tr = self.residuals(&trial);
                let value = merit(&tr, &trial);
                if value.is_finite() && value <= current * (1.0 + 1e-9) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
                trial = Point {
                    x: &pt.x + step * &dx,
                    y: &pt.y + step * &dy,
                    z: &pt.z + step * &dz,
                };
            }
            if !accepted {
                break;
            }
            pt = trial;
        }

        let (_, pt) = best.ok_or_else(|| Error::Solver("interior point produced no iterate".into()))?;
        let res = self.residuals(&pt);
        let primal_residual = res.rp.amax();
        if !res.objective.is_finite() || primal_residual > 1e-6 * c_scale {
            return Err(Error::Solver(format!(
                "interior point failed to converge (primal residual {primal_residual:e})"
            )));
        }
        let mut y = DVector::zeros(self.n_rows);
        for (k, &i) in self.kept.iter().enumerate() {
            y[i] = pt.y[k] / self.row_scale[k];
        }
        Ok(Dense {
            gap: pt.x.dot(&pt.z),
            x: pt.x.component_mul(&self.scale),
            y,
            iterations,
            primal_residual,
        })
    }
}

/// Greedy Gram-Schmidt selection of a maximal set of independent rows.
fn independent_rows(a: &DMatrix<f64>) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept = Vec::new();
    for i in 0..a.nrows() {
        let row = a.row(i).transpose();
        let norm = row.norm();
        if norm == 0.0 {
            continue;
        }
        let mut r = row;
        for _ in 0..2 {
            for q in &basis {
                let d = q.dot(&r);
                r -= d * q;
            }
        }
        let rn = r.norm();
        if rn > 1e-9 * norm {
            basis.push(r / rn);
            kept.push(i);
        }
    }
    kept
}

fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

/// Factorized reduced Newton system for one iterate.
struct NewtonSystem {
    dinv: DVector<f64>,
    b: DMatrix<f64>,
    k_chol: Cholesky<f64, Dyn>,
    s_chol: Option<Cholesky<f64, Dyn>>,
}

impl NewtonSystem {
    fn factor(s: &Solver, pt: &Point, res: &Residuals) -> Option<Self> {
        let d = pt.x.zip_map(&pt.z, |x, z| z / x) + &s.rho;
        let dinv = d.map(|v| 1.0 / v);
        let sqrt_h = res.hess.map(|h| h.max(0.0).sqrt());
        let mut b = s.rates.clone();
        for (u, mut row) in b.row_iter_mut().enumerate() {
            row *= sqrt_h[u];
        }
        let u = b.nrows();
        let mut bd = b.clone();
        for (j, mut col) in bd.column_iter_mut().enumerate() {
            col *= dinv[j];
        }
        let k = DMatrix::identity(u, u) + &bd * b.transpose();
        let k_chol = k.cholesky()?;
        let mut sys = Self {
            dinv,
            b,
            k_chol,
            s_chol: None,
        };
        let p = s.a.nrows();
        if p > 0 {
            let g = sys.q_inv_mat(&s.a.transpose());
            let mut schur = &s.a * g;
            schur = 0.5 * (&schur + schur.transpose());
            let scale = schur.diagonal().amax().max(1e-300);
            let mut reg = 0.0;
            loop {
                let mut trial = schur.clone();
                for i in 0..p {
                    trial[(i, i)] += reg;
                }
                if let Some(ch) = trial.cholesky() {
                    sys.s_chol = Some(ch);
                    break;
                }
                reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
                if reg > 1e-4 * scale {
                    return None;
                }
            }
        }
        Some(sys)
    }

    fn q_inv(&self, v: &DVector<f64>) -> DVector<f64> {
        let dv = v.component_mul(&self.dinv);
        let inner = self.k_chol.solve(&(&self.b * &dv));
        let corr = (self.b.transpose() * inner).component_mul(&self.dinv);
        dv - corr
    }

    fn q_inv_mat(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        let mut dv = v.clone();
        for (j, mut row) in dv.row_iter_mut().enumerate() {
            row *= self.dinv[j];
        }
        let inner = self.k_chol.solve(&(&self.b * &dv));
        let mut corr = self.b.transpose() * inner;
        for (j, mut row) in corr.row_iter_mut().enumerate() {
            row *= self.dinv[j];
        }
        dv - corr
    }

    /// Solves for `(Δx, Δy, Δz)` given the complementarity residual `rc`.
    fn solve(
        &self,
        s: &Solver,
        pt: &Point,
        res: &Residuals,
        rc: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let rhs_x = -&res.rd - rc.component_div(&pt.x);
        let qr = self.q_inv(&rhs_x);
        let dy = match &self.s_chol {
            Some(ch) => ch.solve(&(-&res.rp - &s.a * &qr)),
            None => DVector::zeros(0),
        };
        let dx = if dy.is_empty() {
            qr
        } else {
            self.q_inv(&(rhs_x + s.a.transpose() * &dy))
        };
        let dz = (-rc - pt.z.component_mul(&dx)).component_div(&pt.x);
        (dx, dy, dz)
    }
}
