//! Dense bounded-variable primal simplex for small linear programs.
//!
//! Solves `maximize c·x` subject to `A x = b` and `l <= x <= u` (upper
//! bounds may be infinite, lower bounds must be finite). Two phases: phase 1
//! drives artificial variables to zero, phase 2 optimizes the real
//! objective over the feasible basis. The tableau is kept dense, which is
//! the right trade-off for the few-hundred-row instances produced by the
//! finite-horizon baseline.
//!
//! Pivoting uses Dantzig's rule and falls back to Bland's rule after a run
//! of degenerate steps, so the method terminates; an iteration cap turns
//! pathological numerics into an explicit error instead of a hang.

use crate::{Error, Result};

/// `maximize objective·x` subject to `constraints·x = rhs`,
/// `lower <= x <= upper`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

const COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-11;
const DEGENERATE_STREAK_LIMIT: usize = 64;

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let m = lp.constraints.len();
    let n = lp.objective.len();
    if lp.rhs.len() != m
        || lp.lower.len() != n
        || lp.upper.len() != n
        || lp.constraints.iter().any(|row| row.len() != n)
    {
        return Err(Error::InvalidParameter(
            "linear program dimensions disagree".into(),
        ));
    }
    for j in 0..n {
        if !lp.lower[j].is_finite() {
            return Err(Error::InvalidParameter(format!(
                "variable {j} needs a finite lower bound"
            )));
        }
        if lp.upper[j] < lp.lower[j] {
            return Ok(LpOutcome::Infeasible);
        }
    }
    if m == 0 {
        // Just push every variable to whichever bound the objective likes.
        let mut x = vec![0.0; n];
        for (j, x_j) in x.iter_mut().enumerate() {
            *x_j = if lp.objective[j] > 0.0 {
                if lp.upper[j].is_infinite() {
                    return Ok(LpOutcome::Unbounded);
                }
                lp.upper[j]
            } else {
                lp.lower[j]
            };
        }
        let objective = dot(&lp.objective, &x);
        return Ok(LpOutcome::Optimal(LpSolution { x, objective }));
    }

    let mut t = Tableau::new(lp);
    match t.run_phase(Phase::One)? {
        StopReason::Optimal => {}
        StopReason::Unbounded => {
            // Phase 1 minimizes a sum of non-negative variables and cannot
            // be unbounded; treat as numerical trouble.
            return Err(Error::SolverStalled(t.iterations));
        }
    }
    if !t.artificials_cleared() {
        return Ok(LpOutcome::Infeasible);
    }
    t.enter_phase_two(&lp.objective);
    match t.run_phase(Phase::Two)? {
        StopReason::Optimal => {}
        StopReason::Unbounded => return Ok(LpOutcome::Unbounded),
    }

    let x = t.extract(n);
    let objective = dot(&lp.objective, &x);
    Ok(LpOutcome::Optimal(LpSolution { x, objective }))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, PartialEq)]
enum Phase {
    One,
    Two,
}

enum StopReason {
    Optimal,
    Unbounded,
}

struct Tableau {
    m: usize,
    /// Structural columns; artificials live at n..n+m.
    n: usize,
    /// Row-major m x (n + m): current B^-1 [A | S].
    tab: Vec<f64>,
    /// Values of the basic variables, one per row.
    basic_val: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    at_upper: Vec<bool>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    feas_tol: f64,
    phase: Phase,
    iterations: usize,
    degenerate_streak: usize,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let n = lp.objective.len();
        let width = n + m;
        let mut tab = vec![0.0; m * width];
        let mut rhs = lp.rhs.clone();

        // Row equilibration keeps the pivot magnitudes comparable across
        // constraints of very different physical scale.
        for i in 0..m {
            let scale = lp.constraints[i]
                .iter()
                .fold(0.0f64, |acc, &v| acc.max(v.abs()));
            let inv = if scale > 0.0 { 1.0 / scale } else { 1.0 };
            for j in 0..n {
                tab[i * width + j] = lp.constraints[i][j] * inv;
            }
            rhs[i] *= inv;
        }

        // Nonbasic structurals start at their lower bound; artificials
        // absorb the residual so the initial basis is feasible. Rows with a
        // negative residual are negated (an equivalent system), keeping the
        // starting basis the identity.
        let mut residual = rhs;
        for (i, r) in residual.iter_mut().enumerate() {
            for j in 0..n {
                *r -= tab[i * width + j] * lp.lower[j];
            }
        }

        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut cost = vec![0.0; width];
        let mut basis = Vec::with_capacity(m);
        let mut basic_val = Vec::with_capacity(m);
        let mut row_of = vec![None; width];
        for i in 0..m {
            if residual[i] < 0.0 {
                for j in 0..n {
                    tab[i * width + j] = -tab[i * width + j];
                }
            }
            tab[i * width + n + i] = 1.0;
            lower.push(0.0);
            upper.push(f64::INFINITY);
            cost[n + i] = -1.0;
            basis.push(n + i);
            basic_val.push(residual[i].abs());
            row_of[n + i] = Some(i);
        }

        let feas_tol = 1e-9 * (1.0 + basic_val.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())));

        Self {
            m,
            n,
            tab,
            basic_val,
            basis,
            row_of,
            at_upper: vec![false; width],
            lower,
            upper,
            cost,
            feas_tol,
            phase: Phase::One,
            iterations: 0,
            degenerate_streak: 0,
        }
    }

    fn width(&self) -> usize {
        self.n + self.m
    }

    fn artificials_cleared(&self) -> bool {
        let infeasibility: f64 = (0..self.m)
            .filter(|&i| self.basis[i] >= self.n)
            .map(|i| self.basic_val[i].abs())
            .sum();
        infeasibility <= self.feas_tol
    }

    fn enter_phase_two(&mut self, objective: &[f64]) {
        self.phase = Phase::Two;
        self.degenerate_streak = 0;
        self.cost[..self.n].copy_from_slice(objective);
        // Pin artificials to zero; basic ones may linger at value ~0 in
        // redundant rows, which is harmless.
        for a in self.n..self.width() {
            self.cost[a] = 0.0;
            self.upper[a] = 0.0;
            if let Some(row) = self.row_of[a] {
                self.basic_val[row] = 0.0;
            }
        }
    }

    fn run_phase(&mut self, phase: Phase) -> Result<StopReason> {
        debug_assert!(matches!(
            (phase, self.phase),
            (Phase::One, Phase::One) | (Phase::Two, Phase::Two)
        ));
        let width = self.width();
        let max_iterations = 10_000 + 20 * width;
        loop {
            self.iterations += 1;
            if self.iterations > max_iterations {
                return Err(Error::SolverStalled(self.iterations));
            }

            // Price every nonbasic column: d_j = c_j - c_B · tab[:, j].
            let cb: Vec<f64> = self.basis.iter().map(|&v| self.cost[v]).collect();
            let any_basic_cost = cb.iter().any(|&c| c != 0.0);
            let use_bland = self.degenerate_streak > DEGENERATE_STREAK_LIMIT;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..width {
                if self.row_of[j].is_some() || self.lower[j] == self.upper[j] {
                    continue;
                }
                if self.phase == Phase::Two && j >= self.n {
                    continue;
                }
                let mut d = self.cost[j];
                if any_basic_cost {
                    for (i, &c) in cb.iter().enumerate() {
                        if c != 0.0 {
                            d -= c * self.tab[i * width + j];
                        }
                    }
                }
                let improving = if self.at_upper[j] { -d } else { d };
                if improving > COST_TOL {
                    if use_bland {
                        entering = Some((j, improving));
                        break;
                    }
                    if entering.is_none_or(|(_, best)| improving > best) {
                        entering = Some((j, improving));
                    }
                }
            }
            let Some((e, _)) = entering else {
                return Ok(StopReason::Optimal);
            };

            // Direction: +1 when rising off the lower bound, -1 when
            // descending from the upper.
            let dir = if self.at_upper[e] { -1.0 } else { 1.0 };

            // Ratio test: largest step t >= 0 keeping every basic variable
            // inside its bounds, capped by the entering variable's own
            // range (a bound flip).
            let own_range = self.upper[e] - self.lower[e];
            let mut t_best = own_range;
            let mut leaving: Option<(usize, bool)> = None; // (row, leaves_at_upper)
            for i in 0..self.m {
                let rate = -dir * self.tab[i * width + e];
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                let v = self.basis[i];
                let (t_i, hits_upper) = if rate < 0.0 {
                    ((self.basic_val[i] - self.lower[v]).max(0.0) / -rate, false)
                } else {
                    if self.upper[v].is_infinite() {
                        continue;
                    }
                    ((self.upper[v] - self.basic_val[i]).max(0.0) / rate, true)
                };
                let better = match leaving {
                    None => t_i < t_best,
                    Some((best_row, _)) => {
                        let best_col = self.tab[best_row * width + e].abs();
                        let this_col = self.tab[i * width + e].abs();
                        if use_bland {
                            t_i < t_best || (t_i == t_best && self.basis[i] < self.basis[best_row])
                        } else {
                            // Prefer the numerically larger pivot on ties.
                            t_i < t_best || (t_i == t_best && this_col > best_col)
                        }
                    }
                };
                if better {
                    t_best = t_i;
                    leaving = Some((i, hits_upper));
                }
            }

            if t_best.is_infinite() {
                return Ok(StopReason::Unbounded);
            }
            let t = t_best.max(0.0);
            self.degenerate_streak = if t <= DEGENERATE_STEP {
                self.degenerate_streak + 1
            } else {
                0
            };

            // Move the current point along the edge.
            for i in 0..self.m {
                let rate = -dir * self.tab[i * width + e];
                self.basic_val[i] += rate * t;
            }

            match leaving {
                None => {
                    // The entering variable ran into its own opposite
                    // bound: flip it, no basis change.
                    self.at_upper[e] = !self.at_upper[e];
                }
                Some((r, leaves_at_upper)) => {
                    let out = self.basis[r];
                    self.row_of[out] = None;
                    self.at_upper[out] = leaves_at_upper;

                    let entering_value = if dir > 0.0 {
                        self.lower[e] + t
                    } else {
                        self.upper[e] - t
                    };
                    self.basis[r] = e;
                    self.row_of[e] = Some(r);
                    self.basic_val[r] = entering_value;

                    // Gauss-Jordan step on the entering column.
                    let piv = self.tab[r * width + e];
                    if piv.abs() <= PIVOT_TOL {
                        return Err(Error::SolverStalled(self.iterations));
                    }
                    let inv = 1.0 / piv;
                    for j in 0..width {
                        self.tab[r * width + j] *= inv;
                    }
                    for i in 0..self.m {
                        if i == r {
                            continue;
                        }
                        let f = self.tab[i * width + e];
                        if f != 0.0 {
                            for j in 0..width {
                                self.tab[i * width + j] -= f * self.tab[r * width + j];
                            }
                        }
                    }
                }
            }
        }
    }

    fn extract(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (j, x_j) in x.iter_mut().enumerate() {
            *x_j = match self.row_of[j] {
                Some(row) => self.basic_val[row],
                None => {
                    if self.at_upper[j] {
                        self.upper[j]
                    } else {
                        self.lower[j]
                    }
                }
            };
        }
        x
    }
}
