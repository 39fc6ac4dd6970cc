//! Two-phase bounded-variable primal simplex on a dense tableau.
//!
//! Pricing is Dantzig's most-negative reduced cost. After a run of
//! degenerate pivots the solver switches to Bland's smallest-index rule,
//! which cannot cycle, and switches back once the objective moves again.

use super::{LinearProgram, LpSolution, LpStatus};
use crate::error::LpError;

const PIVOT_TOL: f64 = 1e-9;
const OPTIMALITY_TOL: f64 = 1e-10;
const FEASIBILITY_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;

/// How an original variable is expressed through standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `v = lower + col`, `col` in `[0, upper - lower]`.
    Shift { col: usize, lower: f64 },
    /// `v = upper - col`, `col` in `[0, upper - lower]`.
    Flip { col: usize, upper: f64 },
    /// `v = pos - neg`.
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Optimal,
    Unbounded,
    ToleranceReached,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `B^-1 A`, row-major.
    body: Vec<f64>,
    /// Values of the basic variables.
    beta: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    at_upper: Vec<bool>,
    /// Enforced upper bound of every column.
    upper: Vec<f64>,
    /// Columns that may not enter the basis.
    blocked: Vec<bool>,
    reduced: Vec<f64>,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau {
    fn value(&self, col: usize) -> f64 {
        if self.at_upper[col] {
            self.upper[col]
        } else {
            0.0
        }
    }

    fn column_values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.cols).map(|j| if self.is_basic[j] { 0.0 } else { self.value(j) }).collect();
        for (r, &b) in self.basis.iter().enumerate() {
            x[b] = self.beta[r];
        }
        x
    }

    fn price(&mut self, costs: &[f64]) {
        self.reduced.copy_from_slice(costs);
        for r in 0..self.rows {
            let cb = costs[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.body[r * self.cols..(r + 1) * self.cols];
            for (d, a) in self.reduced.iter_mut().zip(row) {
                *d -= cb * a;
            }
        }
        for &b in &self.basis {
            self.reduced[b] = 0.0;
        }
    }

    fn objective(&self, costs: &[f64]) -> f64 {
        self.column_values().iter().zip(costs).map(|(x, c)| x * c).sum()
    }

    /// Lower bound on the objective over the feasible set, given the range of
    /// every column. `-inf` when some improving column is unbounded.
    fn lagrangian_bound(&self, current: f64, ranges: &[f64]) -> f64 {
        let mut bound = current;
        for j in 0..self.cols {
            if self.is_basic[j] {
                continue;
            }
            let d = self.reduced[j];
            let slack = if self.at_upper[j] { -d } else { d };
            if slack < 0.0 {
                if ranges[j].is_infinite() {
                    return f64::NEG_INFINITY;
                }
                bound += slack * ranges[j];
            }
        }
        bound
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.cols {
            if self.is_basic[j] || self.blocked[j] {
                continue;
            }
            let d = self.reduced[j];
            let sigma = if !self.at_upper[j] && d < -OPTIMALITY_TOL {
                1.0
            } else if self.at_upper[j] && d > OPTIMALITY_TOL && self.upper[j] > 0.0 {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, sigma));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, sigma));
            }
        }
        best
    }

    /// One simplex step. Returns the step length, or `None` if unbounded.
    fn step(&mut self, entering: usize, sigma: f64, bland: bool) -> Option<f64> {
        let cols = self.cols;
        let mut theta = self.upper[entering];
        let mut leave: Option<(usize, bool)> = None;
        let mut leave_key = (f64::NEG_INFINITY, usize::MAX);
        for r in 0..self.rows {
            let alpha = sigma * self.body[r * cols + entering];
            let (ratio, to_upper) = if alpha > PIVOT_TOL {
                (self.beta[r].max(0.0) / alpha, false)
            } else if alpha < -PIVOT_TOL && self.upper[self.basis[r]].is_finite() {
                let room = (self.upper[self.basis[r]] - self.beta[r]).max(0.0);
                (room / -alpha, true)
            } else {
                continue;
            };
            // among ties prefer large pivots, or the lowest basic index under Bland
            let key = (alpha.abs(), self.basis[r]);
            let take = if ratio < theta - 1e-12 {
                true
            } else if ratio <= theta + 1e-12 && leave.is_some() {
                if bland {
                    key.1 < leave_key.1
                } else {
                    key.0 > leave_key.0
                }
            } else {
                false
            };
            if take {
                theta = theta.min(ratio);
                leave = Some((r, to_upper));
                leave_key = key;
            }
        }
        if theta.is_infinite() {
            return None;
        }
        for r in 0..self.rows {
            let a = self.body[r * cols + entering];
            if a != 0.0 {
                self.beta[r] -= sigma * theta * a;
            }
        }
        match leave {
            None => {
                // bound flip: the entering column crosses its own range
                self.at_upper[entering] = !self.at_upper[entering];
            }
            Some((r, to_upper)) => {
                let entering_value = self.value(entering) + sigma * theta;
                let leaving = self.basis[r];
                self.is_basic[leaving] = false;
                self.at_upper[leaving] = to_upper;
                self.is_basic[entering] = true;
                self.at_upper[entering] = false;
                self.basis[r] = entering;
                self.beta[r] = entering_value;
                self.pivot(r, entering);
            }
        }
        for r in 0..self.rows {
            let ub = self.upper[self.basis[r]];
            let b = &mut self.beta[r];
            if *b < 0.0 && *b > -FEASIBILITY_TOL {
                *b = 0.0;
            } else if *b > ub && *b < ub + FEASIBILITY_TOL {
                *b = ub;
            }
        }
        self.pivots += 1;
        Some(theta)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let piv = self.body[r * cols + q];
        {
            let row = &mut self.body[r * cols..(r + 1) * cols];
            row.iter_mut().for_each(|a| *a /= piv);
            row[q] = 1.0;
        }
        let (before, rest) = self.body.split_at_mut(r * cols);
        let (pivot_row, after) = rest.split_at_mut(cols);
        for row in before.chunks_mut(cols).chain(after.chunks_mut(cols)) {
            let f = row[q];
            if f == 0.0 {
                continue;
            }
            for (a, p) in row.iter_mut().zip(pivot_row.iter()) {
                *a -= f * p;
            }
            row[q] = 0.0;
        }
        let f = self.reduced[q];
        if f != 0.0 {
            for (d, p) in self.reduced.iter_mut().zip(pivot_row.iter()) {
                *d -= f * p;
            }
            self.reduced[q] = 0.0;
        }
    }

    fn run(&mut self, costs: &[f64], tolerance: f64, ranges: Option<&[f64]>) -> Result<Outcome, LpError> {
        self.price(costs);
        let mut degenerate = 0usize;
        loop {
            if tolerance > 0.0 {
                if let Some(ranges) = ranges {
                    let z = self.objective(costs);
                    if z - self.lagrangian_bound(z, ranges) <= tolerance {
                        return Ok(Outcome::ToleranceReached);
                    }
                }
            }
            let bland = degenerate >= DEGENERATE_STREAK;
            let Some((entering, sigma)) = self.choose_entering(bland) else {
                return Ok(Outcome::Optimal);
            };
            if self.pivots >= self.max_pivots {
                return Err(LpError::PivotLimit(self.max_pivots));
            }
            match self.step(entering, sigma, bland) {
                None => return Ok(Outcome::Unbounded),
                Some(theta) if theta <= 1e-12 => degenerate += 1,
                Some(_) => degenerate = 0,
            }
        }
    }
}

/// Solves `lp`. With `tolerance > 0` the solver may stop at a feasible point
/// whose objective is within `tolerance` of the optimum (absolute gap),
/// reported as [`LpStatus::ToleranceReached`].
pub fn solve_lp(lp: &LinearProgram, tolerance: f64) -> Result<LpSolution, LpError> {
    if !(tolerance >= 0.0) {
        return Err(LpError::Malformed(format!("tolerance {tolerance} is negative")));
    }
    let n = lp.num_vars();

    // Map the original variables onto nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut col_upper = Vec::new();
    for (v, &(lo, hi)) in lp.bounds().iter().enumerate() {
        // a variable that mostly loosens the inequalities starts at its upper
        // bound, which keeps the slack basis feasible and phase one short
        let loosening = (0..lp.num_inequalities())
            .map(|k| lp.inequality(k).0[v])
            .sum::<f64>()
            < 0.0;
        let map = if lo.is_finite() && hi.is_finite() && loosening {
            col_upper.push(hi - lo);
            VarMap::Flip { col: col_upper.len() - 1, upper: hi }
        } else if lo.is_finite() {
            col_upper.push(hi - lo);
            VarMap::Shift { col: col_upper.len() - 1, lower: lo }
        } else if hi.is_finite() {
            col_upper.push(f64::INFINITY);
            VarMap::Flip { col: col_upper.len() - 1, upper: hi }
        } else {
            col_upper.push(f64::INFINITY);
            col_upper.push(f64::INFINITY);
            VarMap::Split { pos: col_upper.len() - 2, neg: col_upper.len() - 1 }
        };
        maps.push(map);
    }
    let structural = col_upper.len();

    let transform = |coeffs: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut row = vec![0.0; structural];
        let mut rhs = rhs;
        for (a, map) in coeffs.iter().zip(&maps) {
            if *a == 0.0 {
                continue;
            }
            match *map {
                VarMap::Shift { col, lower } => {
                    row[col] += a;
                    rhs -= a * lower;
                }
                VarMap::Flip { col, upper } => {
                    row[col] -= a;
                    rhs -= a * upper;
                }
                VarMap::Split { pos, neg } => {
                    row[pos] += a;
                    row[neg] -= a;
                }
            }
        }
        (row, rhs)
    };

    let mut costs = vec![0.0; structural];
    let mut constant = 0.0;
    for (c, map) in lp.objective().iter().zip(&maps) {
        match *map {
            VarMap::Shift { col, lower } => {
                costs[col] += c;
                constant += c * lower;
            }
            VarMap::Flip { col, upper } => {
                costs[col] -= c;
                constant += c * upper;
            }
            VarMap::Split { pos, neg } => {
                costs[pos] += c;
                costs[neg] -= c;
            }
        }
    }

    let n_ineq = lp.num_inequalities();
    let n_eq = lp.num_equalities();
    let rows = n_ineq + n_eq;
    let mut transformed = Vec::with_capacity(rows);
    for k in 0..n_ineq {
        let (a, b) = lp.inequality(k);
        transformed.push((transform(a, b), true));
    }
    for k in 0..n_eq {
        let (a, b) = lp.equality(k);
        transformed.push((transform(a, b), false));
    }
    let n_art = transformed
        .iter()
        .filter(|((_, rhs), is_le)| !*is_le || *rhs < 0.0)
        .count();
    let cols = structural + n_ineq + n_art;

    let mut body = vec![0.0; rows * cols];
    let mut beta = vec![0.0; rows];
    let mut basis = vec![0; rows];
    let mut upper = col_upper.clone();
    upper.extend(std::iter::repeat_n(f64::INFINITY, n_ineq + n_art));
    // ranges valid over the whole feasible set, used for the early-stop bound
    let mut ranges = col_upper.clone();
    let mut next_art = structural + n_ineq;
    for (r, ((coeffs, rhs), is_le)) in transformed.iter().enumerate() {
        let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
        let row = &mut body[r * cols..(r + 1) * cols];
        for (dst, a) in row.iter_mut().zip(coeffs) {
            *dst = sign * a;
        }
        beta[r] = sign * rhs;
        if *is_le {
            row[structural + r] = sign;
            let implied = coeffs
                .iter()
                .zip(&col_upper)
                .filter(|(a, _)| **a < 0.0)
                .fold(*rhs, |acc, (a, u)| acc - a * u);
            ranges.push(implied.max(0.0));
        }
        if *is_le && *rhs >= 0.0 {
            basis[r] = structural + r;
        } else {
            row[next_art] = 1.0;
            basis[r] = next_art;
            next_art += 1;
        }
    }
    ranges.extend(std::iter::repeat_n(0.0, n_art));
    let mut is_basic = vec![false; cols];
    for &b in &basis {
        is_basic[b] = true;
    }

    let mut tableau = Tableau {
        rows,
        cols,
        body,
        beta,
        basis,
        is_basic,
        at_upper: vec![false; cols],
        upper,
        blocked: vec![false; cols],
        reduced: vec![0.0; cols],
        pivots: 0,
        max_pivots: 50 * (rows + cols) + 1000,
    };

    let first_art = structural + n_ineq;
    if n_art > 0 {
        let mut phase_one = vec![0.0; cols];
        phase_one[first_art..].iter_mut().for_each(|c| *c = 1.0);
        tableau.run(&phase_one, 0.0, None)?;
        let infeasibility = tableau.objective(&phase_one);
        let scale = 1.0 + tableau.beta.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        if infeasibility > FEASIBILITY_TOL * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: vec![0.0; n],
                objective_value: f64::NAN,
            });
        }
        for j in first_art..cols {
            tableau.upper[j] = 0.0;
            tableau.blocked[j] = true;
        }
        for r in 0..rows {
            if tableau.basis[r] >= first_art {
                tableau.beta[r] = 0.0;
            }
        }
    }

    let mut phase_two = costs;
    phase_two.resize(cols, 0.0);
    let outcome = tableau.run(&phase_two, tolerance, Some(&ranges))?;

    let x = tableau.column_values();
    let values: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, lower } => lower + x[col],
            VarMap::Flip { col, upper } => upper - x[col],
            VarMap::Split { pos, neg } => x[pos] - x[neg],
        })
        .collect();
    let objective_value = if outcome == Outcome::Unbounded {
        f64::NEG_INFINITY
    } else {
        phase_two.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>() + constant
    };
    let status = match outcome {
        Outcome::Optimal => LpStatus::Optimal,
        Outcome::Unbounded => LpStatus::Unbounded,
        Outcome::ToleranceReached => LpStatus::ToleranceReached,
    };
    Ok(LpSolution {
        status,
        values,
        objective_value,
    })
}
