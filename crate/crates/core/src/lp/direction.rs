//! The direction LPs.
//!
//! Given restricted row and column sets `I` and `J`, the steepest direction
//! `(x', y')` minimizes `max_{i in I} e_i^T R y' - min_{j in J} x'^T R e_j`.
//! The joint program carries one constraint per pair `(i, j)`; because `x'`
//! and `y'` never share a constraint it separates into two programs, one per
//! player, whose objectives add up to the joint one.

use serde::{Deserialize, Serialize};

use super::{solve_lp, LinearProgram, LpSolution};
use crate::directional::restricted_gap;
use crate::error::{LpError, SolveError};
use crate::game::{MixedStrategy, PayoffMatrix, StrategyProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LpForm {
    Joint,
    #[default]
    Decomposed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionResult {
    pub direction: StrategyProfile,
    /// `max_{i in I} e_i^T R y' - min_{j in J} x'^T R e_j` at the returned direction.
    pub gamma: f64,
    pub row_set_size: usize,
    pub col_set_size: usize,
}

/// `min g1  s.t.  g1 >= e_i^T R y'  (i in rows),  y' in simplex`.
///
/// Variables are `y'_0..y'_{n-1}` followed by `g1`.
pub fn row_side_lp(r: &PayoffMatrix, rows: &[usize]) -> Result<LinearProgram, LpError> {
    let n = r.cols();
    let mut lp = LinearProgram::new(n + 1);
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    lp.set_objective(objective)?;
    for j in 0..n {
        lp.set_bounds(j, 0.0, 1.0)?;
    }
    lp.set_bounds(n, 0.0, 1.0)?;
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = -1.0;
    for &i in rows {
        coeffs[..n].copy_from_slice(r.row(i));
        lp.add_le(&coeffs, 0.0)?;
    }
    lp.add_eq(&simplex_row(n, 1), 1.0)?;
    Ok(lp)
}

/// `min g2  s.t.  g2 >= -x'^T R e_j  (j in cols),  x' in simplex`.
///
/// Variables are `x'_0..x'_{m-1}` followed by `g2`.
pub fn col_side_lp(r: &PayoffMatrix, cols: &[usize]) -> Result<LinearProgram, LpError> {
    let m = r.rows();
    let mut lp = LinearProgram::new(m + 1);
    let mut objective = vec![0.0; m + 1];
    objective[m] = 1.0;
    lp.set_objective(objective)?;
    for i in 0..m {
        lp.set_bounds(i, 0.0, 1.0)?;
    }
    lp.set_bounds(m, -1.0, 0.0)?;
    let mut coeffs = vec![0.0; m + 1];
    coeffs[m] = -1.0;
    for &j in cols {
        for (i, c) in coeffs[..m].iter_mut().enumerate() {
            *c = -r.get(i, j);
        }
        lp.add_le(&coeffs, 0.0)?;
    }
    lp.add_eq(&simplex_row(m, 1), 1.0)?;
    Ok(lp)
}

/// `min g  s.t.  g >= e_i^T R y' - x'^T R e_j  ((i, j) in rows x cols)`.
///
/// Variables are `x'` (m), then `y'` (n), then `g`.
pub fn joint_lp(r: &PayoffMatrix, rows: &[usize], cols: &[usize]) -> Result<LinearProgram, LpError> {
    let (m, n) = (r.rows(), r.cols());
    let mut lp = LinearProgram::new(m + n + 1);
    let mut objective = vec![0.0; m + n + 1];
    objective[m + n] = 1.0;
    lp.set_objective(objective)?;
    for v in 0..m + n {
        lp.set_bounds(v, 0.0, 1.0)?;
    }
    lp.set_bounds(m + n, -1.0, 1.0)?;
    let mut coeffs = vec![0.0; m + n + 1];
    coeffs[m + n] = -1.0;
    for &i in rows {
        coeffs[m..m + n].copy_from_slice(r.row(i));
        for &j in cols {
            for (k, c) in coeffs[..m].iter_mut().enumerate() {
                *c = -r.get(k, j);
            }
            lp.add_le(&coeffs, 0.0)?;
        }
    }
    let mut x_sum = vec![0.0; m + n + 1];
    x_sum[..m].iter_mut().for_each(|c| *c = 1.0);
    lp.add_eq(&x_sum, 1.0)?;
    let mut y_sum = vec![0.0; m + n + 1];
    y_sum[m..m + n].iter_mut().for_each(|c| *c = 1.0);
    lp.add_eq(&y_sum, 1.0)?;
    Ok(lp)
}

fn simplex_row(len: usize, extra: usize) -> Vec<f64> {
    let mut row = vec![1.0; len];
    row.extend(std::iter::repeat_n(0.0, extra));
    row
}

fn solve_checked(lp: &LinearProgram, tolerance: f64) -> Result<LpSolution, LpError> {
    let sol = solve_lp(lp, tolerance)?;
    if !sol.is_usable() {
        // the feasible region is a product of simplices and the objective is bounded
        return Err(LpError::UnexpectedStatus(sol.status));
    }
    Ok(sol)
}

fn to_strategy(values: &[f64]) -> Result<MixedStrategy, LpError> {
    let mut probs: Vec<f64> = values.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    MixedStrategy::new(probs).map_err(|e| LpError::Malformed(e.to_string()))
}

/// Steepest direction restricted to explicit index sets.
pub fn direction_on_sets(
    r: &PayoffMatrix,
    rows: &[usize],
    cols: &[usize],
    form: LpForm,
    tolerance: f64,
) -> Result<DirectionResult, LpError> {
    let (m, n) = (r.rows(), r.cols());
    let (x, y) = match form {
        LpForm::Decomposed => {
            // the two programs are independent; order does not matter
            let row_sol = solve_checked(&row_side_lp(r, rows)?, tolerance)?;
            let col_sol = solve_checked(&col_side_lp(r, cols)?, tolerance)?;
            (to_strategy(&col_sol.values[..m])?, to_strategy(&row_sol.values[..n])?)
        }
        LpForm::Joint => {
            let sol = solve_checked(&joint_lp(r, rows, cols)?, tolerance)?;
            (to_strategy(&sol.values[..m])?, to_strategy(&sol.values[m..m + n])?)
        }
    };
    let direction = StrategyProfile::new(x, y);
    let there = r.profile_payoffs(&direction);
    Ok(DirectionResult {
        gamma: restricted_gap(&there.row, &there.col, rows, cols),
        direction,
        row_set_size: rows.len(),
        col_set_size: cols.len(),
    })
}

fn rho_sets(r: &PayoffMatrix, z: &StrategyProfile, rho: f64) -> Result<(Vec<usize>, Vec<usize>), SolveError> {
    r.check_profile(z)?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(SolveError::Config(format!("rho = {rho} is outside (0, 1]")));
    }
    let here = r.profile_payoffs(z);
    Ok((here.row_best_responses(rho), here.col_best_responses(rho)))
}

/// Direction minimizing the `rho`-directional derivative at `z`, through the
/// joint program.
pub fn find_direction(
    r: &PayoffMatrix,
    z: &StrategyProfile,
    rho: f64,
    tolerance: f64,
) -> Result<DirectionResult, SolveError> {
    let (rows, cols) = rho_sets(r, z, rho)?;
    Ok(direction_on_sets(r, &rows, &cols, LpForm::Joint, tolerance)?)
}

/// Same direction as [`find_direction`], through the two per-player programs.
pub fn find_direction_decomposed(
    r: &PayoffMatrix,
    z: &StrategyProfile,
    rho: f64,
    tolerance: f64,
) -> Result<DirectionResult, SolveError> {
    let (rows, cols) = rho_sets(r, z, rho)?;
    Ok(direction_on_sets(r, &rows, &cols, LpForm::Decomposed, tolerance)?)
}

/// Optimal strategy of a minimizing column player facing a matrix with
/// entries in `[1, 2]`: `max sum(w)  s.t.  A w <= 1,  w >= 0`, then `y = w / sum(w)`.
fn normalized_minimizer(rows: usize, cols: usize, entry: impl Fn(usize, usize) -> f64, tolerance: f64) -> Result<MixedStrategy, LpError> {
    let mut lp = LinearProgram::new(cols);
    lp.set_objective(vec![-1.0; cols])?;
    let mut coeffs = vec![0.0; cols];
    for i in 0..rows {
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c = entry(i, j);
        }
        lp.add_le(&coeffs, 1.0)?;
    }
    let sol = solve_lp(&lp, tolerance)?;
    if !sol.is_usable() {
        return Err(LpError::UnexpectedStatus(sol.status));
    }
    to_strategy(&sol.values)
}

/// Exact equilibrium of the whole game from the classical primal and dual
/// programs. Used as the reference solution in tests.
pub fn full_game_lp(r: &PayoffMatrix, tolerance: f64) -> Result<StrategyProfile, SolveError> {
    let (m, n) = (r.rows(), r.cols());
    // errors in 1/v translate into at most 8x larger errors in the gap
    let tol = tolerance / 8.0;
    let y = normalized_minimizer(m, n, |i, j| 1.0 + r.get(i, j), tol)?;
    // the row player maximizes min_j x^T R e_j, i.e. minimizes max_j (2 - R^T x)_j
    let x = normalized_minimizer(n, m, |j, i| 2.0 - r.get(i, j), tol)?;
    Ok(StrategyProfile::new(x, y))
}
