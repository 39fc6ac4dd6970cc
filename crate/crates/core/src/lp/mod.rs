//! Small dense linear programs and the direction-finding LPs built on them.

mod direction;
mod simplex;

pub use direction::{
    col_side_lp, direction_on_sets, find_direction, find_direction_decomposed, full_game_lp,
    joint_lp, row_side_lp, DirectionResult, LpForm,
};
pub use simplex::solve_lp;

use serde::{Deserialize, Serialize};

use crate::error::LpError;

/// `minimize c^T v  s.t.  A v <= b,  E v = d,  lo <= v <= hi`.
///
/// Constraint rows are stored dense. Variables default to `[0, +inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    ineq: Vec<f64>,
    ineq_rhs: Vec<f64>,
    eq: Vec<f64>,
    eq_rhs: Vec<f64>,
    bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            ineq: Vec::new(),
            ineq_rhs: Vec::new(),
            eq: Vec::new(),
            eq_rhs: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); num_vars],
        }
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) -> Result<(), LpError> {
        self.check_row(&objective)?;
        self.objective = objective;
        Ok(())
    }

    /// Adds `coeffs . v <= rhs`.
    pub fn add_le(&mut self, coeffs: &[f64], rhs: f64) -> Result<(), LpError> {
        self.check_row(coeffs)?;
        check_finite(rhs)?;
        self.ineq.extend_from_slice(coeffs);
        self.ineq_rhs.push(rhs);
        Ok(())
    }

    /// Adds `coeffs . v = rhs`.
    pub fn add_eq(&mut self, coeffs: &[f64], rhs: f64) -> Result<(), LpError> {
        self.check_row(coeffs)?;
        check_finite(rhs)?;
        self.eq.extend_from_slice(coeffs);
        self.eq_rhs.push(rhs);
        Ok(())
    }

    /// Infinite values mean "unbounded on that side".
    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if var >= self.num_vars {
            return Err(LpError::Malformed(format!("variable {var} does not exist")));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(LpError::Malformed(format!(
                "bad bounds [{lower}, {upper}] on variable {var}"
            )));
        }
        self.bounds[var] = (lower, upper);
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_inequalities(&self) -> usize {
        self.ineq_rhs.len()
    }

    pub fn num_equalities(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn inequality(&self, k: usize) -> (&[f64], f64) {
        (&self.ineq[k * self.num_vars..(k + 1) * self.num_vars], self.ineq_rhs[k])
    }

    pub fn equality(&self, k: usize) -> (&[f64], f64) {
        (&self.eq[k * self.num_vars..(k + 1) * self.num_vars], self.eq_rhs[k])
    }

    /// Largest violation of any constraint or bound at `v`.
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.num_inequalities() {
            let (a, b) = self.inequality(k);
            worst = worst.max(dot(a, v) - b);
        }
        for k in 0..self.num_equalities() {
            let (a, b) = self.equality(k);
            worst = worst.max((dot(a, v) - b).abs());
        }
        for (x, &(lo, hi)) in v.iter().zip(&self.bounds) {
            worst = worst.max(lo - x).max(x - hi);
        }
        worst
    }

    fn check_row(&self, row: &[f64]) -> Result<(), LpError> {
        if row.len() != self.num_vars {
            return Err(LpError::Malformed(format!(
                "row has {} coefficients, program has {} variables",
                row.len(),
                self.num_vars
            )));
        }
        row.iter().try_for_each(|&v| check_finite(v))
    }
}

fn check_finite(v: f64) -> Result<(), LpError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(LpError::Malformed(format!("non-finite coefficient {v}")))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Stopped early with a feasible point whose objective is provably within
    /// the requested tolerance of the optimum.
    ToleranceReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective_value: f64,
}

impl LpSolution {
    pub fn is_usable(&self) -> bool {
        matches!(self.status, LpStatus::Optimal | LpStatus::ToleranceReached)
    }
}
