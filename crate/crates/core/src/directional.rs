//! Directional derivatives of the duality gap.
//!
//! Along the segment `(1 - eps) z + eps z'` the gap is piecewise linear in
//! `eps`, so its one-sided derivative at `eps = 0` only involves the pure
//! strategies that are best responses at `z`:
//!
//! ```text
//! max_{i in BR_r(y)} e_i^T R y'  -  min_{j in BR_c(x)} x'^T R e_j  -  V(z)
//! ```
//!
//! Widening both sets to `rho`-best responses gives an upper bound, which is
//! the quantity the direction LP minimizes.

use crate::error::GameError;
use crate::game::{BestResponseSet, PayoffMatrix, Player, StrategyProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalDerivativeResult {
    pub value: f64,
    pub row_active_set: BestResponseSet,
    pub col_active_set: BestResponseSet,
}

/// Exact one-sided derivative of `V` at `z` towards `dir`.
pub fn directional_derivative(
    r: &PayoffMatrix,
    z: &StrategyProfile,
    dir: &StrategyProfile,
) -> Result<DirectionalDerivativeResult, GameError> {
    derivative_with_slack(r, z, dir, 0.0)
}

/// The `rho`-directional derivative, never smaller than the exact one.
pub fn rho_directional_derivative(
    r: &PayoffMatrix,
    z: &StrategyProfile,
    dir: &StrategyProfile,
    rho: f64,
) -> Result<DirectionalDerivativeResult, GameError> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(GameError::InvalidParameter(format!(
            "rho = {rho} is outside (0, 1]"
        )));
    }
    derivative_with_slack(r, z, dir, rho)
}

fn derivative_with_slack(
    r: &PayoffMatrix,
    z: &StrategyProfile,
    dir: &StrategyProfile,
    rho: f64,
) -> Result<DirectionalDerivativeResult, GameError> {
    r.check_profile(z)?;
    r.check_profile(dir)?;
    let here = r.profile_payoffs(z);
    let there = r.profile_payoffs(dir);
    let rows = here.row_best_responses(rho);
    let cols = here.col_best_responses(rho);
    let value = restricted_gap(&there.row, &there.col, &rows, &cols) - here.gap();
    Ok(DirectionalDerivativeResult {
        value,
        row_active_set: BestResponseSet {
            player: Player::Row,
            rho,
            indices: rows,
        },
        col_active_set: BestResponseSet {
            player: Player::Col,
            rho,
            indices: cols,
        },
    })
}

/// `max_{i in rows} row[i] - min_{j in cols} col[j]`.
pub(crate) fn restricted_gap(row: &[f64], col: &[f64], rows: &[usize], cols: &[usize]) -> f64 {
    let best = rows
        .iter()
        .map(|&i| row[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let worst = cols.iter().map(|&j| col[j]).fold(f64::INFINITY, f64::min);
    best - worst
}
