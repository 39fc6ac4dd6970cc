//! Projected optimistic gradient descent/ascent.
//!
//! The row player ascends on `x^T R y` and the column player descends:
//!
//! ```text
//! x+ = P(x + 2a R y  - a R y_prev)
//! y+ = P(y - 2a R^T x + a R^T x_prev)
//! ```
//!
//! where `P` is the Euclidean projection onto the simplex and the `_prev`
//! gradients are those of the previous iterate. The first step reuses the
//! current gradients, which makes it a plain projected gradient step.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::descent::Initialization;
use crate::error::SolveError;
use crate::game::{MixedStrategy, PayoffMatrix, StrategyProfile};
use crate::trace::{IterationRecord, Outcome, SolveTrace};

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> MixedStrategy {
    assert!(!v.is_empty(), "cannot project onto an empty simplex");
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    // largest k with sorted[k-1] - (sum of first k - 1) / k > 0
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        prefix += s;
        let candidate = (prefix - 1.0) / (k + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        }
    }
    let probs: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    MixedStrategy::new(probs).expect("projection lies on the simplex")
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepSchedule {
    #[default]
    Constant,
    /// `alpha_t = alpha / sqrt(t + 1)`.
    InverseSqrt,
}

impl StepSchedule {
    pub fn alpha_at(self, alpha: f64, t: usize) -> f64 {
        match self {
            StepSchedule::Constant => alpha,
            StepSchedule::InverseSqrt => alpha / ((t + 1) as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OgdaState {
    pub profile: StrategyProfile,
    /// `R y` at the previous iterate.
    pub prev_row_grad: Vec<f64>,
    /// `R^T x` at the previous iterate.
    pub prev_col_grad: Vec<f64>,
    pub alpha: f64,
    pub schedule: StepSchedule,
    pub t: usize,
}

impl OgdaState {
    /// Starting state whose "previous" gradients are the current ones.
    pub fn start(r: &PayoffMatrix, profile: StrategyProfile, alpha: f64, schedule: StepSchedule) -> Result<Self, SolveError> {
        r.check_profile(&profile)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(SolveError::Config(format!("alpha = {alpha} must be positive")));
        }
        let payoffs = r.profile_payoffs(&profile);
        Ok(Self {
            profile,
            prev_row_grad: payoffs.row,
            prev_col_grad: payoffs.col,
            alpha,
            schedule,
            t: 0,
        })
    }
}

pub fn ogda_step(r: &PayoffMatrix, state: &OgdaState) -> OgdaState {
    let payoffs = r.profile_payoffs(&state.profile);
    let a = state.schedule.alpha_at(state.alpha, state.t);
    let x: Vec<f64> = state
        .profile
        .row
        .probs()
        .iter()
        .zip(&payoffs.row)
        .zip(&state.prev_row_grad)
        .map(|((x, g), gp)| x + 2.0 * a * g - a * gp)
        .collect();
    let y: Vec<f64> = state
        .profile
        .col
        .probs()
        .iter()
        .zip(&payoffs.col)
        .zip(&state.prev_col_grad)
        .map(|((y, g), gp)| y - 2.0 * a * g + a * gp)
        .collect();
    OgdaState {
        profile: StrategyProfile::new(project_simplex(&x), project_simplex(&y)),
        prev_row_grad: payoffs.row,
        prev_col_grad: payoffs.col,
        alpha: state.alpha,
        schedule: state.schedule,
        t: state.t + 1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OgdaConfig {
    pub delta: f64,
    pub alpha: f64,
    pub max_iterations: usize,
    #[serde(default)]
    pub initialization: Initialization,
    #[serde(default)]
    pub schedule: StepSchedule,
}

impl Default for OgdaConfig {
    fn default() -> Self {
        Self {
            delta: 0.01,
            alpha: DEFAULT_ALPHA,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            initialization: Initialization::PureFirst,
            schedule: StepSchedule::Constant,
        }
    }
}

impl OgdaConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(SolveError::Config(format!("delta = {} is outside (0, 1]", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(SolveError::Config(format!("alpha = {} must be positive", self.alpha)));
        }
        if self.max_iterations == 0 {
            return Err(SolveError::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Iterates until the gap is at most `delta` or the cap trips. The set-size
/// columns of the trace hold the support sizes of the new iterate.
pub fn ogda_solve(r: &PayoffMatrix, cfg: &OgdaConfig) -> Result<(StrategyProfile, SolveTrace), SolveError> {
    cfg.validate()?;
    let started = Instant::now();
    let mut state = OgdaState::start(r, cfg.initialization.profile(r)?, cfg.alpha, cfg.schedule)?;
    let mut v = r.profile_payoffs(&state.profile).gap();
    let mut trace = SolveTrace::new("ogda", v);
    while v > cfg.delta && trace.len() < cfg.max_iterations {
        let alpha_t = state.schedule.alpha_at(state.alpha, state.t);
        state = ogda_step(r, &state);
        let v_after = r.profile_payoffs(&state.profile).gap();
        trace.push(IterationRecord {
            t: trace.len(),
            epoch: 1,
            delta_i: cfg.delta,
            rho_i: None,
            epsilon: alpha_t,
            v_before: v,
            v_after,
            gamma: None,
            row_set: state.profile.row.support_size(),
            col_set: state.profile.col.support_size(),
        });
        v = v_after;
    }
    trace.outcome = if v <= cfg.delta {
        Outcome::Converged
    } else {
        Outcome::IterationCapReached
    };
    trace.final_gap = v;
    trace.metadata.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
    Ok((state.profile, trace))
}
