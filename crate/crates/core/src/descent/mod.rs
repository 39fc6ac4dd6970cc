//! Steepest descent on the duality gap.
//!
//! Every variant repeats the same step: collect approximate best responses at
//! the current profile `z`, solve the direction LP on those sets, and move to
//! `(1 - eps) z + eps z'`. The variants differ in how the sets are chosen and
//! in the accuracy schedule:
//!
//! - [`Variant::Plain`] keeps `delta` and `rho` fixed;
//! - [`Variant::DecayDelta`] halves the target accuracy each epoch;
//! - [`Variant::DecayDeltaRho`] also shrinks `rho_i = scale * sqrt(delta_i)`;
//! - [`Variant::FixedSupport`] replaces the `rho`-sets by the top `k` pure
//!   strategies of each player.

mod step_size;

pub use step_size::{
    choose_epsilon, choose_epsilon_on, EpsilonPolicy, EpsilonState, Segment, DECAY_FACTOR,
    DECAY_FLOOR, DECAY_START, TERNARY_REGIME, TERNARY_WIDTH,
};

use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::game::{PayoffMatrix, ProfilePayoffs, StrategyProfile};
use crate::lp::{direction_on_sets, DirectionResult, LpForm};
use crate::trace::{IterationRecord, Outcome, SolveTrace};

/// Iteration cap for runs without a convergence guarantee.
pub const HEURISTIC_ITERATION_CAP: usize = 100_000;
/// Theory-backed runs stop at this multiple of their proven bound.
pub const BOUND_CAP_FACTOR: usize = 10;
pub const STALL_WINDOW: usize = 50;
pub const STALL_RELATIVE_IMPROVEMENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Plain,
    DecayDelta,
    DecayDeltaRho,
    FixedSupport { k: usize },
}

impl Variant {
    pub fn name(&self) -> String {
        match self {
            Variant::Plain => "plain".into(),
            Variant::DecayDelta => "decay-delta".into(),
            Variant::DecayDeltaRho => "decay-delta-rho".into(),
            Variant::FixedSupport { k } => format!("fixed-support-{k}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub enum Initialization {
    /// Both players on their first pure strategy.
    #[default]
    PureFirst,
    Uniform,
    Given(StrategyProfile),
}

impl Initialization {
    pub fn profile(&self, r: &PayoffMatrix) -> Result<StrategyProfile, SolveError> {
        let z = match self {
            Initialization::PureFirst => StrategyProfile::pure(r.rows(), r.cols(), 0, 0),
            Initialization::Uniform => StrategyProfile::uniform(r.rows(), r.cols()),
            Initialization::Given(z) => z.clone(),
        };
        r.check_profile(&z)?;
        Ok(z)
    }
}

fn default_lp_tolerance() -> f64 {
    1e-8
}

fn default_rho_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub delta: f64,
    /// Best-response slack for the fixed-`rho` variants. `FixedHalfRho` also
    /// reads it under `FixedSupport`.
    pub rho: f64,
    pub epsilon_policy: EpsilonPolicy,
    pub variant: Variant,
    #[serde(default = "default_lp_tolerance")]
    pub lp_tolerance: f64,
    /// `None` picks the default cap, see [`SolveConfig::iteration_cap`].
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub initialization: Initialization,
    #[serde(default)]
    pub lp_form: LpForm,
    /// `rho_i = rho_scale * sqrt(delta_i)` under `DecayDeltaRho`.
    #[serde(default = "default_rho_scale")]
    pub rho_scale: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            delta: 0.01,
            rho: 0.1,
            epsilon_policy: EpsilonPolicy::FixedHalfRho,
            variant: Variant::Plain,
            lp_tolerance: default_lp_tolerance(),
            max_iterations: None,
            initialization: Initialization::PureFirst,
            lp_form: LpForm::Decomposed,
            rho_scale: default_rho_scale(),
        }
    }
}

impl SolveConfig {
    pub fn plain(delta: f64, rho: f64) -> Self {
        Self {
            delta,
            rho,
            ..Self::default()
        }
    }

    pub fn decay_delta(delta: f64, rho: f64) -> Self {
        Self {
            variant: Variant::DecayDelta,
            ..Self::plain(delta, rho)
        }
    }

    pub fn decay_delta_rho(delta: f64) -> Self {
        Self {
            delta,
            variant: Variant::DecayDeltaRho,
            ..Self::default()
        }
    }

    /// Fixed support with the line-search schedule used in practice.
    pub fn fixed_support(delta: f64, k: usize) -> Self {
        Self {
            delta,
            variant: Variant::FixedSupport { k },
            epsilon_policy: EpsilonPolicy::TernaryThenDecay,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.delta) {
            return Err(SolveError::Config(format!("delta = {} is outside (0, 1]", self.delta)));
        }
        if !unit(self.rho) {
            return Err(SolveError::Config(format!("rho = {} is outside (0, 1]", self.rho)));
        }
        if let EpsilonPolicy::Constant(eps) = self.epsilon_policy {
            if !unit(eps) {
                return Err(SolveError::Config(format!("epsilon = {eps} is outside (0, 1]")));
            }
        }
        if let Variant::FixedSupport { k: 0 } = self.variant {
            return Err(SolveError::Config("k must be at least 1".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(SolveError::Config("max_iterations must be at least 1".into()));
        }
        if !(self.lp_tolerance >= 0.0 && self.lp_tolerance.is_finite()) {
            return Err(SolveError::Config(format!(
                "lp_tolerance = {} must be finite and non-negative",
                self.lp_tolerance
            )));
        }
        if !(self.rho_scale > 0.0 && self.rho_scale.is_finite()) {
            return Err(SolveError::Config(format!("rho_scale = {} must be positive", self.rho_scale)));
        }
        Ok(())
    }

    /// Whether the run carries a proven iteration bound.
    pub fn is_heuristic(&self) -> bool {
        matches!(self.variant, Variant::FixedSupport { .. }) || self.epsilon_policy.is_heuristic()
    }

    /// Proven iteration bound, `None` for heuristic runs.
    pub fn iteration_bound(&self) -> Option<usize> {
        if self.is_heuristic() {
            return None;
        }
        Some(match self.variant {
            Variant::Plain => plain_bound(self.delta, self.rho),
            Variant::DecayDelta => decay_delta_bound(self.delta, self.rho),
            Variant::DecayDeltaRho => decay_delta_rho_bound(self.delta, self.rho_scale),
            Variant::FixedSupport { .. } => unreachable!("fixed support is heuristic"),
        })
    }

    pub fn iteration_cap(&self) -> usize {
        self.max_iterations.unwrap_or_else(|| match self.iteration_bound() {
            Some(bound) => bound.saturating_mul(BOUND_CAP_FACTOR),
            None => HEURISTIC_ITERATION_CAP,
        })
    }

    pub fn solver_name(&self) -> String {
        self.variant.name()
    }
}

/// `ceil(4 / (rho delta) * ln(2 / delta)) + 1`.
pub fn plain_bound(delta: f64, rho: f64) -> usize {
    (4.0 / (rho * delta) * (2.0 / delta).ln()).ceil() as usize + 1
}

/// Number of halvings from 1 until `delta_i <= delta`, i.e. `ceil(log2(1 / delta))`.
pub fn epoch_count(delta: f64) -> usize {
    let mut epochs = 0;
    let mut d = 1.0;
    loop {
        epochs += 1;
        d /= 2.0;
        if d <= delta {
            return epochs;
        }
    }
}

/// `ceil(4 / rho + 1) * ceil(log2(2 / delta))`.
pub fn decay_delta_bound(delta: f64, rho: f64) -> usize {
    (4.0 / rho + 1.0).ceil() as usize * (2.0 / delta).log2().ceil() as usize
}

/// Sum over the epochs of `floor(4 / rho_i) + 1` with `rho_i = scale * sqrt(delta_i)`.
pub fn decay_delta_rho_bound(delta: f64, scale: f64) -> usize {
    let mut d = 1.0;
    (0..epoch_count(delta))
        .map(|_| {
            d /= 2.0;
            let rho = (scale * f64::sqrt(d)).min(1.0);
            (4.0 / rho).floor() as usize + 1
        })
        .sum()
}

/// What a single step looked like, for [`descent_step`] callers and observers.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub rho: f64,
    pub epsilon: f64,
    pub v_before: f64,
    pub v_after: f64,
    pub gamma: f64,
    pub row_set: Vec<usize>,
    pub col_set: Vec<usize>,
    pub direction: StrategyProfile,
}

/// One step with `rho`-best-response sets and a given step size.
pub fn descent_step(
    r: &PayoffMatrix,
    z: &StrategyProfile,
    rho: f64,
    epsilon: f64,
    lp_tolerance: f64,
) -> Result<(StrategyProfile, StepRecord), SolveError> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(SolveError::Config(format!("rho = {rho} is outside (0, 1]")));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(SolveError::Config(format!("epsilon = {epsilon} is outside [0, 1]")));
    }
    r.check_profile(z)?;
    let here = r.profile_payoffs(z);
    let rows = here.row_best_responses(rho);
    let cols = here.col_best_responses(rho);
    let dir = direction_on_sets(r, &rows, &cols, LpForm::Decomposed, lp_tolerance)?;
    let next = z.mix(&dir.direction, epsilon);
    let record = StepRecord {
        rho,
        epsilon,
        v_before: here.gap(),
        v_after: r.profile_payoffs(&next).gap(),
        gamma: dir.gamma,
        row_set: rows,
        col_set: cols,
        direction: dir.direction,
    };
    Ok((next, record))
}

/// Read-only view of an iteration handed to observers.
pub struct StepView<'a> {
    pub t: usize,
    pub epoch: usize,
    pub delta_i: f64,
    pub before: &'a StrategyProfile,
    pub after: &'a StrategyProfile,
    pub step: &'a StepRecord,
}

enum SetRule {
    Rho(f64),
    TopK(usize),
}

enum EpochEnd {
    Reached,
    Stopped,
}

struct Run<'a, 'o> {
    r: &'a PayoffMatrix,
    cfg: &'a SolveConfig,
    z: StrategyProfile,
    here: ProfilePayoffs,
    trace: SolveTrace,
    cap: usize,
    eps_state: EpsilonState,
    window: Option<VecDeque<f64>>,
    observer: Option<&'o mut dyn FnMut(&StepView<'_>)>,
}

impl<'a, 'o> Run<'a, 'o> {
    fn new(
        r: &'a PayoffMatrix,
        cfg: &'a SolveConfig,
        observer: Option<&'o mut dyn FnMut(&StepView<'_>)>,
    ) -> Result<Self, SolveError> {
        cfg.validate()?;
        let z = cfg.initialization.profile(r)?;
        let here = r.profile_payoffs(&z);
        let trace = SolveTrace::new(cfg.solver_name(), here.gap());
        Ok(Self {
            r,
            cfg,
            z,
            here,
            trace,
            cap: cfg.iteration_cap(),
            eps_state: EpsilonState::default(),
            window: cfg.is_heuristic().then(VecDeque::new),
            observer,
        })
    }

    /// Steps until the gap is at most `delta_i`, the cap trips or the run stalls.
    fn descend(&mut self, epoch: usize, delta_i: f64, rule: SetRule) -> Result<EpochEnd, SolveError> {
        loop {
            let v = self.here.gap();
            if v <= delta_i {
                return Ok(EpochEnd::Reached);
            }
            if self.trace.len() >= self.cap {
                return Ok(EpochEnd::Stopped);
            }
            let (rows, cols, rho) = match rule {
                SetRule::Rho(rho) => (
                    self.here.row_best_responses(rho),
                    self.here.col_best_responses(rho),
                    rho,
                ),
                SetRule::TopK(k) => (top_k(&self.here.row, k, true), top_k(&self.here.col, k, false), self.cfg.rho),
            };
            let DirectionResult { direction, gamma, .. } =
                direction_on_sets(self.r, &rows, &cols, self.cfg.lp_form, self.cfg.lp_tolerance)?;
            let there = self.r.profile_payoffs(&direction);
            let segment = Segment::new(self.here.clone(), there);
            let mut eps = choose_epsilon_on(&segment, self.cfg.epsilon_policy, rho, &mut self.eps_state);
            if self.cfg.is_heuristic() {
                eps = step_size::safeguard(&segment, eps);
            }
            let next = self.z.mix(&direction, eps);
            let next_payoffs = self.r.profile_payoffs(&next);
            let step = StepRecord {
                rho,
                epsilon: eps,
                v_before: v,
                v_after: next_payoffs.gap(),
                gamma,
                row_set: rows,
                col_set: cols,
                direction,
            };
            let t = self.trace.len();
            if let Some(observer) = self.observer.as_mut() {
                observer(&StepView {
                    t,
                    epoch,
                    delta_i,
                    before: &self.z,
                    after: &next,
                    step: &step,
                });
            }
            self.trace.push(IterationRecord {
                t,
                epoch,
                delta_i,
                rho_i: Some(rho),
                epsilon: eps,
                v_before: v,
                v_after: step.v_after,
                gamma: Some(gamma),
                row_set: step.row_set.len(),
                col_set: step.col_set.len(),
            });
            self.z = next;
            self.here = next_payoffs;
            if self.stalled() {
                self.trace.stalled = true;
                return Ok(EpochEnd::Stopped);
            }
        }
    }

    fn stalled(&mut self) -> bool {
        let Some(window) = self.window.as_mut() else {
            return false;
        };
        window.push_back(self.here.gap());
        if window.len() <= STALL_WINDOW {
            return false;
        }
        let old = window.pop_front().expect("window is non-empty");
        let new = *window.back().expect("window is non-empty");
        old > 0.0 && (old - new) / old < STALL_RELATIVE_IMPROVEMENT
    }

    fn finish(mut self, outcome: Outcome, started: Instant) -> (StrategyProfile, SolveTrace) {
        self.trace.outcome = outcome;
        self.trace.final_gap = self.here.gap();
        self.trace.metadata.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
        (self.z, self.trace)
    }
}

/// Indices of the `k` best entries (largest when `largest`, else smallest),
/// ties going to the lower index, returned in ascending order.
fn top_k(payoffs: &[f64], k: usize, largest: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..payoffs.len()).collect();
    if largest {
        order.sort_by(|&a, &b| payoffs[b].total_cmp(&payoffs[a]));
    } else {
        order.sort_by(|&a, &b| payoffs[a].total_cmp(&payoffs[b]));
    }
    order.truncate(k.min(payoffs.len()));
    order.sort_unstable();
    order
}

fn expect_variant(cfg: &SolveConfig, ok: bool) -> Result<(), SolveError> {
    if ok {
        Ok(())
    } else {
        Err(SolveError::Config(format!("solver called with variant {}", cfg.variant.name())))
    }
}

fn run_plain(run: &mut Run<'_, '_>) -> Result<Outcome, SolveError> {
    let cfg = run.cfg;
    Ok(match run.descend(1, cfg.delta, SetRule::Rho(cfg.rho))? {
        EpochEnd::Reached => Outcome::Converged,
        EpochEnd::Stopped => Outcome::IterationCapReached,
    })
}

fn run_decaying(run: &mut Run<'_, '_>, rho_of: impl Fn(f64) -> f64) -> Result<Outcome, SolveError> {
    let delta = run.cfg.delta;
    let mut delta_i = 1.0;
    let mut epoch = 0;
    loop {
        epoch += 1;
        delta_i /= 2.0;
        if let EpochEnd::Stopped = run.descend(epoch, delta_i, SetRule::Rho(rho_of(delta_i)))? {
            return Ok(Outcome::IterationCapReached);
        }
        if delta_i <= delta {
            return Ok(Outcome::Converged);
        }
    }
}

fn run_fixed_support(run: &mut Run<'_, '_>, k: usize) -> Result<Outcome, SolveError> {
    Ok(match run.descend(1, run.cfg.delta, SetRule::TopK(k))? {
        EpochEnd::Reached => Outcome::Converged,
        EpochEnd::Stopped => Outcome::IterationCapReached,
    })
}

/// Runs whichever variant `cfg` names, reporting every step to `observer`.
pub fn solve_observed(
    r: &PayoffMatrix,
    cfg: &SolveConfig,
    observer: &mut dyn FnMut(&StepView<'_>),
) -> Result<(StrategyProfile, SolveTrace), SolveError> {
    solve_inner(r, cfg, Some(observer))
}

/// Runs whichever variant `cfg` names.
pub fn solve(r: &PayoffMatrix, cfg: &SolveConfig) -> Result<(StrategyProfile, SolveTrace), SolveError> {
    solve_inner(r, cfg, None)
}

fn solve_inner(
    r: &PayoffMatrix,
    cfg: &SolveConfig,
    observer: Option<&mut dyn FnMut(&StepView<'_>)>,
) -> Result<(StrategyProfile, SolveTrace), SolveError> {
    let started = Instant::now();
    let mut run = Run::new(r, cfg, observer)?;
    let outcome = match cfg.variant {
        Variant::Plain => run_plain(&mut run)?,
        Variant::DecayDelta => run_decaying(&mut run, |_| cfg.rho)?,
        Variant::DecayDeltaRho => run_decaying(&mut run, |d| (cfg.rho_scale * d.sqrt()).min(1.0))?,
        Variant::FixedSupport { k } => run_fixed_support(&mut run, k)?,
    };
    Ok(run.finish(outcome, started))
}

pub fn solve_plain(r: &PayoffMatrix, cfg: &SolveConfig) -> Result<(StrategyProfile, SolveTrace), SolveError> {
    expect_variant(cfg, cfg.variant == Variant::Plain)?;
    solve(r, cfg)
}

pub fn solve_decay_delta(r: &PayoffMatrix, cfg: &SolveConfig) -> Result<(StrategyProfile, SolveTrace), SolveError> {
    expect_variant(cfg, cfg.variant == Variant::DecayDelta)?;
    solve(r, cfg)
}

pub fn solve_decay_delta_rho(r: &PayoffMatrix, cfg: &SolveConfig) -> Result<(StrategyProfile, SolveTrace), SolveError> {
    expect_variant(cfg, cfg.variant == Variant::DecayDeltaRho)?;
    solve(r, cfg)
}

pub fn solve_fixed_support(r: &PayoffMatrix, cfg: &SolveConfig) -> Result<(StrategyProfile, SolveTrace), SolveError> {
    expect_variant(cfg, matches!(cfg.variant, Variant::FixedSupport { .. }))?;
    solve(r, cfg)
}
