//! Step sizes along the segment `(1 - eps) z + eps z'`.
//!
//! Along that segment every pure-strategy payoff is affine in `eps`, so the
//! gap is the difference between an upper envelope of lines and a lower
//! envelope of lines: convex and piecewise linear on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::GameError;
use crate::game::{PayoffMatrix, ProfilePayoffs, StrategyProfile};

/// Gap above which [`EpsilonPolicy::TernaryThenDecay`] searches the segment.
pub const TERNARY_REGIME: f64 = 0.1;
pub const TERNARY_WIDTH: f64 = 1e-3;
pub const DECAY_START: f64 = 0.2;
pub const DECAY_FACTOR: f64 = 0.9;
pub const DECAY_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsilonPolicy {
    /// `eps = rho / 2`, the step the convergence guarantees are stated for.
    FixedHalfRho,
    Constant(f64),
    /// Ternary search while the gap exceeds 0.1, then a step that starts at
    /// 0.2 and shrinks by 10% per iteration.
    TernaryThenDecay,
    /// Global minimizer of the gap along the segment.
    ExactLineMin,
}

impl EpsilonPolicy {
    /// Policies whose steps may exceed `rho / 2`.
    pub fn is_heuristic(self) -> bool {
        matches!(self, EpsilonPolicy::Constant(_) | EpsilonPolicy::TernaryThenDecay)
    }
}

/// Mutable state carried across iterations by the decaying policy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpsilonState {
    decayed: Option<f64>,
}

impl EpsilonState {
    fn next_decayed(&mut self) -> f64 {
        let eps = match self.decayed {
            None => DECAY_START,
            Some(prev) => (prev * DECAY_FACTOR).max(DECAY_FLOOR),
        };
        self.decayed = Some(eps);
        eps
    }
}

/// Payoff vectors at both ends of a descent segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    here: ProfilePayoffs,
    there: ProfilePayoffs,
}

impl Segment {
    pub fn new(here: ProfilePayoffs, there: ProfilePayoffs) -> Self {
        debug_assert_eq!(here.row.len(), there.row.len());
        debug_assert_eq!(here.col.len(), there.col.len());
        Self { here, there }
    }

    pub fn between(r: &PayoffMatrix, z: &StrategyProfile, dir: &StrategyProfile) -> Result<Self, GameError> {
        r.check_profile(z)?;
        r.check_profile(dir)?;
        Ok(Self::new(r.profile_payoffs(z), r.profile_payoffs(dir)))
    }

    pub fn start(&self) -> &ProfilePayoffs {
        &self.here
    }

    /// `V((1 - eps) z + eps z')`.
    pub fn gap_at(&self, eps: f64) -> f64 {
        let best = self
            .here
            .row
            .iter()
            .zip(&self.there.row)
            .map(|(a, b)| (1.0 - eps) * a + eps * b)
            .fold(f64::NEG_INFINITY, f64::max);
        let worst = self
            .here
            .col
            .iter()
            .zip(&self.there.col)
            .map(|(a, b)| (1.0 - eps) * a + eps * b)
            .fold(f64::INFINITY, f64::min);
        best - worst
    }

    /// Minimizer of [`Segment::gap_at`] over `[0, 1]` by breakpoint enumeration.
    /// On ties the longest step wins.
    pub fn exact_minimizer(&self) -> f64 {
        let upper = Envelope::upper(
            self.here
                .row
                .iter()
                .zip(&self.there.row)
                .map(|(&a, &b)| Line { intercept: a, slope: b - a }),
        );
        // min_j l_j = -max_j (-l_j)
        let lower = Envelope::upper(
            self.here
                .col
                .iter()
                .zip(&self.there.col)
                .map(|(&a, &b)| Line { intercept: -a, slope: a - b }),
        );
        let mut candidates = vec![0.0, 1.0];
        candidates.extend(upper.breakpoints_in_unit());
        candidates.extend(lower.breakpoints_in_unit());
        let mut best = (f64::INFINITY, 0.0);
        for eps in candidates {
            let value = upper.eval(eps) + lower.eval(eps);
            if value < best.0 || (value == best.0 && eps > best.1) {
                best = (value, eps);
            }
        }
        best.1
    }

    /// Ternary search on the convex gap down to an interval of width `width`.
    pub fn ternary_minimizer(&self, width: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > width {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if self.gap_at(m1) < self.gap_at(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Debug, Clone, Copy)]
struct Line {
    intercept: f64,
    slope: f64,
}

impl Line {
    fn at(self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    fn crossing(self, other: Line) -> f64 {
        (self.intercept - other.intercept) / (other.slope - self.slope)
    }
}

/// Upper envelope `max_k l_k(x)`, lines sorted by slope with the crossing
/// points between neighbours.
struct Envelope {
    lines: Vec<Line>,
    breaks: Vec<f64>,
}

impl Envelope {
    fn upper(lines: impl Iterator<Item = Line>) -> Self {
        let mut sorted: Vec<Line> = lines.collect();
        sorted.sort_by(|a, b| {
            a.slope
                .total_cmp(&b.slope)
                .then(b.intercept.total_cmp(&a.intercept))
        });
        sorted.dedup_by(|later, kept| later.slope == kept.slope);
        let mut hull: Vec<Line> = Vec::with_capacity(sorted.len());
        for line in sorted {
            while hull.len() >= 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if a.crossing(line) <= a.crossing(b) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(line);
        }
        let breaks = hull.windows(2).map(|w| w[0].crossing(w[1])).collect();
        Self { lines: hull, breaks }
    }

    fn eval(&self, x: f64) -> f64 {
        let k = self.breaks.partition_point(|&b| b <= x);
        // neighbours guard against rounding in the crossing points
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(self.lines.len() - 1);
        self.lines[lo..=hi]
            .iter()
            .map(|l| l.at(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn breakpoints_in_unit(&self) -> impl Iterator<Item = f64> + '_ {
        self.breaks.iter().copied().filter(|&b| b > 0.0 && b < 1.0)
    }
}

/// Step size for the current iteration. `rho` is the slack the direction was
/// computed with; `state` carries the decaying schedule.
pub fn choose_epsilon_on(segment: &Segment, policy: EpsilonPolicy, rho: f64, state: &mut EpsilonState) -> f64 {
    match policy {
        EpsilonPolicy::FixedHalfRho => rho / 2.0,
        EpsilonPolicy::Constant(eps) => eps,
        EpsilonPolicy::TernaryThenDecay => {
            if segment.start().gap() > TERNARY_REGIME {
                segment.ternary_minimizer(TERNARY_WIDTH)
            } else {
                state.next_decayed()
            }
        }
        EpsilonPolicy::ExactLineMin => segment.exact_minimizer(),
    }
}

/// [`choose_epsilon_on`] for a profile and a direction.
pub fn choose_epsilon(
    r: &PayoffMatrix,
    z: &StrategyProfile,
    direction: &StrategyProfile,
    policy: EpsilonPolicy,
    rho: f64,
    state: &mut EpsilonState,
) -> Result<f64, GameError> {
    let segment = Segment::between(r, z, direction)?;
    Ok(choose_epsilon_on(&segment, policy, rho, state))
}

/// Halves `eps` until the step no longer increases the gap.
pub(crate) fn safeguard(segment: &Segment, mut eps: f64) -> f64 {
    let start = segment.start().gap();
    let mut halvings = 0;
    while segment.gap_at(eps) > start && halvings < 60 {
        eps *= 0.5;
        halvings += 1;
    }
    eps
}
