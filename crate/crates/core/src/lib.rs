//! Approximate Nash equilibria of bilinear zero-sum games by steepest descent
//! on the duality gap.
//!
//! The crate is organized bottom-up:
//!
//! - [`game`]: payoff matrices, strategies, regrets and the duality gap;
//! - [`directional`]: closed-form directional derivatives of the gap;
//! - [`lp`]: a dense simplex solver and the direction-finding programs;
//! - [`descent`]: the descent solvers and their step-size policies;
//! - [`ogda`]: projected optimistic gradient descent/ascent, for comparison;
//! - [`generators`]: seeded random games;
//! - [`bench`] and [`cli`]: the benchmark harness and command-line front end.

pub mod bench;
pub mod cli;
pub mod descent;
pub mod directional;
pub mod error;
pub mod game;
pub mod generators;
pub mod io;
pub mod lp;
pub mod ogda;
pub mod trace;

pub use error::{BenchError, GameError, IoError, LpError, SolveError};
pub use game::{
    best_responses, duality_gap, is_delta_ne, normalize_payoffs, regret_col, regret_row,
    BestResponseSet, DenseMatrix, MixedStrategy, PayoffMatrix, Player, StrategyProfile,
};
