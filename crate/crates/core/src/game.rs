//! Payoff matrices, mixed strategies, regrets and the duality gap.
//!
//! A game is always the pair `(R, -R)`: the row player receives `x^T R y`
//! and the column player its negation. Every payoff matrix handled by the
//! solvers lives in `[0, 1]`, which is what the step-size analysis relies on.

use serde::{Deserialize, Serialize};

use crate::error::GameError;

/// Absolute tolerance on `sum(p) - 1` accepted for a stored strategy.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;
/// Larger deviations up to this size are renormalized on construction.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;
/// Slack used when testing best-response membership.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Dense row-major matrix without any range restriction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, GameError> {
        if rows == 0 || cols == 0 {
            return Err(GameError::Empty);
        }
        if data.len() != rows * cols {
            return Err(GameError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows, rejecting ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GameError> {
        let cols = rows.first().map(Vec::len).ok_or(GameError::Empty)?;
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (line, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(GameError::Ragged {
                    line: line + 1,
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// Matrix-vector product `A v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        self.data
            .chunks(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Vector-matrix product `u^T A`.
    pub fn vec_mul(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (row, &w) in self.data.chunks(self.cols).zip(u) {
            if w == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += w * a;
            }
        }
        out
    }

    fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Row player's payoffs, every entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixDocument", into = "MatrixDocument")]
pub struct PayoffMatrix(DenseMatrix);

impl PayoffMatrix {
    /// Wraps a matrix whose entries already lie in `[0, 1]`.
    pub fn new(matrix: DenseMatrix) -> Result<Self, GameError> {
        for (k, &v) in matrix.data.iter().enumerate() {
            if !v.is_finite() {
                return Err(GameError::NonFinite {
                    row: k / matrix.cols,
                    col: k % matrix.cols,
                });
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(GameError::OutOfRange {
                    row: k / matrix.cols,
                    col: k % matrix.cols,
                    value: v,
                });
            }
        }
        Ok(Self(matrix))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GameError> {
        Self::new(DenseMatrix::from_rows(rows)?)
    }

    /// A matrix with every entry equal to `value`.
    pub fn constant(rows: usize, cols: usize, value: f64) -> Result<Self, GameError> {
        Self::new(DenseMatrix::new(rows, cols, vec![value; rows * cols])?)
    }

    pub fn rows(&self) -> usize {
        self.0.rows
    }

    pub fn cols(&self) -> usize {
        self.0.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    /// Payoff of every pure row strategy against `y`, i.e. `R y`.
    pub fn row_payoffs(&self, y: &[f64]) -> Vec<f64> {
        self.0.mul_vec(y)
    }

    /// Payoff conceded by every pure column strategy against `x`, i.e. `x^T R`.
    pub fn col_payoffs(&self, x: &[f64]) -> Vec<f64> {
        self.0.vec_mul(x)
    }

    /// Payoffs of both players' pure strategies against `z`.
    pub fn profile_payoffs(&self, z: &StrategyProfile) -> ProfilePayoffs {
        ProfilePayoffs {
            row: self.row_payoffs(z.col.probs()),
            col: self.col_payoffs(z.row.probs()),
        }
    }

    pub(crate) fn check_profile(&self, z: &StrategyProfile) -> Result<(), GameError> {
        check_len(self.rows(), z.row.len())?;
        check_len(self.cols(), z.col.len())
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixDocument {
    m: usize,
    n: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<MatrixDocument> for PayoffMatrix {
    type Error = GameError;

    fn try_from(doc: MatrixDocument) -> Result<Self, Self::Error> {
        let matrix = DenseMatrix::from_rows(&doc.entries)?;
        if matrix.rows() != doc.m || matrix.cols() != doc.n {
            return Err(GameError::DimensionMismatch {
                expected: doc.m * doc.n,
                found: matrix.rows() * matrix.cols(),
            });
        }
        Self::new(matrix)
    }
}

impl From<PayoffMatrix> for MatrixDocument {
    fn from(r: PayoffMatrix) -> Self {
        MatrixDocument {
            m: r.rows(),
            n: r.cols(),
            entries: r.0.to_rows(),
        }
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), GameError> {
    if expected == found {
        Ok(())
    } else {
        Err(GameError::DimensionMismatch { expected, found })
    }
}

/// Affinely rescales a finite matrix onto `[0, 1]`.
///
/// The equilibria are unchanged by the rescale. A constant matrix maps to
/// the all-0.5 matrix, for which every profile is an equilibrium.
pub fn normalize_payoffs(raw: &DenseMatrix) -> Result<PayoffMatrix, GameError> {
    if let Some(k) = raw.data.iter().position(|v| !v.is_finite()) {
        return Err(GameError::NonFinite {
            row: k / raw.cols,
            col: k % raw.cols,
        });
    }
    let (lo, hi) = raw.min_max();
    let data = if hi > lo {
        let span = hi - lo;
        raw.data
            .iter()
            .map(|v| ((v - lo) / span).clamp(0.0, 1.0))
            .collect()
    } else {
        vec![0.5; raw.data.len()]
    };
    PayoffMatrix::new(DenseMatrix::new(raw.rows, raw.cols, data)?)
}

/// A probability vector over one player's pure strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    /// Validates `probs`, renormalizing small drift in the total mass.
    pub fn new(mut probs: Vec<f64>) -> Result<Self, GameError> {
        if probs.is_empty() {
            return Err(GameError::Empty);
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -MEMBERSHIP_SLACK {
                return Err(GameError::InvalidStrategy(format!(
                    "component {p} is not a probability"
                )));
            }
            *p = p.max(0.0);
        }
        let total: f64 = probs.iter().sum();
        let drift = (total - 1.0).abs();
        if drift > RENORMALIZE_TOLERANCE {
            return Err(GameError::InvalidStrategy(format!(
                "components sum to {total}, not 1"
            )));
        }
        if drift > 0.0 {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        Ok(Self(probs))
    }

    /// The vertex `e_index` of the simplex.
    pub fn pure(len: usize, index: usize) -> Self {
        assert!(index < len, "pure strategy {index} out of range for {len}");
        let mut probs = vec![0.0; len];
        probs[index] = 1.0;
        Self(probs)
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0);
        Self(vec![1.0 / len as f64; len])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `(1 - eps) * self + eps * other`.
    pub fn mix(&self, other: &MixedStrategy, eps: f64) -> MixedStrategy {
        debug_assert_eq!(self.len(), other.len());
        MixedStrategy(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (1.0 - eps) * a + eps * b)
                .collect(),
        )
    }

    /// Number of strictly positive components.
    pub fn support_size(&self) -> usize {
        self.0.iter().filter(|&&p| p > 0.0).count()
    }
}

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = GameError;

    fn try_from(probs: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(probs)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(s: MixedStrategy) -> Self {
        s.0
    }
}

/// A pair `(x, y)`. Also used for descent directions `(x', y')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub row: MixedStrategy,
    pub col: MixedStrategy,
}

impl StrategyProfile {
    pub fn new(row: MixedStrategy, col: MixedStrategy) -> Self {
        Self { row, col }
    }

    pub fn pure(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        Self::new(MixedStrategy::pure(rows, i), MixedStrategy::pure(cols, j))
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        Self::new(MixedStrategy::uniform(rows), MixedStrategy::uniform(cols))
    }

    pub fn mix(&self, other: &StrategyProfile, eps: f64) -> StrategyProfile {
        Self::new(self.row.mix(&other.row, eps), self.col.mix(&other.col, eps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    Row,
    Col,
}

/// Pure strategies whose payoff is within `rho` of the best response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponseSet {
    pub player: Player,
    pub rho: f64,
    pub indices: Vec<usize>,
}

impl BestResponseSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn is_subset_of(&self, other: &BestResponseSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }
}

/// Pure-strategy payoffs at a profile: `R y` for the rows and `x^T R` for
/// the columns. Everything the gap and the regrets need.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePayoffs {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

impl ProfilePayoffs {
    pub fn best_row_payoff(&self) -> f64 {
        max_of(&self.row)
    }

    pub fn worst_col_payoff(&self) -> f64 {
        min_of(&self.col)
    }

    pub fn gap(&self) -> f64 {
        self.best_row_payoff() - self.worst_col_payoff()
    }

    /// Row indices with payoff at least `max - rho`, ascending.
    pub fn row_best_responses(&self, rho: f64) -> Vec<usize> {
        let threshold = self.best_row_payoff() - rho - MEMBERSHIP_SLACK;
        (0..self.row.len())
            .filter(|&i| self.row[i] >= threshold)
            .collect()
    }

    /// Column indices with payoff at most `min + rho`, ascending.
    pub fn col_best_responses(&self, rho: f64) -> Vec<usize> {
        let threshold = self.worst_col_payoff() + rho + MEMBERSHIP_SLACK;
        (0..self.col.len())
            .filter(|&j| self.col[j] <= threshold)
            .collect()
    }
}

pub(crate) fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `V(x, y) = max_i e_i^T R y - min_j x^T R e_j`.
pub fn duality_gap(r: &PayoffMatrix, z: &StrategyProfile) -> Result<f64, GameError> {
    r.check_profile(z)?;
    Ok(r.profile_payoffs(z).gap())
}

/// Row player's regret `max_i e_i^T R y - x^T R y`.
pub fn regret_row(r: &PayoffMatrix, z: &StrategyProfile) -> Result<f64, GameError> {
    r.check_profile(z)?;
    let row = r.row_payoffs(z.col.probs());
    Ok(max_of(&row) - dot(z.row.probs(), &row))
}

/// Column player's regret `x^T R y - min_j x^T R e_j`.
pub fn regret_col(r: &PayoffMatrix, z: &StrategyProfile) -> Result<f64, GameError> {
    r.check_profile(z)?;
    let col = r.col_payoffs(z.row.probs());
    Ok(dot(&col, z.col.probs()) - min_of(&col))
}

/// The `rho`-best responses of `player` against the opponent's strategy.
pub fn best_responses(
    r: &PayoffMatrix,
    player: Player,
    opponent: &MixedStrategy,
    rho: f64,
) -> Result<BestResponseSet, GameError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(GameError::InvalidParameter(format!(
            "rho = {rho} is outside [0, 1]"
        )));
    }
    let indices = match player {
        Player::Row => {
            check_len(r.cols(), opponent.len())?;
            let payoffs = ProfilePayoffs {
                row: r.row_payoffs(opponent.probs()),
                col: Vec::new(),
            };
            payoffs.row_best_responses(rho)
        }
        Player::Col => {
            check_len(r.rows(), opponent.len())?;
            let payoffs = ProfilePayoffs {
                row: Vec::new(),
                col: r.col_payoffs(opponent.probs()),
            };
            payoffs.col_best_responses(rho)
        }
    };
    Ok(BestResponseSet {
        player,
        rho,
        indices,
    })
}

/// Whether no player gains more than `delta` by a pure deviation.
pub fn is_delta_ne(r: &PayoffMatrix, z: &StrategyProfile, delta: f64) -> Result<bool, GameError> {
    Ok(regret_row(r, z)? <= delta && regret_col(r, z)? <= delta)
}
