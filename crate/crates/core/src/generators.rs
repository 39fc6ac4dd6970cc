//! Seeded random games.
//!
//! Each spec gets its own ChaCha8 stream: the seed picks the key and a hash of
//! `(family, rank, m, n)` picks the stream, so two specs that share a seed
//! still draw independent matrices and the output does not depend on the
//! platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::GameError;
use crate::game::{normalize_payoffs, DenseMatrix, PayoffMatrix};

/// Recorded in trace metadata next to the spec.
pub const PRNG_NAME: &str = "ChaCha8 (rand_chacha 0.9), stream = splitmix64(family, rank, m, n)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GameFamily {
    Uniform,
    Gaussian,
    LowRank { rank: usize },
}

impl GameFamily {
    pub fn name(&self) -> String {
        match self {
            GameFamily::Uniform => "uniform".into(),
            GameFamily::Gaussian => "gaussian".into(),
            GameFamily::LowRank { rank } => format!("low-rank-{rank}"),
        }
    }

    fn tag(&self) -> (u64, u64) {
        match self {
            GameFamily::Uniform => (1, 0),
            GameFamily::Gaussian => (2, 0),
            GameFamily::LowRank { rank } => (3, *rank as u64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSpec {
    pub family: GameFamily,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
}

impl GameSpec {
    pub fn uniform(n: usize, seed: u64) -> Self {
        Self {
            family: GameFamily::Uniform,
            rows: n,
            cols: n,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(GameError::Empty);
        }
        if let GameFamily::LowRank { rank } = self.family {
            if rank == 0 || rank > self.rows.min(self.cols) {
                return Err(GameError::InvalidParameter(format!(
                    "rank {rank} must lie in [1, min({}, {})]",
                    self.rows, self.cols
                )));
            }
        }
        Ok(())
    }

    /// Human-readable description used in summaries and metadata.
    pub fn describe(&self) -> String {
        format!("{} {}x{} seed {}", self.family.name(), self.rows, self.cols, self.seed)
    }

    fn rng(&self) -> ChaCha8Rng {
        let (family, rank) = self.family.tag();
        let mut stream = splitmix64(family);
        for word in [rank, self.rows as u64, self.cols as u64] {
            stream = splitmix64(stream ^ word);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn generate(spec: &GameSpec) -> Result<PayoffMatrix, GameError> {
    spec.validate()?;
    let mut rng = spec.rng();
    let (m, n) = (spec.rows, spec.cols);
    match spec.family {
        GameFamily::Uniform => {
            let data = (0..m * n).map(|_| rng.random::<f64>()).collect();
            PayoffMatrix::new(DenseMatrix::new(m, n, data)?)
        }
        GameFamily::Gaussian => {
            let data = (0..m * n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            normalize_payoffs(&DenseMatrix::new(m, n, data)?)
        }
        GameFamily::LowRank { rank } => normalize_payoffs(&factor_product(&mut rng, m, n, rank)?),
    }
}

/// `U V^T` before rescaling, with `U` (m x rank) and `V` (n x rank) uniform.
pub fn low_rank_product(spec: &GameSpec) -> Result<DenseMatrix, GameError> {
    spec.validate()?;
    let GameFamily::LowRank { rank } = spec.family else {
        return Err(GameError::InvalidParameter(format!("{} is not a low-rank family", spec.family.name())));
    };
    factor_product(&mut spec.rng(), spec.rows, spec.cols, rank)
}

fn factor_product(rng: &mut ChaCha8Rng, m: usize, n: usize, rank: usize) -> Result<DenseMatrix, GameError> {
    let u: Vec<f64> = (0..m * rank).map(|_| rng.random()).collect();
    let v: Vec<f64> = (0..n * rank).map(|_| rng.random()).collect();
    let mut data = vec![0.0; m * n];
    for i in 0..m {
        let ui = &u[i * rank..(i + 1) * rank];
        for j in 0..n {
            let vj = &v[j * rank..(j + 1) * rank];
            data[i * n + j] = ui.iter().zip(vj).map(|(a, b)| a * b).sum();
        }
    }
    DenseMatrix::new(m, n, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_spec_same_matrix() {
        for family in [GameFamily::Uniform, GameFamily::Gaussian, GameFamily::LowRank { rank: 3 }] {
            let spec = GameSpec {
                family,
                rows: 7,
                cols: 5,
                seed: 42,
            };
            assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
            let other = GameSpec { seed: 43, ..spec };
            assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
        }
    }

    #[test]
    fn shared_seed_gives_independent_families() {
        let a = generate(&GameSpec::uniform(6, 1)).unwrap();
        let b = generate(&GameSpec {
            family: GameFamily::Gaussian,
            ..GameSpec::uniform(6, 1)
        })
        .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn gaussian_hits_both_endpoints() {
        for seed in 0..5 {
            let r = generate(&GameSpec {
                family: GameFamily::Gaussian,
                rows: 12,
                cols: 9,
                seed,
            })
            .unwrap();
            let entries = r.matrix().as_slice();
            assert_eq!(entries.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
            assert_eq!(entries.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
    }

    #[test]
    fn uniform_entries_in_range() {
        let r = generate(&GameSpec::uniform(30, 9)).unwrap();
        assert!(r.matrix().as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn rejects_bad_specs() {
        let spec = GameSpec {
            family: GameFamily::LowRank { rank: 6 },
            rows: 5,
            cols: 8,
            seed: 0,
        };
        assert!(matches!(generate(&spec), Err(GameError::InvalidParameter(_))));
        assert!(matches!(generate(&GameSpec::uniform(0, 0)), Err(GameError::Empty)));
        assert!(low_rank_product(&GameSpec::uniform(3, 0)).is_err());
    }

    #[test]
    fn low_rank_product_matches_generated_game() {
        let spec = GameSpec {
            family: GameFamily::LowRank { rank: 2 },
            rows: 6,
            cols: 4,
            seed: 5,
        };
        let raw = low_rank_product(&spec).unwrap();
        assert_eq!(normalize_payoffs(&raw).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn low_rank_factors_have_the_requested_rank() {
        let spec = GameSpec {
            family: GameFamily::LowRank { rank: 10 },
            rows: 200,
            cols: 200,
            seed: 17,
        };
        let raw = low_rank_product(&spec).unwrap();
        let sv = nalgebra::DMatrix::from_row_slice(200, 200, raw.as_slice()).singular_values();
        let top = sv.max();
        assert_eq!(sv.iter().filter(|&&s| s > 1e-8 * top).count(), 10);

        let game = generate(&spec).unwrap();
        let sv = nalgebra::DMatrix::from_row_slice(200, 200, game.matrix().as_slice()).singular_values();
        let top = sv.max();
        assert!(sv.iter().filter(|&&s| s > 1e-8 * top).count() <= 11);
    }
}
