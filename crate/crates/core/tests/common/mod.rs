//! Reference computations for the integration tests, written against plain
//! `Vec<Vec<f64>>` data so they share no code with the library under test.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect()
}

/// A point of the simplex, drawn by normalizing exponentials. With
/// probability one half a random subset of coordinates is zeroed first, so
/// that faces of the simplex are covered too.
pub fn random_simplex_point(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let sparse = rng.random_bool(0.5);
    let mut p: Vec<f64> = (0..len)
        .map(|_| {
            if sparse && rng.random_bool(0.5) {
                0.0
            } else {
                -rng.random::<f64>().max(1e-300).ln()
            }
        })
        .collect();
    if p.iter().all(|&v| v == 0.0) {
        p[rng.random_range(0..len)] = 1.0;
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

/// `max_i (R y)_i - min_j (x^T R)_j`, evaluated by direct summation.
pub fn gap_oracle(r: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    let best_row = r
        .iter()
        .map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_col = (0..y.len())
        .map(|j| r.iter().zip(x).map(|(row, xi)| row[j] * xi).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    best_row - worst_col
}

pub fn mix(a: &[f64], b: &[f64], eps: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| (1.0 - eps) * p + eps * q).collect()
}

/// Forward difference `(V(z + eps (z' - z)) - V(z)) / eps`.
pub fn difference_quotient(r: &[Vec<f64>], x: &[f64], y: &[f64], dx: &[f64], dy: &[f64], eps: f64) -> f64 {
    let moved = gap_oracle(r, &mix(x, dx, eps), &mix(y, dy, eps));
    (moved - gap_oracle(r, x, y)) / eps
}
