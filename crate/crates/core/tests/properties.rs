mod common;

use dualgap::descent::{descent_step, solve, SolveConfig};
use dualgap::directional::{directional_derivative, rho_directional_derivative};
use dualgap::{MixedStrategy, PayoffMatrix, StrategyProfile};
use proptest::prelude::*;

use common::{difference_quotient, gap_oracle, random_matrix, random_simplex_point, rng};

struct Sample {
    rows: Vec<Vec<f64>>,
    r: PayoffMatrix,
    z: StrategyProfile,
    dir: StrategyProfile,
}

fn sample(seed: u64, m: usize, n: usize) -> Sample {
    let mut g = rng(seed);
    let rows = random_matrix(&mut g, m, n);
    let mut profile = || {
        StrategyProfile::new(
            MixedStrategy::new(random_simplex_point(&mut g, m)).unwrap(),
            MixedStrategy::new(random_simplex_point(&mut g, n)).unwrap(),
        )
    };
    let (z, dir) = (profile(), profile());
    Sample {
        r: PayoffMatrix::from_rows(&rows).unwrap(),
        rows,
        z,
        dir,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_matches_the_difference_quotient(seed in any::<u64>(), m in 1usize..9, n in 1usize..9) {
        let s = sample(seed, m, n);
        let closed = directional_derivative(&s.r, &s.z, &s.dir).unwrap().value;
        let quotient = difference_quotient(&s.rows, s.z.row.probs(), s.z.col.probs(), s.dir.row.probs(), s.dir.col.probs(), 1e-8);
        prop_assert!((closed - quotient).abs() <= 1e-5, "closed {closed} vs quotient {quotient}");
    }

    #[test]
    fn rho_derivative_bounds_the_exact_one(seed in any::<u64>(), m in 1usize..9, n in 1usize..9, rho in 0.01f64..1.0) {
        let s = sample(seed, m, n);
        let exact = directional_derivative(&s.r, &s.z, &s.dir).unwrap();
        let wide = rho_directional_derivative(&s.r, &s.z, &s.dir, rho).unwrap();
        prop_assert!(wide.value >= exact.value - 1e-12);
        prop_assert!(exact.row_active_set.is_subset_of(&wide.row_active_set));
        prop_assert!(exact.col_active_set.is_subset_of(&wide.col_active_set));
    }

    /// With `eps <= rho / 2` no strategy outside the `rho`-sets can become a
    /// best response, so the gap follows the linear model of the step.
    #[test]
    fn small_steps_follow_the_linear_model(seed in any::<u64>(), m in 1usize..12, n in 1usize..12, rho in 0.02f64..1.0, frac in 0.0f64..=1.0) {
        let s = sample(seed, m, n);
        let eps = frac * rho / 2.0;
        let (next, step) = descent_step(&s.r, &s.z, rho, eps, 1e-10).unwrap();
        let before = gap_oracle(&s.rows, s.z.row.probs(), s.z.col.probs());
        let after = gap_oracle(&s.rows, next.row.probs(), next.col.probs());
        prop_assert!((step.v_before - before).abs() < 1e-12);
        prop_assert!((step.v_after - after).abs() < 1e-12);
        prop_assert!(step.gamma <= before + 1e-9);
        prop_assert!(after <= (1.0 - eps) * before + eps * step.gamma + 1e-9);
    }
}

#[test]
fn identical_configs_give_identical_traces() {
    let s = sample(99, 40, 35);
    for cfg in [SolveConfig::plain(0.02, 0.1), SolveConfig::decay_delta_rho(0.02), SolveConfig::fixed_support(0.02, 8)] {
        let (z1, t1) = solve(&s.r, &cfg).unwrap();
        let (z2, t2) = solve(&s.r, &cfg).unwrap();
        assert_eq!(z1, z2);
        assert_eq!(t1.to_csv_string(), t2.to_csv_string());
    }
}
