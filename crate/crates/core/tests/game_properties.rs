//! Solver properties on random games.

use byzfuse::game::{
    best_response_values, find_pure_equilibria, solve_by_support_enumeration, solve_lp,
};
use byzfuse::{solve_mixed, EquilibriumKind, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng) -> Matrix {
    let rows = rng.gen_range(1..=8);
    let cols = rng.gen_range(1..=8);
    Matrix::new(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

#[test]
fn lp_duality_gap_closes() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..1000 {
        let a = random_matrix(&mut rng);
        let (p, q, v) = solve_lp(&a).unwrap();
        let (hi, lo) = best_response_values(&a, &p, &q);
        assert!(hi - lo <= 1e-9, "gap {}", hi - lo);
        assert!((v - a.bilinear(&p, &q)).abs() <= 1e-9);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn support_enumeration_agrees_on_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for _ in 0..300 {
        let a = random_matrix(&mut rng);
        let (_, _, v_lp) = solve_lp(&a).unwrap();
        let (p, q, v) = solve_by_support_enumeration(&a, 1e-9).unwrap();
        assert!((v - v_lp).abs() <= 1e-9);
        // Every strategy in the support earns the value.
        for r in (0..a.rows()).filter(|&r| p[r] > 0.0) {
            let payoff: f64 = (0..a.cols()).map(|c| a.get(r, c) * q[c]).sum();
            assert!((payoff - v).abs() <= 1e-8);
        }
    }
}

#[test]
fn saddle_values_are_entries() {
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    let mut seen = 0;
    for _ in 0..2000 {
        // Coarse integer entries make saddles common.
        let rows = rng.gen_range(1..=6);
        let cols = rng.gen_range(1..=6);
        let a = Matrix::new(
            rows,
            cols,
            (0..rows * cols)
                .map(|_| rng.gen_range(0..5) as f64)
                .collect(),
        )
        .unwrap();
        let saddles = find_pure_equilibria(&a);
        let eq = solve_mixed(&a, 1e-9).unwrap();
        if let Some(&(r, c)) = saddles.first() {
            seen += 1;
            assert_eq!(eq.kind, EquilibriumKind::Pure { row: r, col: c });
            assert_eq!(eq.value, a.get(r, c));
            for &(r2, c2) in &saddles {
                assert_eq!(a.get(r2, c2), eq.value);
            }
        } else {
            assert!(!eq.is_pure());
        }
    }
    assert!(seen > 100);
}

proptest! {
    #[test]
    fn value_shifts_with_the_matrix(
        entries in prop::collection::vec(-1.0f64..1.0, 12),
        shift in -2.0f64..2.0,
        scale in 0.1f64..10.0,
    ) {
        let a = Matrix::new(3, 4, entries.clone()).unwrap();
        let b = Matrix::new(3, 4, entries.iter().map(|x| x * scale + shift).collect()).unwrap();
        let va = solve_mixed(&a, 1e-9).unwrap().value;
        let vb = solve_mixed(&b, 1e-9).unwrap().value;
        prop_assert!((vb - (va * scale + shift)).abs() < 1e-8);
    }

    #[test]
    fn value_lies_between_pure_security_levels(entries in prop::collection::vec(0.0f64..1.0, 20)) {
        let a = Matrix::new(4, 5, entries).unwrap();
        let maximin = (0..4)
            .map(|r| a.row(r).iter().copied().fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max);
        let minimax = (0..5)
            .map(|c| (0..4).map(|r| a.get(r, c)).fold(f64::NEG_INFINITY, f64::max))
            .fold(f64::INFINITY, f64::min);
        let v = solve_mixed(&a, 1e-9).unwrap().value;
        prop_assert!(maximin - 1e-12 <= v && v <= minimax + 1e-12);
    }
}
