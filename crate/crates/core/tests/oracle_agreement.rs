//! The fast fusion rules against literal enumeration.

use byzfuse::fusion::log_score_independent;
use byzfuse::oracle::{
    exact_error_probability, exact_likelihood, exact_map_decision, ExactScenario,
};
use byzfuse::{
    crossover_delta, fuse, ByzantineModel, ErrorMetric, FusionAssumption, ReportMatrix,
    StateSequence,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn models(n: usize) -> Vec<ByzantineModel> {
    vec![
        ByzantineModel::UnconstrainedMaxEntropy,
        ByzantineModel::IndependentAlpha(0.3),
        ByzantineModel::BoundedBelowHalf,
        ByzantineModel::FixedCount(n / 2),
    ]
}

#[test]
fn fuse_matches_exhaustive_map() {
    let mut mismatches = Vec::new();
    for n in 2..=4 {
        for m in 1..=2 {
            for model in models(n) {
                for eps in [0.1, 0.3] {
                    for pmal in [0.6, 1.0] {
                        let a = FusionAssumption::new(model, eps, pmal).unwrap();
                        let delta = crossover_delta(eps, pmal);
                        for code in 0..1u64 << (n * m) {
                            let r = ReportMatrix::from_code(code, n, m);
                            let fast = fuse(&r, &a).unwrap();
                            let slow = exact_map_decision(&r, model, eps, delta).unwrap();
                            if fast != slow {
                                mismatches.push((n, m, model, eps, pmal, code));
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(mismatches.is_empty(), "{mismatches:?}");
}

#[test]
fn independent_score_factorizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=3);
        let alpha = rng.gen_range(0.01..0.99);
        let eps = rng.gen_range(0.01..0.49);
        let delta = crossover_delta(eps, rng.gen_range(0.0..=1.0));
        let r = ReportMatrix::new(n, m, (0..n * m).map(|_| rng.gen()).collect()).unwrap();
        let s = StateSequence::new((0..m).map(|_| rng.gen()).collect());
        let fast = log_score_independent(&r, &s, alpha, eps, delta)
            .unwrap()
            .exp();
        let slow =
            exact_likelihood(&r, &s, ByzantineModel::IndependentAlpha(alpha), eps, delta).unwrap();
        assert!((fast - slow).abs() <= 1e-12 * slow, "{fast} vs {slow}");
    }
}

#[test]
fn blinded_fc_guesses() {
    for n in 1..=5 {
        let sc = ExactScenario {
            n,
            m: 1,
            eps: 0.1,
            pmal_b: 1.0,
            pmal_fc: 1.0,
            true_model: ByzantineModel::UnconstrainedMaxEntropy,
            fc_model: ByzantineModel::UnconstrainedMaxEntropy,
        };
        let pe = exact_error_probability(&sc, ErrorMetric::PerComponent).unwrap();
        assert_eq!(pe, 0.5, "n = {n}");
    }
}

#[test]
fn more_byzantines_never_help_the_fc() {
    // Exact errors for the matched fixed-count rule grow with the count.
    let mut last = 0.0;
    for k in 0..=2 {
        let sc = ExactScenario {
            n: 5,
            m: 2,
            eps: 0.15,
            pmal_b: 1.0,
            pmal_fc: 1.0,
            true_model: ByzantineModel::FixedCount(k),
            fc_model: ByzantineModel::FixedCount(k),
        };
        let pe = exact_error_probability(&sc, ErrorMetric::PerComponent).unwrap();
        assert!(pe >= last - 1e-15, "k = {k}: {pe} < {last}");
        last = pe;
    }
}
