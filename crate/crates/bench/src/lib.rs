//! Fixtures shared by the criterion benches.

use byzfuse::dp::NodeWeights;
use byzfuse::model::{sample_placement, sample_reports, sample_states};
use byzfuse::{ByzantineModel, ReportMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random per-node weights in `(0, 1)` for `n` nodes.
pub fn random_weights(n: usize, seed: u64) -> NodeWeights {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-3..1.0)).collect();
    let h: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-3..1.0)).collect();
    NodeWeights::from_linear(&b, &h).expect("matching lengths")
}

/// One realistic report matrix: `n_b` Byzantines flipping with `pmal`.
pub fn reports(n: usize, m: usize, n_b: usize, eps: f64, pmal: f64, seed: u64) -> ReportMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = sample_states(&mut rng, m);
    let a = sample_placement(&mut rng, ByzantineModel::FixedCount(n_b), n);
    sample_reports(&mut rng, &s, &a, eps, pmal)
}
