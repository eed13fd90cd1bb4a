//! Monte Carlo estimation of the payoff matrix.
//!
//! Row `i` (Byzantine flip probability `grid_b[i]`) draws its own trials from
//! `row_seed(seed, i)`; trial `t` of that row uses ChaCha stream `t` of the
//! row seed, so results do not depend on scheduling or thread count. Every
//! FC strategy in a row is evaluated on the same realizations (common random
//! numbers). Error counts are accumulated as integers, which makes the
//! parallel reduction exact.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Matrix, PayoffMatrix, StrategyGrid};
use crate::error::{Error, Result};
use crate::fusion::{
    fuse_majority, Fuser, FusionAssumption, HypothesisCounts, MAX_HYPOTHESIS_BITS,
};
use crate::model::{
    check_probability, sample_placement, sample_reports, sample_states, ByzantineModel,
};

const CHUNK: u64 = 64;

/// Network size, observation length, local error, the placement model the
/// Byzantines are actually drawn from and the one the FC assumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub true_model: ByzantineModel,
    pub fc_model: ByzantineModel,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidScenario("m must be at least 1".into()));
        }
        if self.m > MAX_HYPOTHESIS_BITS {
            return Err(Error::TooManyHypotheses {
                m: self.m,
                limit: MAX_HYPOTHESIS_BITS,
            });
        }
        check_probability("eps", self.eps)?;
        self.true_model.validate(self.n)?;
        self.fc_model.validate(self.n)
    }
}

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of payoff row `row`: `mix64(seed + (row + 1) * golden)`.
pub fn row_seed(seed: u64, row: usize) -> u64 {
    mix64(seed.wrapping_add((row as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Random stream for one trial of a row.
pub fn trial_rng(row_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(row_seed);
    rng.set_stream(trial);
    rng
}

/// Estimated payoff under both error functionals, plus the majority-vote
/// baseline on the same realizations (one value per row).
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffEstimate {
    pub component: PayoffMatrix,
    pub sequence: PayoffMatrix,
    pub majority_component: Vec<f64>,
    pub majority_sequence: Vec<f64>,
}

impl PayoffEstimate {
    pub fn matrix(&self, metric: super::ErrorMetric) -> &PayoffMatrix {
        match metric {
            super::ErrorMetric::PerComponent => &self.component,
            super::ErrorMetric::PerSequence => &self.sequence,
        }
    }

    pub fn majority(&self, metric: super::ErrorMetric) -> &[f64] {
        match metric {
            super::ErrorMetric::PerComponent => &self.majority_component,
            super::ErrorMetric::PerSequence => &self.majority_sequence,
        }
    }
}

/// Integer error tallies for one cell.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    bits: u64,
    bits_sq: u64,
    sequences: u64,
}

impl Tally {
    fn record(&mut self, hamming: u32) {
        let h = hamming as u64;
        self.bits += h;
        self.bits_sq += h * h;
        self.sequences += (h > 0) as u64;
    }

    fn merge(&mut self, other: &Tally) {
        self.bits += other.bits;
        self.bits_sq += other.bits_sq;
        self.sequences += other.sequences;
    }

    /// Per-component mean and standard error from per-trial Hamming fractions.
    fn component(&self, trials: u64, m: usize) -> (f64, f64) {
        let t = trials as f64;
        let mf = m as f64;
        let mean = self.bits as f64 / (t * mf);
        let se = if trials > 1 {
            let second = self.bits_sq as f64 / (t * mf * mf);
            ((second - mean * mean).max(0.0) * t / (t - 1.0) / t).sqrt()
        } else {
            (mean * (1.0 - mean)).max(0.0).sqrt()
        };
        (mean, se)
    }

    fn sequence(&self, trials: u64) -> (f64, f64) {
        let p = self.sequences as f64 / trials as f64;
        (p, (p * (1.0 - p) / trials as f64).sqrt())
    }
}

fn estimate_row(
    scenario: &Scenario,
    pmal_b: f64,
    fusers: &[Fuser],
    trials: u64,
    seed: u64,
) -> Vec<Tally> {
    let cols = fusers.len();
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map_init(
            || fusers.to_vec(),
            |fusers, chunk| {
                // Last slot is the majority baseline.
                let mut tallies = vec![Tally::default(); cols + 1];
                for trial in chunk * CHUNK..((chunk + 1) * CHUNK).min(trials) {
                    let mut rng = trial_rng(seed, trial);
                    let states = sample_states(&mut rng, scenario.m);
                    let placement = sample_placement(&mut rng, scenario.true_model, scenario.n);
                    let reports =
                        sample_reports(&mut rng, &states, &placement, scenario.eps, pmal_b);
                    let truth = states.code();
                    let counts = HypothesisCounts::new(&reports).expect("m checked by validate");
                    for (fuser, tally) in fusers.iter_mut().zip(tallies.iter_mut()) {
                        tally.record((fuser.decide_code(&counts) ^ truth).count_ones());
                    }
                    tallies[cols].record((fuse_majority(&reports).code() ^ truth).count_ones());
                }
                tallies
            },
        )
        .reduce(
            || vec![Tally::default(); cols + 1],
            |mut acc, part| {
                acc.iter_mut().zip(&part).for_each(|(a, p)| a.merge(p));
                acc
            },
        )
}

/// Estimates the payoff matrix with `trials` realizations per row.
pub fn estimate_payoff_matrix(
    scenario: &Scenario,
    grid_b: &StrategyGrid,
    grid_fc: &StrategyGrid,
    trials: u64,
    seed: u64,
) -> Result<PayoffEstimate> {
    scenario.validate()?;
    if trials == 0 {
        return Err(Error::InvalidScenario("trials must be at least 1".into()));
    }
    let fusers = grid_fc
        .values()
        .iter()
        .map(|&pmal_fc| {
            let assumption = FusionAssumption::new(scenario.fc_model, scenario.eps, pmal_fc)?;
            Fuser::new(&assumption, scenario.n, scenario.m)
        })
        .collect::<Result<Vec<_>>>()?;

    let (rows, cols) = (grid_b.len(), grid_fc.len());
    let mut comp = Matrix::filled(rows, cols, 0.0);
    let mut comp_se = Matrix::filled(rows, cols, 0.0);
    let mut seq = Matrix::filled(rows, cols, 0.0);
    let mut seq_se = Matrix::filled(rows, cols, 0.0);
    let mut majority_component = Vec::with_capacity(rows);
    let mut majority_sequence = Vec::with_capacity(rows);

    for (r, &pmal_b) in grid_b.values().iter().enumerate() {
        let tallies = estimate_row(scenario, pmal_b, &fusers, trials, row_seed(seed, r));
        for (c, tally) in tallies[..cols].iter().enumerate() {
            let (p, se) = tally.component(trials, scenario.m);
            comp.set(r, c, p);
            comp_se.set(r, c, se);
            let (p, se) = tally.sequence(trials);
            seq.set(r, c, p);
            seq_se.set(r, c, se);
        }
        majority_component.push(tallies[cols].component(trials, scenario.m).0);
        majority_sequence.push(tallies[cols].sequence(trials).0);
    }

    let wrap = |pe, se| PayoffMatrix {
        row_values: grid_b.values().to_vec(),
        col_values: grid_fc.values().to_vec(),
        pe,
        stderr: Some(se),
        trials,
        seed,
    };
    Ok(PayoffEstimate {
        component: wrap(comp, comp_se),
        sequence: wrap(seq, seq_se),
        majority_component,
        majority_sequence,
    })
}
