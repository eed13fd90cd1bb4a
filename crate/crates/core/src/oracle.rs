//! Exhaustive reference computations for tiny networks.
//!
//! Everything here works in the linear domain and enumerates placements,
//! hypotheses and report matrices literally. It shares no likelihood code with
//! [`crate::fusion`] or [`crate::dp`], so agreement between the two is a real
//! cross-check.

use crate::error::{Error, Result};
use crate::fusion::{Fuser, FusionAssumption, HypothesisCounts};
use crate::game::ErrorMetric;
use crate::model::{
    check_probability, crossover_delta, ByzantineModel, NodePlacement, ReportMatrix, StateSequence,
};

/// Largest network enumerated over all `2^n` placements.
pub const MAX_ENUMERATED_NODES: usize = 16;
/// Largest network for the analytic independent-node likelihood.
pub const MAX_INDEPENDENT_NODES: usize = 20;
/// Largest `n*m` for exhaustive report enumeration.
pub const MAX_REPORT_BITS: usize = 18;

/// A game instance small enough to enumerate every report matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactScenario {
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub pmal_b: f64,
    pub pmal_fc: f64,
    pub true_model: ByzantineModel,
    pub fc_model: ByzantineModel,
}

impl ExactScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n > 6 || self.m > 3 || self.m == 0 || self.n * self.m > MAX_REPORT_BITS {
            return Err(Error::EnumerationLimit(format!(
                "exact scenarios need n <= 6, 1 <= m <= 3 (got n = {}, m = {})",
                self.n, self.m
            )));
        }
        check_probability("eps", self.eps)?;
        check_probability("pmal_b", self.pmal_b)?;
        check_probability("pmal_fc", self.pmal_fc)?;
        self.true_model.validate(self.n)?;
        self.fc_model.validate(self.n)
    }
}

fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `P(a^n)` under `model`.
pub fn placement_prior(model: ByzantineModel, placement: &NodePlacement) -> f64 {
    let n = placement.len();
    let count = placement.count();
    match model {
        ByzantineModel::UnconstrainedMaxEntropy => 0.5f64.powi(n as i32),
        ByzantineModel::IndependentAlpha(alpha) => placement
            .flags()
            .iter()
            .map(|&b| if b { alpha } else { 1.0 - alpha })
            .product(),
        ByzantineModel::BoundedBelowHalf => {
            if 2 * count < n {
                let admissible: f64 = (0..=n).filter(|k| 2 * k < n).map(|k| choose(n, k)).sum();
                1.0 / admissible
            } else {
                0.0
            }
        }
        ByzantineModel::FixedCount(k) => {
            if count == k {
                1.0 / choose(n, k)
            } else {
                0.0
            }
        }
    }
}

/// `P(r | a^n, s^m)` with crossover `eps` for honest and `delta` for
/// Byzantine nodes.
pub fn report_probability(
    r: &ReportMatrix,
    placement: &NodePlacement,
    s: &StateSequence,
    eps: f64,
    delta: f64,
) -> f64 {
    let mut p = 1.0;
    for i in 0..r.nodes() {
        let flip = if placement.is_byzantine(i) {
            delta
        } else {
            eps
        };
        for (j, &sj) in s.bits().iter().enumerate() {
            p *= if r.get(i, j) == sj { 1.0 - flip } else { flip };
        }
    }
    p
}

fn placements(n: usize) -> impl Iterator<Item = NodePlacement> {
    (0..1u64 << n).map(move |code| NodePlacement::new((0..n).map(|i| code >> i & 1 == 1).collect()))
}

/// `P(r | s^m)` averaged over placements.
pub fn exact_likelihood(
    r: &ReportMatrix,
    s: &StateSequence,
    model: ByzantineModel,
    eps: f64,
    delta: f64,
) -> Result<f64> {
    let n = r.nodes();
    if r.len() != s.len() {
        return Err(Error::DimensionMismatch(
            "report and state lengths differ".into(),
        ));
    }
    model.validate(n)?;
    if n <= MAX_ENUMERATED_NODES {
        return Ok(placements(n)
            .map(|a| {
                let prior = placement_prior(model, &a);
                if prior == 0.0 {
                    0.0
                } else {
                    prior * report_probability(r, &a, s, eps, delta)
                }
            })
            .sum());
    }
    match model.independent_alpha() {
        Some(alpha) if n <= MAX_INDEPENDENT_NODES => {
            Ok(node_mixture_likelihood(r, s, alpha, eps, delta))
        }
        _ => Err(Error::EnumerationLimit(format!(
            "exact likelihood for {model} is limited to n <= {MAX_ENUMERATED_NODES}"
        ))),
    }
}

/// `P(r | s^m)` for independent node states: a product over nodes of the
/// two-component mixture. Same marginal as enumerating placements, with far
/// less rounding.
fn node_mixture_likelihood(
    r: &ReportMatrix,
    s: &StateSequence,
    alpha: f64,
    eps: f64,
    delta: f64,
) -> f64 {
    let honest = NodePlacement::honest(1);
    let byz = NodePlacement::new(vec![true]);
    (0..r.nodes())
        .map(|i| {
            let row = ReportMatrix::new(1, r.len(), r.row(i).to_vec()).expect("one row");
            (1.0 - alpha) * report_probability(&row, &honest, s, eps, delta)
                + alpha * report_probability(&row, &byz, s, eps, delta)
        })
        .product()
}

/// Arg-max of [`exact_likelihood`] over all hypotheses; the lowest code wins
/// among values equal to relative `1e-9`.
pub fn exact_map_decision(
    r: &ReportMatrix,
    model: ByzantineModel,
    eps: f64,
    delta: f64,
) -> Result<StateSequence> {
    let m = r.len();
    let mut best = StateSequence::zeros(m);
    let mut best_value = exact_likelihood(r, &best, model, eps, delta)?;
    for code in 1..1u64 << m {
        let s = StateSequence::from_code(code, m);
        let value = exact_likelihood(r, &s, model, eps, delta)?;
        if value > best_value * (1.0 + 1e-9) {
            best = s;
            best_value = value;
        }
    }
    Ok(best)
}

/// Exact FC error probability of the fusion rule for `sc`, summing over every
/// state sequence, placement and report matrix.
pub fn exact_error_probability(sc: &ExactScenario, metric: ErrorMetric) -> Result<f64> {
    sc.validate()?;
    let (n, m) = (sc.n, sc.m);
    let delta_b = crossover_delta(sc.eps, sc.pmal_b);
    let mut fuser = Fuser::new(
        &FusionAssumption::new(sc.fc_model, sc.eps, sc.pmal_fc)?,
        n,
        m,
    )?;
    let priors: Vec<(NodePlacement, f64)> = placements(n)
        .map(|a| {
            let p = placement_prior(sc.true_model, &a);
            (a, p)
        })
        .filter(|(_, p)| *p > 0.0)
        .collect();
    let states: Vec<StateSequence> = (0..1u64 << m)
        .map(|c| StateSequence::from_code(c, m))
        .collect();
    let state_prior = 0.5f64.powi(m as i32);

    let mut total = CompensatedSum::default();
    for code in 0..1u64 << (n * m) {
        let r = ReportMatrix::from_code(code, n, m);
        let decision = StateSequence::from_code(fuser.decide_code(&HypothesisCounts::new(&r)?), m);
        for s in &states {
            let err = match metric {
                ErrorMetric::PerComponent => decision.hamming(s) as f64 / m as f64,
                ErrorMetric::PerSequence => (decision != *s) as u8 as f64,
            };
            if err == 0.0 {
                continue;
            }
            let likelihood = match sc.true_model.independent_alpha() {
                Some(alpha) => node_mixture_likelihood(&r, s, alpha, sc.eps, delta_b),
                None => priors
                    .iter()
                    .map(|(a, p)| p * report_probability(&r, a, s, sc.eps, delta_b))
                    .sum(),
            };
            total.add(state_prior * likelihood * err);
        }
    }
    Ok(total.value())
}

/// Neumaier summation; the oracle adds up to `2^18 * 2^m` small terms.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}
