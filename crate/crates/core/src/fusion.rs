//! MAP fusion rules over the whole state sequence.
//!
//! With equiprobable states the MAP decision maximizes `P(r | s^m)`, which
//! depends on each node only through `m_eq(i)`, the number of components on
//! which its reports agree with the hypothesis. An honest node contributes
//! `h = (1-eps)^m_eq eps^(m-m_eq)`, a Byzantine one `b = (1-delta)^m_eq
//! delta^(m-m_eq)`; the placement prior decides how these combine:
//!
//! * independent nodes: `prod_i [(1-alpha) h(i) + alpha b(i)]`;
//! * exactly `n_B` Byzantines: the subset sum `f_{n,n_B}`;
//! * fewer than `n/2` Byzantines: `sum_{k <= ceil(n/2)-1} f_{n,k}`.
//!
//! Scores are log-likelihoods. The arg-max enumerates all `2^m` hypotheses in
//! ascending code order (`s_1` most significant) and keeps the first one
//! whose score is not beaten by more than [`TIE_TOLERANCE`].

use crate::dp::{log_subset_sums_into, subset_sums_into, DpScratch};
use crate::error::{Error, Result};
use crate::logspace::{count_log, log_add_exp, log_sum_exp};
use crate::model::{
    check_probability, crossover_delta, ByzantineModel, ReportMatrix, StateSequence,
};

/// Largest `m` for which the `2^m` hypotheses are enumerated.
pub const MAX_HYPOTHESIS_BITS: usize = 24;

/// Log-scores closer than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// What the FC assumes about the Byzantines when fusing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionAssumption {
    pub model: ByzantineModel,
    pub eps: f64,
    /// The FC's guess of the Byzantines' flip probability.
    pub pmal_fc: f64,
}

impl FusionAssumption {
    pub fn new(model: ByzantineModel, eps: f64, pmal_fc: f64) -> Result<Self> {
        check_probability("eps", eps)?;
        check_probability("pmal_fc", pmal_fc)?;
        Ok(Self {
            model,
            eps,
            pmal_fc,
        })
    }

    pub fn delta_fc(&self) -> f64 {
        crossover_delta(self.eps, self.pmal_fc)
    }
}

/// `m_eq(i)` for every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchCounts(pub Vec<usize>);

impl MatchCounts {
    pub fn counts(&self) -> &[usize] {
        &self.0
    }
}

fn check_dims(r: &ReportMatrix, s: &StateSequence) -> Result<()> {
    if r.len() != s.len() {
        return Err(Error::DimensionMismatch(format!(
            "reports have {} components, hypothesis has {}",
            r.len(),
            s.len()
        )));
    }
    Ok(())
}

pub fn match_counts(r: &ReportMatrix, s: &StateSequence) -> Result<MatchCounts> {
    check_dims(r, s)?;
    Ok(MatchCounts(
        (0..r.nodes())
            .map(|i| {
                r.row(i)
                    .iter()
                    .zip(s.bits())
                    .filter(|(a, b)| a == b)
                    .count()
            })
            .collect(),
    ))
}

/// `log[(1-p)^t p^(m-t)]` for `t = 0..=m`.
fn per_count_table(p: f64, m: usize) -> Vec<f64> {
    (0..=m)
        .map(|t| count_log(t, 1.0 - p) + count_log(m - t, p))
        .collect()
}

/// Independent-node log-score `sum_i log[(1-alpha) h(i) + alpha b(i)]`.
pub fn log_score_independent(
    r: &ReportMatrix,
    s: &StateSequence,
    alpha: f64,
    eps: f64,
    delta_fc: f64,
) -> Result<f64> {
    check_probability("alpha", alpha)?;
    check_probability("eps", eps)?;
    check_probability("delta_fc", delta_fc)?;
    let counts = match_counts(r, s)?;
    let table = independent_table(alpha, eps, delta_fc, r.len());
    Ok(counts.0.iter().map(|&t| table[t]).sum())
}

fn independent_table(alpha: f64, eps: f64, delta: f64, m: usize) -> Vec<f64> {
    let log_h = per_count_table(eps, m);
    let log_b = per_count_table(delta, m);
    let (w_h, w_b) = ((1.0 - alpha).ln(), alpha.ln());
    log_h
        .iter()
        .zip(&log_b)
        .map(|(h, b)| log_add_exp(w_h + h, w_b + b))
        .collect()
}

/// Subset-family log-score for `FixedCount` or `BoundedBelowHalf`, evaluated
/// with the subset-sum dynamic program.
pub fn log_score_subset(
    r: &ReportMatrix,
    s: &StateSequence,
    model: ByzantineModel,
    eps: f64,
    delta_fc: f64,
) -> Result<f64> {
    check_probability("eps", eps)?;
    check_probability("delta_fc", delta_fc)?;
    model.validate(r.nodes())?;
    let (k_lo, k_hi) = subset_range(model, r.nodes())?;
    let counts = match_counts(r, s)?;
    let log_h_t = per_count_table(eps, r.len());
    let log_b_t = per_count_table(delta_fc, r.len());
    let log_h: Vec<f64> = counts.0.iter().map(|&t| log_h_t[t]).collect();
    let log_b: Vec<f64> = counts.0.iter().map(|&t| log_b_t[t]).collect();
    let mut scratch = DpScratch::default();
    let sums = log_subset_sums_into(&log_b, &log_h, k_lo, k_hi, &mut scratch);
    Ok(log_sum_exp(&sums[k_lo..=k_hi]))
}

fn subset_range(model: ByzantineModel, n: usize) -> Result<(usize, usize)> {
    match model {
        ByzantineModel::FixedCount(k) => Ok((k, k)),
        ByzantineModel::BoundedBelowHalf => Ok((0, ByzantineModel::max_byzantines(n))),
        other => Err(Error::InvalidModel {
            n,
            reason: format!("{other} is not a subset-family model"),
        }),
    }
}

/// Picks the first index whose score exceeds every earlier pick by more than
/// [`TIE_TOLERANCE`]; all `-inf` (or empty) yields 0.
pub fn argmax_lexicographic<I: IntoIterator<Item = f64>>(scores: I) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (idx, score) in scores.into_iter().enumerate() {
        if idx == 0 || beats(score, best_score) {
            best = idx;
            best_score = score;
        }
    }
    best
}

#[inline]
fn beats(score: f64, best: f64) -> bool {
    if best == f64::NEG_INFINITY {
        score > best
    } else {
        score > best + TIE_TOLERANCE
    }
}

/// `m_eq(i)` for every node under every hypothesis, flattened as
/// `counts[code * n + i]`.
#[derive(Debug, Clone)]
pub struct HypothesisCounts {
    nodes: usize,
    len: usize,
    counts: Vec<u8>,
}

impl HypothesisCounts {
    pub fn new(r: &ReportMatrix) -> Result<Self> {
        let (nodes, len) = (r.nodes(), r.len());
        if len > MAX_HYPOTHESIS_BITS {
            return Err(Error::TooManyHypotheses {
                m: len,
                limit: MAX_HYPOTHESIS_BITS,
            });
        }
        let rows: Vec<u64> = (0..nodes)
            .map(|i| r.row(i).iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
            .collect();
        let hypotheses = 1usize << len;
        let mut counts = Vec::with_capacity(hypotheses * nodes);
        for code in 0..hypotheses as u64 {
            counts.extend(
                rows.iter()
                    .map(|&row| (len as u32 - (row ^ code).count_ones()) as u8),
            );
        }
        Ok(Self { nodes, len, counts })
    }

    pub fn hypotheses(&self) -> usize {
        1 << self.len
    }

    pub fn for_code(&self, code: usize) -> &[u8] {
        &self.counts[code * self.nodes..(code + 1) * self.nodes]
    }
}

#[derive(Debug, Clone)]
enum Rule {
    Independent {
        per_count: Vec<f64>,
    },
    Subset {
        k_lo: usize,
        k_hi: usize,
        log_h_t: Vec<f64>,
        log_b_t: Vec<f64>,
        /// Per-count weights divided by `max(b, h)`, and the log of that scale.
        scaled_h_t: Vec<f64>,
        scaled_b_t: Vec<f64>,
        log_scale_t: Vec<f64>,
    },
}

/// Below this the linear-domain DP result may have lost precision to
/// underflow, and the log-domain DP is used instead.
const LINEAR_FLOOR: f64 = 1e-280;

/// A fusion rule specialized to one assumption and matrix shape, with
/// per-count likelihood tables precomputed and DP scratch reused.
#[derive(Debug, Clone)]
pub struct Fuser {
    nodes: usize,
    len: usize,
    rule: Rule,
    scratch: DpScratch,
    log_b: Vec<f64>,
    log_h: Vec<f64>,
    lin_b: Vec<f64>,
    lin_h: Vec<f64>,
}

impl Fuser {
    pub fn new(assumption: &FusionAssumption, nodes: usize, len: usize) -> Result<Self> {
        check_probability("eps", assumption.eps)?;
        check_probability("pmal_fc", assumption.pmal_fc)?;
        assumption.model.validate(nodes)?;
        if len > MAX_HYPOTHESIS_BITS {
            return Err(Error::TooManyHypotheses {
                m: len,
                limit: MAX_HYPOTHESIS_BITS,
            });
        }
        let delta = assumption.delta_fc();
        let rule = match assumption.model.independent_alpha() {
            Some(alpha) => Rule::Independent {
                per_count: independent_table(alpha, assumption.eps, delta, len),
            },
            None => {
                let (k_lo, k_hi) = subset_range(assumption.model, nodes)?;
                let log_h_t = per_count_table(assumption.eps, len);
                let log_b_t = per_count_table(delta, len);
                let log_scale_t: Vec<f64> = log_h_t
                    .iter()
                    .zip(&log_b_t)
                    .map(|(h, b)| h.max(*b))
                    .collect();
                let scaled = |table: &[f64]| -> Vec<f64> {
                    table
                        .iter()
                        .zip(&log_scale_t)
                        .map(|(v, s)| if s.is_finite() { (v - s).exp() } else { 0.0 })
                        .collect()
                };
                Rule::Subset {
                    k_lo,
                    k_hi,
                    scaled_h_t: scaled(&log_h_t),
                    scaled_b_t: scaled(&log_b_t),
                    log_scale_t,
                    log_h_t,
                    log_b_t,
                }
            }
        };
        Ok(Self {
            nodes,
            len,
            rule,
            scratch: DpScratch::default(),
            log_b: Vec::with_capacity(nodes),
            log_h: Vec::with_capacity(nodes),
            lin_b: Vec::with_capacity(nodes),
            lin_h: Vec::with_capacity(nodes),
        })
    }

    /// Log-score of a hypothesis given its match counts.
    pub fn score_counts(&mut self, counts: &[u8]) -> f64 {
        match &self.rule {
            Rule::Independent { per_count } => counts.iter().map(|&t| per_count[t as usize]).sum(),
            Rule::Subset {
                k_lo,
                k_hi,
                log_h_t,
                log_b_t,
                scaled_h_t,
                scaled_b_t,
                log_scale_t,
            } => {
                self.lin_b.clear();
                self.lin_h.clear();
                let mut log_scale = 0.0;
                for &t in counts {
                    let t = t as usize;
                    log_scale += log_scale_t[t];
                    self.lin_b.push(scaled_b_t[t]);
                    self.lin_h.push(scaled_h_t[t]);
                }
                if log_scale == f64::NEG_INFINITY {
                    return log_scale;
                }
                let total: f64 =
                    subset_sums_into(&self.lin_b, &self.lin_h, *k_lo, *k_hi, &mut self.scratch)
                        [*k_lo..=*k_hi]
                        .iter()
                        .sum();
                if total > LINEAR_FLOOR {
                    return total.ln() + log_scale;
                }
                self.log_b.clear();
                self.log_h.clear();
                self.log_b
                    .extend(counts.iter().map(|&t| log_b_t[t as usize]));
                self.log_h
                    .extend(counts.iter().map(|&t| log_h_t[t as usize]));
                let sums =
                    log_subset_sums_into(&self.log_b, &self.log_h, *k_lo, *k_hi, &mut self.scratch);
                if k_lo == k_hi {
                    sums[*k_lo]
                } else {
                    log_sum_exp(&sums[*k_lo..=*k_hi])
                }
            }
        }
    }

    /// MAP hypothesis code for precomputed match counts.
    pub fn decide_code(&mut self, counts: &HypothesisCounts) -> u64 {
        debug_assert_eq!((counts.nodes, counts.len), (self.nodes, self.len));
        let mut best = 0u64;
        let mut best_score = f64::NEG_INFINITY;
        for code in 0..counts.hypotheses() {
            let score = self.score_counts(counts.for_code(code));
            if code == 0 || beats(score, best_score) {
                best = code as u64;
                best_score = score;
            }
        }
        best
    }

    pub fn decide(&mut self, r: &ReportMatrix) -> Result<StateSequence> {
        if (r.nodes(), r.len()) != (self.nodes, self.len) {
            return Err(Error::DimensionMismatch(format!(
                "fuser built for {}x{}, got {}x{} reports",
                self.nodes,
                self.len,
                r.nodes(),
                r.len()
            )));
        }
        let counts = HypothesisCounts::new(r)?;
        Ok(StateSequence::from_code(
            self.decide_code(&counts),
            self.len,
        ))
    }
}

/// MAP decision on the whole sequence under `assumption`.
pub fn fuse(r: &ReportMatrix, assumption: &FusionAssumption) -> Result<StateSequence> {
    Fuser::new(assumption, r.nodes(), r.len())?.decide(r)
}

/// Per-component majority vote; a column tie (even `n`) decides 0.
pub fn fuse_majority(r: &ReportMatrix) -> StateSequence {
    StateSequence::new(
        (0..r.len())
            .map(|j| 2 * r.column_sum(j) > r.nodes())
            .collect(),
    )
}
